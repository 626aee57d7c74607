#include "deint/clustmetrics.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace deint::clustmetrics {

namespace {

std::vector<int> dense_relabel(std::span<const int> labels) {
    std::unordered_map<int, int> map;
    map.reserve(labels.size());
    std::vector<int> out;
    out.reserve(labels.size());
    for (int v : labels) {
        auto [it, inserted] = map.try_emplace(v, static_cast<int>(map.size()));
        out.push_back(it->second);
    }
    return out;
}

double comb2(double n) { return n * (n - 1.0) / 2.0; }

}  // namespace

long long ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), 0LL);
}

ConfusionMatrix build_confusion(std::span<const int> truth, std::span<const int> pred) {
    if (truth.size() != pred.size())
        throw std::invalid_argument("build_confusion: label lists differ in length");
    if (truth.empty()) throw std::invalid_argument("build_confusion: empty label lists");

    const auto t = dense_relabel(truth);
    const auto p = dense_relabel(pred);
    ConfusionMatrix c;
    c.rows = *std::max_element(t.begin(), t.end()) + 1;
    c.cols = *std::max_element(p.begin(), p.end()) + 1;
    c.counts.assign(static_cast<std::size_t>(c.rows) * c.cols, 0);
    for (std::size_t k = 0; k < t.size(); ++k) ++c.at(t[k], p[k]);
    return c;
}

std::vector<Cell> column_maxima(const ConfusionMatrix& c) {
    std::vector<Cell> maxima;
    maxima.reserve(c.cols);
    for (int j = 0; j < c.cols; ++j) {
        int best = 0;
        for (int i = 1; i < c.rows; ++i) {
            if (c.at(i, j) > c.at(best, j)) best = i;
        }
        maxima.push_back({best, j});
    }
    return maxima;
}

double cluster_purity(const ConfusionMatrix& c) {
    const long long total = c.total();
    if (total <= 0) throw std::invalid_argument("cluster_purity: empty confusion matrix");
    long long in_maxima = 0;
    for (const Cell& m : column_maxima(c)) in_maxima += c.at(m.row, m.col);
    return static_cast<double>(in_maxima) / static_cast<double>(total);
}

double fragmentation_ratio(const ConfusionMatrix& c) {
    std::vector<int> maxima_per_row(c.rows, 0);
    for (const Cell& m : column_maxima(c)) ++maxima_per_row[m.row];
    long long fragments = 0;
    for (int n : maxima_per_row) fragments += std::max(0, n - 1);
    return static_cast<double>(fragments) / static_cast<double>(c.cols);
}

double detection_ratio(const ConfusionMatrix& c) {
    std::vector<char> covered(c.rows, 0);
    for (const Cell& m : column_maxima(c)) covered[m.row] = 1;
    int uncovered = 0;
    for (char v : covered) uncovered += (v == 0);
    return 1.0 - static_cast<double>(uncovered) / static_cast<double>(c.rows);
}

double ari(std::span<const int> truth, std::span<const int> pred) {
    const ConfusionMatrix c = build_confusion(truth, pred);
    const double n = static_cast<double>(c.total());

    double sum_cells = 0.0;
    for (long long v : c.counts) sum_cells += comb2(static_cast<double>(v));
    double sum_rows = 0.0;
    for (int i = 0; i < c.rows; ++i) {
        long long a = 0;
        for (int j = 0; j < c.cols; ++j) a += c.at(i, j);
        sum_rows += comb2(static_cast<double>(a));
    }
    double sum_cols = 0.0;
    for (int j = 0; j < c.cols; ++j) {
        long long b = 0;
        for (int i = 0; i < c.rows; ++i) b += c.at(i, j);
        sum_cols += comb2(static_cast<double>(b));
    }

    // pair-confusion form, stable when the expected and maximum index meet
    const double tp = sum_cells;
    const double fn = sum_rows - sum_cells;
    const double fp = sum_cols - sum_cells;
    const double tn = comb2(n) - tp - fn - fp;
    if (fn == 0.0 && fp == 0.0) return 1.0;
    return 2.0 * (tp * tn - fn * fp) / ((tp + fn) * (fn + tn) + (tp + fp) * (fp + tn));
}

double nmi(std::span<const int> truth, std::span<const int> pred) {
    const ConfusionMatrix c = build_confusion(truth, pred);
    if (c.rows == 1 && c.cols == 1) return 1.0;

    const double n = static_cast<double>(c.total());
    std::vector<double> row_sum(c.rows, 0.0), col_sum(c.cols, 0.0);
    for (int i = 0; i < c.rows; ++i)
        for (int j = 0; j < c.cols; ++j) {
            row_sum[i] += static_cast<double>(c.at(i, j));
            col_sum[j] += static_cast<double>(c.at(i, j));
        }

    auto entropy = [n](const std::vector<double>& sums) {
        double h = 0.0;
        for (double s : sums) {
            if (s > 0.0) h -= (s / n) * std::log(s / n);
        }
        return h;
    };
    const double hu = entropy(row_sum);
    const double hv = entropy(col_sum);
    if (hu == 0.0 || hv == 0.0) return 0.0;

    double mi = 0.0;
    for (int i = 0; i < c.rows; ++i) {
        for (int j = 0; j < c.cols; ++j) {
            const double nij = static_cast<double>(c.at(i, j));
            if (nij > 0.0) mi += (nij / n) * std::log(nij * n / (row_sum[i] * col_sum[j]));
        }
    }
    const double value = mi / (0.5 * (hu + hv));
    return std::clamp(value, 0.0, 1.0);
}

LabelScores score_labels(std::span<const int> truth, std::span<const int> pred) {
    const ConfusionMatrix c = build_confusion(truth, pred);
    LabelScores s;
    s.cp = cluster_purity(c);
    s.cnfr = non_fragmentation_ratio(c);
    s.cdr = detection_ratio(c);
    s.ari = ari(truth, pred);
    s.nmi = nmi(truth, pred);
    return s;
}

}  // namespace deint::clustmetrics
