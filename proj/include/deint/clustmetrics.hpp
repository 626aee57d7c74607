#pragma once

#include <span>
#include <vector>

namespace deint::clustmetrics {

// Counts of (ground-truth row, predicted column) pairs. Rows and columns are
// densely indexed; build_confusion relabels arbitrary label values by first
// appearance.
struct ConfusionMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<long long> counts;  // rows x cols, row-major

    long long at(int i, int j) const { return counts[static_cast<std::size_t>(i) * cols + j]; }
    long long& at(int i, int j) { return counts[static_cast<std::size_t>(i) * cols + j]; }
    long long total() const;
};

struct Cell {
    int row = 0;
    int col = 0;
    bool operator==(const Cell&) const = default;
};

ConfusionMatrix build_confusion(std::span<const int> truth, std::span<const int> pred);

// One cell per column: the row holding the column's largest count, lowest row
// index on ties.
std::vector<Cell> column_maxima(const ConfusionMatrix& c);

// Fraction of all elements lying in column-max cells, in (0, 1].
double cluster_purity(const ConfusionMatrix& c);

// Per row, column maxima beyond the first each count as one fragment;
// normalized by the number of predicted clusters. In [0, (P-1)/P].
double fragmentation_ratio(const ConfusionMatrix& c);

inline double non_fragmentation_ratio(const ConfusionMatrix& c) {
    return 1.0 - fragmentation_ratio(c);
}

// Fraction of ground-truth rows owning at least one column maximum.
double detection_ratio(const ConfusionMatrix& c);

// Adjusted Rand index via pair counting with expected-index correction.
double ari(std::span<const int> truth, std::span<const int> pred);

// Mutual information normalized by the arithmetic mean of the two label
// entropies (natural log). Both partitions single-cluster -> 1; zero MI -> 0.
double nmi(std::span<const int> truth, std::span<const int> pred);

struct LabelScores {
    double cp = 0.0;
    double cnfr = 0.0;
    double cdr = 0.0;
    double ari = 0.0;
    double nmi = 0.0;
};

// All five metrics of one scenario's truth/prediction pair.
LabelScores score_labels(std::span<const int> truth, std::span<const int> pred);

}  // namespace deint::clustmetrics
