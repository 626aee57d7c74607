#include "deint/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "deint/clustmetrics.hpp"

namespace deint::baselines {

std::vector<FeatureRow> feature_matrix(const pulsegen::Scenario& scenario) {
    const std::size_t n = scenario.pulses.size();
    std::vector<FeatureRow> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        const pulsegen::Pulse& p = scenario.pulses[i];
        rows[i] = {p.toa_us, p.rf_mhz, p.pw_us, p.am};
    }
    for (int col = 0; col < 4; ++col) {
        double mn = rows.empty() ? 0.0 : rows[0][col];
        double mx = mn;
        for (const FeatureRow& r : rows) {
            mn = std::min(mn, r[col]);
            mx = std::max(mx, r[col]);
        }
        for (FeatureRow& r : rows)
            r[col] = (mx > mn) ? (r[col] - mn) / (mx - mn) : 0.5;
    }
    return rows;
}

namespace {

double dist2(const FeatureRow& a, const FeatureRow& b) {
    double s = 0.0;
    for (int k = 0; k < 4; ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

}  // namespace

std::vector<int> dbscan(std::span<const FeatureRow> features, double eps, int min_pts) {
    if (eps <= 0.0) throw std::invalid_argument("dbscan: eps must be > 0");
    if (min_pts < 1) throw std::invalid_argument("dbscan: min_pts must be >= 1");
    const int n = static_cast<int>(features.size());
    const double eps2 = eps * eps;

    std::vector<std::vector<int>> neighbors(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            if (dist2(features[i], features[j]) <= eps2) neighbors[i].push_back(j);
    }
    std::vector<char> core(n, 0);
    for (int i = 0; i < n; ++i) core[i] = neighbors[i].size() >= static_cast<std::size_t>(min_pts);

    std::vector<int> labels(n, -1);
    int next_cluster = 0;
    for (int seed = 0; seed < n; ++seed) {
        if (!core[seed] || labels[seed] != -1) continue;
        const int cluster = next_cluster++;
        std::deque<int> queue{seed};
        labels[seed] = cluster;
        while (!queue.empty()) {
            const int p = queue.front();
            queue.pop_front();
            for (int q : neighbors[p]) {
                if (core[q] && labels[q] == -1) {
                    labels[q] = cluster;
                    queue.push_back(q);
                }
            }
        }
    }
    // border points join their lowest-index core neighbor's cluster
    for (int i = 0; i < n; ++i) {
        if (core[i]) continue;
        for (int q : neighbors[i]) {
            if (core[q]) {
                labels[i] = labels[q];
                break;
            }
        }
    }
    return labels;
}

std::vector<int> mean_shift(std::span<const FeatureRow> features, double bandwidth) {
    if (bandwidth <= 0.0) throw std::invalid_argument("mean_shift: bandwidth must be > 0");
    const int n = static_cast<int>(features.size());
    const double bw2 = bandwidth * bandwidth;

    std::vector<FeatureRow> modes(features.begin(), features.end());
    for (int i = 0; i < n; ++i) {
        FeatureRow x = modes[i];
        for (int iter = 0; iter < 300; ++iter) {
            FeatureRow mean{0.0, 0.0, 0.0, 0.0};
            int count = 0;
            for (int j = 0; j < n; ++j) {
                if (dist2(x, features[j]) <= bw2) {
                    for (int k = 0; k < 4; ++k) mean[k] += features[j][k];
                    ++count;
                }
            }
            for (int k = 0; k < 4; ++k) mean[k] /= count;  // count >= 1 (the point itself)
            const double moved = dist2(x, mean);
            x = mean;
            if (moved < 1e-6 * 1e-6) break;
        }
        modes[i] = x;
    }

    // merge modes closer than bandwidth/2, in index order
    std::vector<FeatureRow> reps;
    std::vector<int> labels(n, -1);
    const double merge2 = (bandwidth / 2.0) * (bandwidth / 2.0);
    for (int i = 0; i < n; ++i) {
        for (std::size_t g = 0; g < reps.size(); ++g) {
            if (dist2(modes[i], reps[g]) <= merge2) {
                labels[i] = static_cast<int>(g);
                break;
            }
        }
        if (labels[i] == -1) {
            labels[i] = static_cast<int>(reps.size());
            reps.push_back(modes[i]);
        }
    }
    return labels;
}

std::vector<int> noise_to_singletons(std::vector<int> labels) {
    int next = 0;
    for (int l : labels) next = std::max(next, l + 1);
    for (int& l : labels)
        if (l < 0) l = next++;
    return labels;
}

std::vector<int> run_baseline(Method method, const BaselineParams& params,
                              const pulsegen::Scenario& scenario) {
    const auto features = feature_matrix(scenario);
    std::vector<int> labels;
    switch (method) {
        case Method::Dbscan:
            labels = dbscan(features, params.eps, params.min_pts);
            break;
        case Method::MeanShift:
            labels = mean_shift(features, params.bandwidth);
            break;
    }
    return noise_to_singletons(std::move(labels));
}

TuneResult tune_baseline(Method method, std::span<const pulsegen::Scenario> scenarios,
                         std::span<const BaselineParams> grid) {
    if (grid.empty()) throw std::invalid_argument("tune_baseline: empty parameter grid");
    if (scenarios.empty()) throw std::invalid_argument("tune_baseline: no scenarios");

    TuneResult best;
    bool first = true;
    for (const BaselineParams& params : grid) {
        double sum_ari = 0.0;
        for (const pulsegen::Scenario& s : scenarios) {
            std::vector<int> truth;
            truth.reserve(s.pulses.size());
            for (const pulsegen::Pulse& p : s.pulses) truth.push_back(p.emitter_id);
            const auto pred = run_baseline(method, params, s);
            sum_ari += clustmetrics::ari(truth, pred);
        }
        const double mean_ari = sum_ari / static_cast<double>(scenarios.size());
        if (first || mean_ari > best.mean_ari) {
            best.params = params;
            best.mean_ari = mean_ari;
            first = false;
        }
    }
    return best;
}

std::vector<BaselineParams> default_grid(Method method) {
    std::vector<BaselineParams> grid;
    if (method == Method::Dbscan) {
        for (double eps : {0.01, 0.02, 0.03, 0.05, 0.08, 0.12, 0.2, 0.3}) {
            for (int min_pts : {2, 3, 5}) {
                BaselineParams p;
                p.eps = eps;
                p.min_pts = min_pts;
                grid.push_back(p);
            }
        }
    } else {
        for (double bw : {0.05, 0.1, 0.15, 0.2, 0.3, 0.5}) {
            BaselineParams p;
            p.bandwidth = bw;
            grid.push_back(p);
        }
    }
    return grid;
}

std::string method_name(Method method) {
    return method == Method::Dbscan ? "dbscan" : "meanshift";
}

}  // namespace deint::baselines
