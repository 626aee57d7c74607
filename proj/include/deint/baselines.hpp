#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "deint/pulsegen.hpp"

namespace deint::baselines {

// One row per pulse: (toa, rf, pw, am) min-max scaled to [0,1] per scenario;
// a degenerate column (min = max) maps to 0.5.
using FeatureRow = std::array<double, 4>;
std::vector<FeatureRow> feature_matrix(const pulsegen::Scenario& scenario);

// Classic density-based clustering with Euclidean distance. A point is core
// when its eps-ball (including itself) holds at least min_pts points. Core
// points are clustered by index-order expansion over core-core edges; a
// non-core point joins the cluster of its lowest-index core neighbor, or
// stays noise (-1).
std::vector<int> dbscan(std::span<const FeatureRow> features, double eps, int min_pts);

// Flat-kernel mean shift: each point iterates to the mean of its bandwidth
// window until the displacement drops below 1e-6 or 300 iterations pass;
// modes closer than bandwidth/2 are merged in index order.
std::vector<int> mean_shift(std::span<const FeatureRow> features, double bandwidth);

// Noise points become singleton clusters so every pulse carries a label.
std::vector<int> noise_to_singletons(std::vector<int> labels);

enum class Method { Dbscan, MeanShift };

struct BaselineParams {
    double eps = 0.05;
    int min_pts = 3;
    double bandwidth = 0.2;
};

std::vector<int> run_baseline(Method method, const BaselineParams& params,
                              const pulsegen::Scenario& scenario);

struct TuneResult {
    BaselineParams params;
    double mean_ari = 0.0;
};

// Grid search by mean ARI over the given scenarios (train split only, for
// fairness); ties keep the earliest grid entry.
TuneResult tune_baseline(Method method, std::span<const pulsegen::Scenario> scenarios,
                         std::span<const BaselineParams> grid);

std::vector<BaselineParams> default_grid(Method method);

std::string method_name(Method method);

}  // namespace deint::baselines
