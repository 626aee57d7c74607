#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "deint/baselines.hpp"
#include "deint/clustmetrics.hpp"
#include "deint/common.hpp"

using namespace deint;
using namespace deint::baselines;

namespace {

std::vector<FeatureRow> line_points(std::initializer_list<double> xs) {
    std::vector<FeatureRow> rows;
    for (double x : xs) rows.push_back({x, 0.5, 0.5, 0.5});
    return rows;
}

// Independent DBSCAN reference: pairwise core test, union-find over core
// pairs, border points via their lowest-index core neighbor. Different
// machinery than the production queue expansion.
struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

std::vector<int> reference_dbscan(std::span<const FeatureRow> pts, double eps, int min_pts) {
    const int n = static_cast<int>(pts.size());
    auto d2 = [&](int i, int j) {
        double s = 0.0;
        for (int k = 0; k < 4; ++k) s += (pts[i][k] - pts[j][k]) * (pts[i][k] - pts[j][k]);
        return s;
    };
    std::vector<char> core(n, 0);
    for (int i = 0; i < n; ++i) {
        int cnt = 0;
        for (int j = 0; j < n; ++j) cnt += d2(i, j) <= eps * eps;
        core[i] = cnt >= min_pts;
    }
    UnionFind uf(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (core[i] && core[j] && d2(i, j) <= eps * eps) uf.unite(i, j);

    std::vector<int> labels(n, -1);
    std::vector<int> root_label(n, -1);
    int next = 0;
    for (int i = 0; i < n; ++i) {
        if (!core[i]) continue;
        const int r = uf.find(i);
        if (root_label[r] == -1) root_label[r] = next++;
        labels[i] = root_label[r];
    }
    for (int i = 0; i < n; ++i) {
        if (core[i]) continue;
        for (int j = 0; j < n; ++j) {
            if (core[j] && d2(i, j) <= eps * eps) {
                labels[i] = labels[j];
                break;
            }
        }
    }
    return labels;
}

std::vector<int> canonical(std::vector<int> labels) {
    std::vector<int> map;
    for (int& l : labels) {
        if (l < 0) continue;
        const auto it = std::find(map.begin(), map.end(), l);
        if (it == map.end()) {
            map.push_back(l);
            l = static_cast<int>(map.size()) - 1;
        } else {
            l = static_cast<int>(it - map.begin());
        }
    }
    return labels;
}

}  // namespace

TEST_CASE("feature matrix scales each column to [0,1] with degenerate columns at 0.5") {
    pulsegen::Scenario s;
    s.window_us = 100.0;
    s.pulses = {{0.0, 1000.0, 2.0, 0.5, 0}, {50.0, 2000.0, 2.0, 0.7, 0},
                {100.0, 3000.0, 2.0, 0.9, 1}};
    s.emitter_count = 2;
    const auto rows = feature_matrix(s);
    CHECK(rows[0][0] == doctest::Approx(0.0));
    CHECK(rows[1][0] == doctest::Approx(0.5));
    CHECK(rows[2][0] == doctest::Approx(1.0));
    CHECK(rows[0][1] == doctest::Approx(0.0));
    CHECK(rows[2][1] == doctest::Approx(1.0));
    for (const auto& r : rows) CHECK(r[2] == doctest::Approx(0.5));  // constant PW
    for (const auto& r : rows)
        for (double v : r) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
}

TEST_CASE("dbscan separates two 1-D groups across a large gap") {
    const auto pts = line_points({0.0, 1.0, 2.0, 10.0, 11.0});
    const auto labels = dbscan(pts, 1.5, 2);
    CHECK(labels[0] == labels[1]);
    CHECK(labels[1] == labels[2]);
    CHECK(labels[3] == labels[4]);
    CHECK(labels[0] != labels[3]);
    CHECK(std::count(labels.begin(), labels.end(), -1) == 0);
}

TEST_CASE("an isolated point stays noise") {
    const auto pts = line_points({0.0, 0.1, 0.2, 50.0});
    const auto labels = dbscan(pts, 0.5, 2);
    CHECK(labels[3] == -1);
    CHECK(labels[0] >= 0);
}

TEST_CASE("dbscan parameter validation") {
    const auto pts = line_points({0.0, 1.0});
    CHECK_THROWS_AS(dbscan(pts, -1.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(dbscan(pts, 1.0, 0), std::invalid_argument);
}

TEST_CASE("dbscan matches the union-find reference on 200 random instances") {
    Rng rng(1234);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 5 + static_cast<int>(rng.uniform_int(0, 45));
        std::vector<FeatureRow> pts(n);
        for (auto& p : pts)
            for (double& v : p) v = rng.uniform(0.0, 1.0);
        const double eps = rng.uniform(0.05, 0.4);
        const int min_pts = 2 + static_cast<int>(rng.uniform_int(0, 3));

        const auto mine = canonical(dbscan(pts, eps, min_pts));
        const auto ref = canonical(reference_dbscan(pts, eps, min_pts));
        REQUIRE(mine == ref);
    }
}

TEST_CASE("dbscan labelings are order-invariant up to relabeling") {
    Rng rng(77);
    // well-separated blobs avoid border-point ambiguity
    std::vector<FeatureRow> pts;
    std::vector<int> truth;
    for (int blob = 0; blob < 3; ++blob) {
        for (int i = 0; i < 12; ++i) {
            FeatureRow r;
            for (double& v : r) v = 0.3 * blob + rng.uniform(0.0, 0.05);
            pts.push_back(r);
            truth.push_back(blob);
        }
    }
    const auto base = dbscan(pts, 0.12, 3);

    std::vector<int> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::vector<FeatureRow> shuffled;
    for (int i : order) shuffled.push_back(pts[i]);
    const auto permuted = dbscan(shuffled, 0.12, 3);

    std::vector<int> realigned(pts.size());
    for (std::size_t k = 0; k < order.size(); ++k) realigned[order[k]] = permuted[k];
    CHECK(clustmetrics::ari(base, realigned) == doctest::Approx(1.0));
}

TEST_CASE("mean shift: two tight groups, one mode each") {
    const auto pts = line_points({0.0, 0.2, 10.0, 10.2});
    const auto labels = mean_shift(pts, 1.0);
    CHECK(labels[0] == labels[1]);
    CHECK(labels[2] == labels[3]);
    CHECK(labels[0] != labels[2]);
}

TEST_CASE("mean shift degenerate inputs") {
    CHECK(mean_shift(line_points({3.0}), 0.5) == std::vector<int>{0});
    const auto same = mean_shift(line_points({2.0, 2.0, 2.0}), 0.5);
    CHECK(same == std::vector<int>{0, 0, 0});
    CHECK_THROWS_AS(mean_shift(line_points({1.0}), 0.0), std::invalid_argument);
}

TEST_CASE("noise points become singleton clusters") {
    const auto out = noise_to_singletons({0, -1, 1, -1, 0});
    CHECK(out == std::vector<int>{0, 2, 1, 3, 0});
}

TEST_CASE("tune_baseline picks the best grid entry") {
    // three RF-separated constant emitters; generous eps merges everything,
    // small eps shatters, the middle one matches the truth
    pulsegen::EmitterSpec a, b, c;
    a.pri = pulsegen::PriPattern::constant(40.0);
    a.rf = pulsegen::RfPattern::constant(2000.0);
    a.pw_us = 5.0;
    a.am_base = 0.3;
    b = a;
    b.pri = pulsegen::PriPattern::constant(55.0);
    b.rf = pulsegen::RfPattern::constant(9000.0);
    b.pw_us = 20.0;
    b.am_base = 0.6;
    c = a;
    c.pri = pulsegen::PriPattern::constant(70.0);
    c.rf = pulsegen::RfPattern::constant(16000.0);
    c.pw_us = 60.0;
    c.am_base = 0.9;

    std::vector<pulsegen::Scenario> scenarios;
    for (std::uint64_t seed = 0; seed < 4; ++seed)
        scenarios.push_back(
            pulsegen::compose_scenario(std::vector<pulsegen::EmitterSpec>{a, b, c}, 640.0, seed));

    SUBCASE("grid of one returns it") {
        const std::vector<BaselineParams> grid{{0.07, 2, 0.0}};
        const TuneResult r = tune_baseline(Method::Dbscan, scenarios, grid);
        CHECK(r.params.eps == 0.07);
    }
    SUBCASE("empty grid is rejected") {
        CHECK_THROWS_AS(tune_baseline(Method::Dbscan, scenarios, {}), std::invalid_argument);
    }
    SUBCASE("the tuned eps clusters the train set well") {
        const auto grid = default_grid(Method::Dbscan);
        const TuneResult r = tune_baseline(Method::Dbscan, scenarios, grid);
        CHECK(r.mean_ari > 0.5);
    }
}

TEST_CASE("baseline runs are deterministic") {
    pulsegen::EmitterSpec a, b;
    a.pri = pulsegen::PriPattern::jittered(45.0, 0.2);
    a.rf = pulsegen::RfPattern::constant(3000.0);
    a.pw_us = 3.0;
    a.am_base = 0.4;
    a.am_jitter_fraction = 0.1;
    b = a;
    b.rf = pulsegen::RfPattern::constant(12000.0);
    b.pw_us = 30.0;
    const auto scenario =
        pulsegen::compose_scenario(std::vector<pulsegen::EmitterSpec>{a, b}, 640.0, 3);
    BaselineParams params;
    params.eps = 0.08;
    params.min_pts = 3;
    params.bandwidth = 0.2;
    CHECK(run_baseline(Method::Dbscan, params, scenario) ==
          run_baseline(Method::Dbscan, params, scenario));
    CHECK(run_baseline(Method::MeanShift, params, scenario) ==
          run_baseline(Method::MeanShift, params, scenario));
}
