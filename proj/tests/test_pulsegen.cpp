#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "deint/common.hpp"
#include "deint/pulsegen.hpp"

using namespace deint;
using namespace deint::pulsegen;

namespace {

EmitterSpec constant_emitter(double pri, double rf, double pw = 1.0, double am = 0.5) {
    EmitterSpec e;
    e.pri = PriPattern::constant(pri);
    e.rf = RfPattern::constant(rf);
    e.pw_us = pw;
    e.am_base = am;
    return e;
}

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("constant PRI with zero phase lands on the arithmetic grid") {
    const auto pulses = synth_emitter(constant_emitter(100.0, 9000.0), 1000.0, 0, 1, 0.0);
    REQUIRE(pulses.size() == 10);
    for (int i = 0; i < 10; ++i) CHECK(pulses[i].toa_us == doctest::Approx(100.0 * i));
}

TEST_CASE("staggered PRI cycles through its list") {
    EmitterSpec e = constant_emitter(100.0, 9000.0);
    e.pri = PriPattern::staggered({100.0, 50.0});
    const auto pulses = synth_emitter(e, 300.0, 0, 1, 0.0);
    // hand-unrolled: 0, +100 -> 100, +50 -> 150, +100 -> 250, +50 -> 300 (out)
    REQUIRE(pulses.size() == 4);
    CHECK(pulses[0].toa_us == doctest::Approx(0.0));
    CHECK(pulses[1].toa_us == doctest::Approx(100.0));
    CHECK(pulses[2].toa_us == doctest::Approx(150.0));
    CHECK(pulses[3].toa_us == doctest::Approx(250.0));
}

TEST_CASE("jittered PRI keeps every gap inside pri*(1 +- f)") {
    EmitterSpec e = constant_emitter(100.0, 9000.0);
    e.pri = PriPattern::jittered(100.0, 0.1);
    // over 1000 draws: windows long enough for ~1000 gaps total
    std::size_t gaps = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto pulses = synth_emitter(e, 5500.0, 0, seed);
        for (std::size_t i = 1; i < pulses.size(); ++i) {
            const double gap = pulses[i].toa_us - pulses[i - 1].toa_us;
            CHECK(gap >= 90.0 - 1e-12);
            CHECK(gap <= 110.0 + 1e-12);
            ++gaps;
        }
    }
    CHECK(gaps >= 1000);
}

TEST_CASE("window shorter than one PRI yields zero or one pulse") {
    const auto pulses = synth_emitter(constant_emitter(5000.0, 9000.0), 100.0, 0, 3);
    CHECK(pulses.size() <= 1);
}

TEST_CASE("rf hopping steps through the list with the configured period") {
    EmitterSpec e = constant_emitter(10.0, 9000.0);
    e.rf = RfPattern::hopping({1000.0, 2000.0, 3000.0}, 2);
    const auto pulses = synth_emitter(e, 100.0, 0, 1, 0.0);
    REQUIRE(pulses.size() == 10);
    const std::vector<double> expect{1000, 1000, 2000, 2000, 3000, 3000, 1000, 1000, 2000, 2000};
    for (std::size_t i = 0; i < pulses.size(); ++i)
        CHECK(pulses[i].rf_mhz == doctest::Approx(expect[i]));
}

TEST_CASE("synth_emitter is deterministic for a fixed seed") {
    EmitterSpec e = constant_emitter(70.0, 5000.0);
    e.pri = PriPattern::jittered(70.0, 0.2);
    e.am_jitter_fraction = 0.1;
    const auto a = synth_emitter(e, 2000.0, 0, 42);
    const auto b = synth_emitter(e, 2000.0, 0, 42);
    CHECK(a == b);
    const auto c = synth_emitter(e, 2000.0, 0, 43);
    CHECK(a != c);
}

TEST_CASE("invalid emitter specs are rejected") {
    EmitterSpec e = constant_emitter(100.0, 9000.0);
    e.pri.pri_us = -1.0;
    CHECK_THROWS_AS(e.validate(), ConfigError);
    e = constant_emitter(100.0, 9000.0);
    e.pri = PriPattern::jittered(100.0, 0.9);
    CHECK_THROWS_AS(e.validate(), ConfigError);
    e = constant_emitter(100.0, 9000.0);
    e.pri = PriPattern::staggered({});
    CHECK_THROWS_AS(e.validate(), ConfigError);
    e = constant_emitter(100.0, 9000.0);
    e.rf = RfPattern::hopping({1000.0}, 0);
    CHECK_THROWS_AS(e.validate(), ConfigError);
}

TEST_CASE("single-emitter scenario equals the emitter output") {
    const std::vector<EmitterSpec> specs{constant_emitter(100.0, 9000.0)};
    const Scenario s = compose_scenario(specs, 1000.0, 5);
    CHECK(s.emitter_count == 1);
    const auto direct = synth_emitter(specs[0], 1000.0, 0, mix_seed(5, 0));
    CHECK(s.pulses == direct);
}

TEST_CASE("two constant emitters merge into a sorted interleaved train") {
    // hand-merged arithmetic sequences with PRIs 100 and 70 over 700 us:
    // 7 pulses at 0,100,...,600 and 10 at 0,70,...,630 -> 17 total
    std::vector<EmitterSpec> specs{constant_emitter(100.0, 2000.0),
                                   constant_emitter(70.0, 9000.0)};
    // fixed phases via direct synthesis + manual merge as the oracle
    const auto a = synth_emitter(specs[0], 700.0, 0, 1, 0.0);
    const auto b = synth_emitter(specs[1], 700.0, 1, 2, 0.0);
    CHECK(a.size() + b.size() == 17);
    std::vector<double> merged;
    for (const auto& p : a) merged.push_back(p.toa_us);
    for (const auto& p : b) merged.push_back(p.toa_us);
    std::sort(merged.begin(), merged.end());

    const Scenario s = compose_scenario(specs, 700.0, 9);
    CHECK(s.emitter_count == 2);
    CHECK(std::is_sorted(s.pulses.begin(), s.pulses.end(),
                         [](const Pulse& x, const Pulse& y) { return x.toa_us < y.toa_us; }));
    for (const Pulse& p : s.pulses) CHECK(p.emitter_id < s.emitter_count);
}

TEST_CASE("eleven emitters are accepted, twelve are not") {
    std::vector<EmitterSpec> specs;
    for (int i = 0; i < 11; ++i)
        specs.push_back(constant_emitter(50.0 + i, 1000.0 + 500.0 * i));
    const Scenario s = compose_scenario(specs, 1000.0, 3);
    CHECK(s.emitter_count == 11);
    specs.push_back(constant_emitter(30.0, 17000.0));
    CHECK_THROWS_AS(compose_scenario(specs, 1000.0, 3), ConfigError);
}

TEST_CASE("labels are densified when an emitter lands no pulse") {
    // second emitter's PRI far exceeds the window; with phase beyond the
    // window end it contributes nothing
    std::vector<EmitterSpec> specs{constant_emitter(50.0, 2000.0),
                                   constant_emitter(100000.0, 9000.0)};
    bool saw_dense = false;
    for (std::uint64_t seed = 0; seed < 50 && !saw_dense; ++seed) {
        const Scenario s = compose_scenario(specs, 500.0, seed);
        std::set<int> ids;
        for (const Pulse& p : s.pulses) ids.insert(p.emitter_id);
        REQUIRE(static_cast<int>(ids.size()) == s.emitter_count);
        for (const Pulse& p : s.pulses) REQUIRE(p.emitter_id < s.emitter_count);
        if (s.emitter_count == 1 && !s.pulses.empty()) saw_dense = true;
    }
    CHECK(saw_dense);
}

TEST_CASE("generate_dataset: counts, determinism and single-emitter coverage") {
    DatasetSpec spec;
    auto [train_pool, test_pool] = default_pools(6, 5, 11);
    spec.pool_train = train_pool;
    spec.pool_test = test_pool;
    spec.train_scenarios = 12;
    spec.test_scenarios = 7;
    spec.concurrency_min = 1;
    spec.concurrency_max = 3;
    spec.window_us = 640.0;
    spec.master_seed = 2024;

    const Dataset a = generate_dataset(spec);
    CHECK(a.train.size() == 12);
    CHECK(a.test.size() == 7);
    for (const Scenario& s : a.train) {
        CHECK(!s.pulses.empty());
        CHECK(s.emitter_count >= 1);
        CHECK(s.emitter_count <= 3);
        for (const Pulse& p : s.pulses) CHECK(p.emitter_id < s.emitter_count);
    }
    // first |pool| scenarios cover each emitter alone
    for (std::size_t i = 0; i < train_pool.size(); ++i)
        CHECK(a.train[i].emitter_count == 1);

    const Dataset b = generate_dataset(spec);
    for (std::size_t i = 0; i < a.train.size(); ++i) CHECK(a.train[i].pulses == b.train[i].pulses);
}

TEST_CASE("generate_dataset: one scenario per split at minimum size") {
    DatasetSpec spec;
    auto [train_pool, test_pool] = default_pools(2, 2, 3);
    spec.pool_train = train_pool;
    spec.pool_test = test_pool;
    spec.train_scenarios = 1;
    spec.test_scenarios = 1;
    spec.concurrency_min = 1;
    spec.concurrency_max = 1;
    spec.window_us = 640.0;
    spec.master_seed = 5;
    const Dataset ds = generate_dataset(spec);
    REQUIRE(ds.train.size() == 1);
    REQUIRE(ds.test.size() == 1);
    CHECK(ds.train[0].emitter_count == 1);
    CHECK(ds.test[0].emitter_count == 1);
}

TEST_CASE("generate_dataset rejects a pool smaller than max concurrency") {
    DatasetSpec spec;
    auto [train_pool, test_pool] = default_pools(3, 3, 1);
    spec.pool_train = train_pool;
    spec.pool_test = test_pool;
    spec.concurrency_max = 5;
    CHECK_THROWS_AS(generate_dataset(spec), ConfigError);
}

TEST_CASE("generate_dataset rejects overlapping pools") {
    DatasetSpec spec;
    auto [train_pool, test_pool] = default_pools(3, 3, 1);
    test_pool[0] = train_pool[0];
    spec.pool_train = train_pool;
    spec.pool_test = test_pool;
    spec.concurrency_max = 2;
    CHECK_THROWS_AS(generate_dataset(spec), ConfigError);
}

TEST_CASE("pulse counts span a wide dynamic range at the paper window") {
    // 2.56 ms window analog: sparse slow emitters next to dense fast ones
    DatasetSpec spec;
    auto [train_pool, test_pool] = default_pools(20, 12, 42);
    spec.pool_train = train_pool;
    spec.pool_test = test_pool;
    spec.train_scenarios = 200;
    spec.test_scenarios = 50;
    spec.concurrency_min = 1;
    spec.concurrency_max = 5;
    spec.window_us = 2560.0;
    spec.master_seed = 42;
    const Dataset ds = generate_dataset(spec);
    std::size_t mn = SIZE_MAX, mx = 0;
    for (const Scenario& s : ds.train) {
        mn = std::min(mn, s.pulses.size());
        mx = std::max(mx, s.pulses.size());
    }
    CHECK(mn <= 10);
    CHECK(mx >= 500);
}

TEST_CASE("scenario files round-trip exactly") {
    DatasetSpec spec;
    auto [train_pool, test_pool] = default_pools(5, 4, 3);
    spec.pool_train = train_pool;
    spec.pool_test = test_pool;
    spec.train_scenarios = 20;
    spec.test_scenarios = 0;
    spec.concurrency_max = 3;
    spec.window_us = 640.0;
    spec.master_seed = 99;
    const Dataset ds = generate_dataset(spec);

    const auto path = temp_file("deint_roundtrip.jsonl");
    write_scenarios(path.string(), ds.train);
    const auto back = read_scenarios(path.string());
    REQUIRE(back.size() == ds.train.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].window_us == ds.train[i].window_us);
        CHECK(back[i].pulses == ds.train[i].pulses);
        CHECK(back[i].emitter_count == ds.train[i].emitter_count);
    }

    // determinism down to the bytes
    const auto path2 = temp_file("deint_roundtrip2.jsonl");
    write_scenarios(path2.string(), generate_dataset(spec).train);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    const std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    const std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
    std::filesystem::remove(path);
    std::filesystem::remove(path2);
}

TEST_CASE("empty file reads as an empty list") {
    const auto path = temp_file("deint_empty.jsonl");
    std::ofstream(path.string()).close();
    CHECK(read_scenarios(path.string()).empty());
    std::filesystem::remove(path);
}

TEST_CASE("truncated records name the offending line") {
    const auto path = temp_file("deint_truncated.jsonl");
    {
        std::ofstream out(path.string());
        out << R"({"window_us":640.0,"pulses":[[1.0,2.0,3.0,4.0,0]]})" << "\n";
        out << R"({"window_us":640.0,"pulses":[[1.0,2.0,3.0)" << "\n";
    }
    try {
        read_scenarios(path.string());
        FAIL("expected a parse error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST_CASE("default pools stay disjoint and within parameter ranges") {
    auto [train_pool, test_pool] = default_pools(20, 12, 3);
    CHECK(train_pool.size() == 20);
    CHECK(test_pool.size() == 12);
    auto check_pool = [](const std::vector<EmitterSpec>& pool) {
        for (const EmitterSpec& e : pool) {
            e.validate();
            const double pri = e.pri.first_pri();
            CHECK(pri >= 20.0);
            CHECK(pri <= 2000.0);
            CHECK(e.pw_us >= 0.2);
            CHECK(e.pw_us <= 100.0);
            CHECK(e.am_base >= 0.1);
            CHECK(e.am_base <= 1.0);
        }
    };
    check_pool(train_pool);
    check_pool(test_pool);

    std::set<double> train_rfs;
    for (const EmitterSpec& e : train_pool)
        train_rfs.insert(e.rf.kind == RfPattern::Kind::Constant ? e.rf.rf_mhz : e.rf.hop_mhz[0]);
    for (const EmitterSpec& e : test_pool) {
        const double rf = e.rf.kind == RfPattern::Kind::Constant ? e.rf.rf_mhz : e.rf.hop_mhz[0];
        CHECK(train_rfs.find(rf) == train_rfs.end());
    }
}
