#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "deint/common.hpp"
#include "deint/rfimage.hpp"

using namespace deint;
using namespace deint::rfimage;
using deint::pulsegen::Pulse;
using deint::pulsegen::Scenario;

namespace {

Scenario make_scenario(std::vector<Pulse> pulses, double window_us) {
    Scenario s;
    s.window_us = window_us;
    s.pulses = std::move(pulses);
    std::set<int> ids;
    for (const Pulse& p : s.pulses) ids.insert(p.emitter_id);
    s.emitter_count = static_cast<int>(ids.size());
    return s;
}

EncodeConfig small_config() {
    EncodeConfig c;
    c.height = 16;
    c.width = 16;
    c.dt_us = 5.0;
    c.floor_eps = 0.1;
    return c;
}

}  // namespace

TEST_CASE("rf row scaling covers [0, H-1]") {
    const std::vector<double> rf{100.0, 300.0};
    const auto rows = scale_to_rows(rf, 8);
    CHECK(rows == std::vector<int>{0, 7});
    const std::vector<double> mid{100.0, 200.0, 300.0};
    CHECK(scale_to_rows(mid, 9) == std::vector<int>{0, 4, 8});
}

TEST_CASE("unit scaling lands in [floor_eps, 1]") {
    const std::vector<double> pw{1.0, 3.0};
    const auto scaled = scale_to_unit(pw, 0.1);
    CHECK(scaled[0] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(scaled[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("degenerate single-value scaling") {
    const std::vector<double> v{5.0};
    CHECK(scale_to_unit(v, 0.1) == std::vector<double>{1.0});
    CHECK(scale_to_rows(v, 16) == std::vector<int>{8});
}

TEST_CASE("non-finite inputs are rejected") {
    const std::vector<double> bad{1.0, std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(scale_to_rows(bad, 8), NumericError);
    CHECK_THROWS_AS(scale_to_unit(bad, 0.1), NumericError);
}

TEST_CASE("encode: interior pulse paints a full 3x3 block") {
    // toa=12 us at dt=5 -> column 2; the middle RF maps to an interior row
    const Scenario s = make_scenario({{12.0, 1500.0, 3.0, 0.7, 0},
                                      {40.0, 1000.0, 2.0, 0.5, 1},
                                      {60.0, 2000.0, 4.0, 0.9, 2}},
                                     80.0);
    auto [image, registry] = encode(s, small_config());

    REQUIRE(registry.entries.size() == 3);
    CHECK(registry.entries[0].center_col == 2);
    const int row = registry.entries[0].center_row;
    CHECK(row == 8);  // (1500-1000)/1000 * 15 rounded
    CHECK(registry.entries[1].center_row == 0);
    CHECK(registry.entries[2].center_row == 15);

    int block = 0;
    for (int r = row - 1; r <= row + 1; ++r)
        for (int c = 1; c <= 3; ++c) block += (image.at(0, r, c) != 0.0);
    CHECK(block == 9);
    CHECK(registry.collisions.empty());
}

TEST_CASE("encode: border pulse clips to the in-bounds corner") {
    const Scenario s = make_scenario({{0.0, 1000.0, 2.0, 0.5, 0},
                                      {70.0, 2000.0, 4.0, 0.9, 1}},
                                     80.0);
    auto [image, registry] = encode(s, small_config());
    CHECK(registry.entries[0].center_row == 0);
    CHECK(registry.entries[0].center_col == 0);
    int touched = 0;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) touched += (image.at(0, r, c) != 0.0);
    CHECK(touched == 4);  // 2x2 corner only
}

TEST_CASE("encode: close pulses on the same row collide") {
    const Scenario s = make_scenario({{10.0, 1000.0, 2.0, 0.5, 0},
                                      {20.0, 1000.0, 4.0, 0.9, 1},
                                      {70.0, 2000.0, 3.0, 0.7, 2}},
                                     80.0);
    auto [image, registry] = encode(s, small_config());
    CHECK(!registry.collisions.empty());
}

TEST_CASE("encode: toa at the window end clamps to the last column") {
    const Scenario s = make_scenario({{79.9, 1000.0, 2.0, 0.5, 0},
                                      {10.0, 2000.0, 4.0, 0.9, 1}},
                                     80.0);
    auto [image, registry] = encode(s, small_config());
    CHECK(registry.entries[0].center_col == 15);
}

TEST_CASE("encode: window mismatch is a configuration error") {
    const Scenario s = make_scenario({{1.0, 1000.0, 2.0, 0.5, 0}}, 100.0);
    CHECK_THROWS_AS(encode(s, small_config()), ConfigError);  // 16*5 = 80 != 100
}

TEST_CASE("encode: empty scenario is rejected") {
    const Scenario s = make_scenario({}, 80.0);
    CHECK_THROWS_AS(encode(s, small_config()), ConfigError);
}

TEST_CASE("nonzero pixels always lie in [floor_eps, 1]") {
    Rng rng(5);
    std::vector<Pulse> pulses;
    for (int i = 0; i < 40; ++i)
        pulses.push_back({rng.uniform(0.0, 80.0), rng.uniform(500.0, 18000.0),
                          rng.uniform(0.2, 100.0), rng.uniform(0.1, 1.0), i % 4});
    std::sort(pulses.begin(), pulses.end(),
              [](const Pulse& a, const Pulse& b) { return a.toa_us < b.toa_us; });
    const Scenario s = make_scenario(std::move(pulses), 80.0);
    auto [image, registry] = encode(s, small_config());
    for (double v : image.data) {
        if (v != 0.0) {
            CHECK(v >= 0.1);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("encode determinism") {
    Rng rng(6);
    std::vector<Pulse> pulses;
    for (int i = 0; i < 20; ++i)
        pulses.push_back({rng.uniform(0.0, 80.0), rng.uniform(500.0, 18000.0),
                          rng.uniform(0.2, 100.0), rng.uniform(0.1, 1.0), i % 3});
    std::sort(pulses.begin(), pulses.end(),
              [](const Pulse& a, const Pulse& b) { return a.toa_us < b.toa_us; });
    const Scenario s = make_scenario(std::move(pulses), 80.0);
    auto [im1, reg1] = encode(s, small_config());
    auto [im2, reg2] = encode(s, small_config());
    CHECK(im1.data == im2.data);
    CHECK(reg1.collisions == reg2.collisions);
}

TEST_CASE("decode: unanimous, majority and tie-break votes") {
    const int n = 8, h = 16, w = 16;
    std::vector<double> probs(static_cast<std::size_t>(n) * h * w, 0.0);
    auto set_argmax = [&](int row, int col, int channel) {
        probs[static_cast<std::size_t>(channel) * h * w + row * w + col] = 1.0;
    };

    PulseRegistry registry;
    registry.entries.push_back({0, 5, 5, 0});    // unanimous channel 4
    registry.entries.push_back({1, 10, 10, 0});  // 5 votes ch 2, 4 votes ch 7
    registry.entries.push_back({2, 2, 13, 0});   // 4 votes ch1, 4 ch3, 1 ch6

    for (int r = 4; r <= 6; ++r)
        for (int c = 4; c <= 6; ++c) set_argmax(r, c, 4);

    int count = 0;
    for (int r = 9; r <= 11; ++r)
        for (int c = 9; c <= 11; ++c) set_argmax(r, c, count++ < 5 ? 2 : 7);

    count = 0;
    for (int r = 1; r <= 3; ++r)
        for (int c = 12; c <= 14; ++c) {
            set_argmax(r, c, count < 4 ? 1 : (count < 8 ? 3 : 6));
            ++count;
        }

    const auto labels = decode(probs, n, h, w, registry);
    REQUIRE(labels.size() == 3);
    CHECK(labels[0] == 4);
    CHECK(labels[1] == 2);
    CHECK(labels[2] == 1);  // 4-4 tie -> lowest channel index
}

TEST_CASE("decode rejects mismatched shapes") {
    PulseRegistry registry;
    registry.entries.push_back({0, 5, 5, 0});
    std::vector<double> probs(8 * 16 * 16, 0.0);
    CHECK_THROWS_AS(decode(probs, 8, 16, 8, registry), ConfigError);
    registry.entries[0].center_row = 99;
    CHECK_THROWS_AS(decode(probs, 8, 16, 16, registry), ConfigError);
}

TEST_CASE("ground-truth one-hot round trip recovers every collision-free pulse") {
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Pulse> pulses;
        const int emitters = 2 + static_cast<int>(rng.uniform_int(0, 3));
        for (int e = 0; e < emitters; ++e) {
            const double rf = 1000.0 + 3000.0 * e;
            double t = rng.uniform(0.0, 20.0);
            while (t < 80.0) {
                pulses.push_back({t, rf, 1.0 + e, 0.2 + 0.1 * e, e});
                t += rng.uniform(10.0, 30.0);
            }
        }
        if (pulses.empty()) continue;
        std::sort(pulses.begin(), pulses.end(),
                  [](const Pulse& a, const Pulse& b) { return a.toa_us < b.toa_us; });
        const Scenario s = make_scenario(std::move(pulses), 80.0);
        auto [image, registry] = encode(s, small_config());

        const auto probs = ground_truth_probs(registry, 8, 16, 16);
        const auto labels = decode(probs, 8, 16, 16, registry);

        std::set<std::pair<int, int>> collision_px(registry.collisions.begin(),
                                                   registry.collisions.end());
        for (const RegistryEntry& e : registry.entries) {
            bool touched = false;
            for (int r = std::max(0, e.center_row - 1);
                 r <= std::min(15, e.center_row + 1) && !touched; ++r)
                for (int c = std::max(0, e.center_col - 1);
                     c <= std::min(15, e.center_col + 1) && !touched; ++c)
                    touched = collision_px.count({r, c}) > 0;
            if (!touched) CHECK(labels[e.pulse_index] == e.emitter_id);
        }
    }
}

TEST_CASE("pgm preview files carry the P5 header and payload") {
    const Scenario s = make_scenario({{12.0, 1000.0, 2.0, 0.5, 0},
                                      {40.0, 2000.0, 4.0, 0.9, 1}},
                                     80.0);
    auto [image, registry] = encode(s, small_config());
    const auto path = std::filesystem::temp_directory_path() / "deint_preview.pgm";
    write_pgm(path.string(), image, 0);
    std::ifstream in(path, std::ios::binary);
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    CHECK(magic == "P5");
    CHECK(w == 16);
    CHECK(h == 16);
    CHECK(maxval == 255);
    in.ignore(1);
    std::vector<char> payload(static_cast<std::size_t>(w) * h);
    in.read(payload.data(), payload.size());
    CHECK(in.gcount() == static_cast<std::streamsize>(payload.size()));
    std::filesystem::remove(path);
}
