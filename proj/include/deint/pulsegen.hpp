#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace deint::pulsegen {

// One radar pulse as seen by the receiver: time of arrival, carrier
// frequency, pulse width, amplitude, plus the ground-truth source label.
struct Pulse {
    double toa_us = 0.0;
    double rf_mhz = 0.0;
    double pw_us = 0.0;
    double am = 0.0;
    int emitter_id = 0;

    bool operator==(const Pulse&) const = default;
};

struct PriPattern {
    enum class Kind { Constant, Jittered, Staggered };
    Kind kind = Kind::Constant;
    double pri_us = 100.0;            // Constant and Jittered
    double jitter_fraction = 0.0;     // Jittered, in [0, 0.5]
    std::vector<double> stagger_us;   // Staggered, cycled in order

    static PriPattern constant(double pri_us);
    static PriPattern jittered(double pri_us, double jitter_fraction);
    static PriPattern staggered(std::vector<double> pris_us);
    void validate() const;
    double first_pri() const;
};

struct RfPattern {
    enum class Kind { Constant, Hopping };
    Kind kind = Kind::Constant;
    double rf_mhz = 1000.0;           // Constant
    std::vector<double> hop_mhz;      // Hopping, cycled
    int hop_period = 1;               // pulses spent on each hop value

    static RfPattern constant(double rf_mhz);
    static RfPattern hopping(std::vector<double> freqs_mhz, int period);
    void validate() const;
};

struct EmitterSpec {
    PriPattern pri;
    RfPattern rf;
    double pw_us = 1.0;
    double am_base = 0.5;
    double am_jitter_fraction = 0.0;  // in [0, 1)

    void validate() const;
};

// A time window of interleaved pulses from several emitters, sorted by TOA.
struct Scenario {
    double window_us = 0.0;
    std::vector<Pulse> pulses;
    int emitter_count = 0;
};

struct DatasetSpec {
    int train_scenarios = 200;
    int test_scenarios = 50;
    std::vector<EmitterSpec> pool_train;
    std::vector<EmitterSpec> pool_test;
    int concurrency_min = 1;
    int concurrency_max = 5;
    double window_us = 640.0;
    std::uint64_t master_seed = 0;
};

struct Dataset {
    std::vector<Scenario> train;
    std::vector<Scenario> test;
};

// Generates one emitter's pulse train over [0, window_us). The TOA sequence
// starts at a random phase offset in [0, first PRI) unless phase_us is given.
std::vector<Pulse> synth_emitter(const EmitterSpec& spec, double window_us, int emitter_id,
                                 std::uint64_t seed, std::optional<double> phase_us = {});

// Union of all emitters' pulses merged by TOA. Emitter ids follow spec
// positions, then are densified so that every id is < emitter_count even if
// some emitter landed no pulse in the window.
Scenario compose_scenario(std::span<const EmitterSpec> specs, double window_us,
                          std::uint64_t seed);

Dataset generate_dataset(const DatasetSpec& spec);

// Stratified emitter pools: RF slots interleave between train and test so the
// two pools are disjoint and each pool's frequencies stay well separated.
// PRI mixes fast, medium and slow emitters; PW/AM are spread over their full
// ranges. Patterns cycle through constant / jittered / staggered PRI and an
// occasional RF hopper.
std::pair<std::vector<EmitterSpec>, std::vector<EmitterSpec>> default_pools(
    int train_count, int test_count, std::uint64_t seed);

void write_scenarios(const std::string& path, std::span<const Scenario> scenarios);
std::vector<Scenario> read_scenarios(const std::string& path);

}  // namespace deint::pulsegen
