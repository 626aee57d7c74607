#include "deint/pulsegen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "deint/common.hpp"

namespace deint::pulsegen {

namespace {

bool operator_eq(const PriPattern& a, const PriPattern& b) {
    return a.kind == b.kind && a.pri_us == b.pri_us && a.jitter_fraction == b.jitter_fraction &&
           a.stagger_us == b.stagger_us;
}

bool operator_eq(const RfPattern& a, const RfPattern& b) {
    return a.kind == b.kind && a.rf_mhz == b.rf_mhz && a.hop_mhz == b.hop_mhz &&
           a.hop_period == b.hop_period;
}

bool spec_eq(const EmitterSpec& a, const EmitterSpec& b) {
    return operator_eq(a.pri, b.pri) && operator_eq(a.rf, b.rf) && a.pw_us == b.pw_us &&
           a.am_base == b.am_base && a.am_jitter_fraction == b.am_jitter_fraction;
}

}  // namespace

PriPattern PriPattern::constant(double pri_us) {
    PriPattern p;
    p.kind = Kind::Constant;
    p.pri_us = pri_us;
    return p;
}

PriPattern PriPattern::jittered(double pri_us, double jitter_fraction) {
    PriPattern p;
    p.kind = Kind::Jittered;
    p.pri_us = pri_us;
    p.jitter_fraction = jitter_fraction;
    return p;
}

PriPattern PriPattern::staggered(std::vector<double> pris_us) {
    PriPattern p;
    p.kind = Kind::Staggered;
    p.stagger_us = std::move(pris_us);
    return p;
}

void PriPattern::validate() const {
    switch (kind) {
        case Kind::Constant:
            if (pri_us <= 0.0) throw ConfigError("pri_pattern: constant PRI must be > 0");
            break;
        case Kind::Jittered:
            if (pri_us <= 0.0) throw ConfigError("pri_pattern: jittered PRI must be > 0");
            if (jitter_fraction < 0.0 || jitter_fraction > 0.5)
                throw ConfigError("pri_pattern: jitter_fraction must lie in [0, 0.5]");
            break;
        case Kind::Staggered:
            if (stagger_us.empty()) throw ConfigError("pri_pattern: empty stagger list");
            for (double v : stagger_us)
                if (v <= 0.0) throw ConfigError("pri_pattern: stagger PRIs must be > 0");
            break;
    }
}

double PriPattern::first_pri() const {
    return kind == Kind::Staggered ? stagger_us.front() : pri_us;
}

RfPattern RfPattern::constant(double rf_mhz) {
    RfPattern r;
    r.kind = Kind::Constant;
    r.rf_mhz = rf_mhz;
    return r;
}

RfPattern RfPattern::hopping(std::vector<double> freqs_mhz, int period) {
    RfPattern r;
    r.kind = Kind::Hopping;
    r.hop_mhz = std::move(freqs_mhz);
    r.hop_period = period;
    return r;
}

void RfPattern::validate() const {
    switch (kind) {
        case Kind::Constant:
            if (rf_mhz <= 0.0) throw ConfigError("rf_pattern: RF must be > 0");
            break;
        case Kind::Hopping:
            if (hop_mhz.empty()) throw ConfigError("rf_pattern: empty hopping list");
            for (double v : hop_mhz)
                if (v <= 0.0) throw ConfigError("rf_pattern: hop RFs must be > 0");
            if (hop_period < 1) throw ConfigError("rf_pattern: hop period must be >= 1");
            break;
    }
}

void EmitterSpec::validate() const {
    pri.validate();
    rf.validate();
    if (pw_us <= 0.0) throw ConfigError("emitter: PW must be > 0");
    if (am_base <= 0.0) throw ConfigError("emitter: AM base must be > 0");
    if (am_jitter_fraction < 0.0 || am_jitter_fraction >= 1.0)
        throw ConfigError("emitter: AM jitter fraction must lie in [0, 1)");
}

std::vector<Pulse> synth_emitter(const EmitterSpec& spec, double window_us, int emitter_id,
                                 std::uint64_t seed, std::optional<double> phase_us) {
    spec.validate();
    if (window_us <= 0.0) throw ConfigError("synth_emitter: window must be > 0");

    Rng rng(seed);
    double t = phase_us.value_or(rng.uniform(0.0, spec.pri.first_pri()));

    std::vector<Pulse> pulses;
    std::size_t stagger_idx = 0;
    std::size_t pulse_idx = 0;
    while (t < window_us) {
        Pulse p;
        p.toa_us = t;
        switch (spec.rf.kind) {
            case RfPattern::Kind::Constant:
                p.rf_mhz = spec.rf.rf_mhz;
                break;
            case RfPattern::Kind::Hopping:
                p.rf_mhz = spec.rf.hop_mhz[(pulse_idx / spec.rf.hop_period) %
                                           spec.rf.hop_mhz.size()];
                break;
        }
        p.pw_us = spec.pw_us;
        const double jit = spec.am_jitter_fraction;
        p.am = spec.am_base * (jit > 0.0 ? rng.uniform(1.0 - jit, 1.0 + jit) : 1.0);
        p.emitter_id = emitter_id;
        pulses.push_back(p);
        ++pulse_idx;

        switch (spec.pri.kind) {
            case PriPattern::Kind::Constant:
                t += spec.pri.pri_us;
                break;
            case PriPattern::Kind::Jittered:
                t += rng.uniform(spec.pri.pri_us * (1.0 - spec.pri.jitter_fraction),
                                 spec.pri.pri_us * (1.0 + spec.pri.jitter_fraction));
                break;
            case PriPattern::Kind::Staggered:
                t += spec.pri.stagger_us[stagger_idx];
                stagger_idx = (stagger_idx + 1) % spec.pri.stagger_us.size();
                break;
        }
    }
    return pulses;
}

Scenario compose_scenario(std::span<const EmitterSpec> specs, double window_us,
                          std::uint64_t seed) {
    if (specs.empty() || specs.size() > 11)
        throw ConfigError("compose_scenario: emitter count must lie in [1, 11]");

    Scenario scenario;
    scenario.window_us = window_us;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        auto pulses = synth_emitter(specs[i], window_us, static_cast<int>(i),
                                    mix_seed(seed, i));
        scenario.pulses.insert(scenario.pulses.end(), pulses.begin(), pulses.end());
    }
    std::stable_sort(scenario.pulses.begin(), scenario.pulses.end(),
                     [](const Pulse& a, const Pulse& b) { return a.toa_us < b.toa_us; });

    // Densify labels: an emitter whose train missed the window entirely must
    // not leave a hole in the id range.
    std::set<int> present;
    for (const Pulse& p : scenario.pulses) present.insert(p.emitter_id);
    std::vector<int> remap(specs.size(), -1);
    int next = 0;
    for (int id : present) remap[id] = next++;
    for (Pulse& p : scenario.pulses) p.emitter_id = remap[p.emitter_id];
    scenario.emitter_count = next;
    return scenario;
}

namespace {

Scenario compose_nonempty(std::span<const EmitterSpec> specs, double window_us,
                          std::uint64_t master, std::uint64_t split_tag, int index) {
    for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
        Scenario s = compose_scenario(
            specs, window_us,
            mix_seed(master, split_tag, static_cast<std::uint64_t>(index) * 64 + attempt));
        if (!s.pulses.empty()) return s;
    }
    throw ConfigError("generate_dataset: could not place any pulse in the window; "
                      "PRIs are too long for window " +
                      std::to_string(window_us) + " us");
}

std::vector<Scenario> generate_split(const DatasetSpec& spec,
                                     const std::vector<EmitterSpec>& pool, int count,
                                     std::uint64_t split_tag) {
    if (static_cast<int>(pool.size()) < spec.concurrency_max)
        throw ConfigError("generate_dataset: pool of " + std::to_string(pool.size()) +
                          " emitters is smaller than max concurrency " +
                          std::to_string(spec.concurrency_max));

    std::vector<Scenario> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        // every scenario derives its own sub-seed, so splits could be
        // produced in parallel without changing the output
        Rng rng(mix_seed(spec.master_seed, split_tag, 0x5e1000 + i));
        std::vector<EmitterSpec> chosen;
        if (spec.concurrency_min == 1 && i < static_cast<int>(pool.size())) {
            // every emitter appears alone at least once
            chosen.push_back(pool[i]);
        } else {
            const int k = static_cast<int>(
                rng.uniform_int(spec.concurrency_min, spec.concurrency_max));
            std::vector<int> idx(pool.size());
            std::iota(idx.begin(), idx.end(), 0);
            for (int j = 0; j < k; ++j) {
                const auto pick = static_cast<std::size_t>(
                    rng.uniform_int(j, static_cast<std::int64_t>(idx.size()) - 1));
                std::swap(idx[j], idx[pick]);
                chosen.push_back(pool[idx[j]]);
            }
        }
        out.push_back(compose_nonempty(chosen, spec.window_us, spec.master_seed, split_tag, i));
    }
    return out;
}

}  // namespace

Dataset generate_dataset(const DatasetSpec& spec) {
    if (spec.concurrency_min < 1 || spec.concurrency_max < spec.concurrency_min ||
        spec.concurrency_max > 11)
        throw ConfigError("generate_dataset: concurrency range must satisfy 1 <= min <= max <= 11");
    if (spec.train_scenarios < 0 || spec.test_scenarios < 0)
        throw ConfigError("generate_dataset: scenario counts must be >= 0");
    for (const EmitterSpec& a : spec.pool_train)
        for (const EmitterSpec& b : spec.pool_test)
            if (spec_eq(a, b))
                throw ConfigError("generate_dataset: train and test pools must be disjoint");

    Dataset ds;
    ds.train = generate_split(spec, spec.pool_train, spec.train_scenarios, 1);
    ds.test = generate_split(spec, spec.pool_test, spec.test_scenarios, 2);
    return ds;
}

std::pair<std::vector<EmitterSpec>, std::vector<EmitterSpec>> default_pools(
    int train_count, int test_count, std::uint64_t seed) {
    if (train_count < 1 || test_count < 1)
        throw ConfigError("default_pools: pool sizes must be >= 1");

    const int total = train_count + test_count;
    const double rf_lo = 500.0, rf_hi = 18000.0;
    const double pw_lo = 0.2, pw_hi = 100.0;
    const double am_lo = 0.1, am_hi = 1.0;

    Rng rng(mix_seed(seed, 0x9001ULL));

    // Stratified PW and AM slots, shuffled so they do not correlate with RF.
    std::vector<int> pw_slot(total), am_slot(total);
    std::iota(pw_slot.begin(), pw_slot.end(), 0);
    std::iota(am_slot.begin(), am_slot.end(), 0);
    rng.shuffle(pw_slot);
    rng.shuffle(am_slot);

    std::vector<EmitterSpec> train, test;
    train.reserve(train_count);
    test.reserve(test_count);

    for (int i = 0; i < total; ++i) {
        EmitterSpec e;

        const double rf_span = rf_hi - rf_lo;
        const double rf_center =
            rf_lo + (i + 0.3 + 0.4 * rng.uniform()) * rf_span / total;

        // PRI mixture mirroring the heavy-tailed pulse rates of fielded
        // radars: a strong high-PRF contingent with a long slow tail.
        const double u = rng.uniform();
        double pri;
        if (u < 0.35) {
            pri = 20.0 * std::pow(26.0 / 20.0, rng.uniform());
        } else if (u < 0.60) {
            pri = 26.0 * std::pow(80.0 / 26.0, rng.uniform());
        } else if (u < 0.85) {
            pri = 80.0 * std::pow(400.0 / 80.0, rng.uniform());
        } else {
            pri = 400.0 * std::pow(2000.0 / 400.0, rng.uniform());
        }

        switch (i % 5) {
            case 2:
                // jitter capped so the shortest gap stays >= 3 encode columns
                e.pri = PriPattern::jittered(pri, 0.05 + 0.20 * rng.uniform());
                break;
            case 4: {
                std::vector<double> stag;
                const int n = 2 + static_cast<int>(rng.uniform_int(0, 1));
                for (int k = 0; k < n; ++k)
                    stag.push_back(std::clamp(pri * rng.uniform(0.8, 1.2), 20.0, 2000.0));
                e.pri = PriPattern::staggered(std::move(stag));
                break;
            }
            default:
                e.pri = PriPattern::constant(pri);
                break;
        }

        if (i % 7 == 6) {
            std::vector<double> hops;
            const int n = 2 + static_cast<int>(rng.uniform_int(0, 1));
            for (int k = 0; k < n; ++k)
                hops.push_back(std::clamp(rf_center + rng.uniform(-250.0, 250.0), rf_lo, rf_hi));
            e.rf = RfPattern::hopping(std::move(hops),
                                      1 + static_cast<int>(rng.uniform_int(0, 3)));
        } else {
            e.rf = RfPattern::constant(rf_center);
        }

        const double pw_u = (pw_slot[i] + rng.uniform()) / total;
        e.pw_us = pw_lo * std::pow(pw_hi / pw_lo, pw_u);
        const double am_u = (am_slot[i] + rng.uniform()) / total;
        e.am_base = am_lo + (am_hi - am_lo) * am_u;
        e.am_jitter_fraction = 0.15 * rng.uniform();

        // Interleave RF slots between the pools so both stay spread out.
        const bool to_train = (i % 2 == 0) ? train.size() < static_cast<std::size_t>(train_count)
                                           : test.size() >= static_cast<std::size_t>(test_count);
        if (to_train) {
            train.push_back(e);
        } else {
            test.push_back(e);
        }
    }
    return {std::move(train), std::move(test)};
}

void write_scenarios(const std::string& path, std::span<const Scenario> scenarios) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("write_scenarios: cannot open " + path);
    for (const Scenario& s : scenarios) {
        nlohmann::json j;
        j["window_us"] = s.window_us;
        auto& pulses = j["pulses"] = nlohmann::json::array();
        for (const Pulse& p : s.pulses)
            pulses.push_back({p.toa_us, p.rf_mhz, p.pw_us, p.am, p.emitter_id});
        out << j.dump() << '\n';
    }
    if (!out) throw DataError("write_scenarios: write failed for " + path);
}

std::vector<Scenario> read_scenarios(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("read_scenarios: cannot open " + path);
    std::vector<Scenario> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("read_scenarios: " + path + ":" + std::to_string(line_no) + ": " +
                            e.what());
        }
        Scenario s;
        try {
            s.window_us = j.at("window_us").get<double>();
            for (const auto& arr : j.at("pulses")) {
                if (!arr.is_array() || arr.size() != 5)
                    throw DataError("pulse record must have 5 fields");
                Pulse p;
                p.toa_us = arr[0].get<double>();
                p.rf_mhz = arr[1].get<double>();
                p.pw_us = arr[2].get<double>();
                p.am = arr[3].get<double>();
                p.emitter_id = arr[4].get<int>();
                s.pulses.push_back(p);
            }
        } catch (const nlohmann::json::exception& e) {
            throw DataError("read_scenarios: " + path + ":" + std::to_string(line_no) + ": " +
                            e.what());
        }
        std::set<int> ids;
        for (const Pulse& p : s.pulses) ids.insert(p.emitter_id);
        s.emitter_count = static_cast<int>(ids.size());
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace deint::pulsegen
