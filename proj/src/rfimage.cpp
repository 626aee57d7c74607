#include "deint/rfimage.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "deint/common.hpp"

namespace deint::rfimage {

void EncodeConfig::validate() const {
    if (height < 8 || width < 8) throw ConfigError("encode: image must be at least 8x8");
    if (dt_us <= 0.0) throw ConfigError("encode: dt_us must be > 0");
    if (floor_eps <= 0.0 || floor_eps >= 1.0)
        throw ConfigError("encode: floor_eps must lie in (0, 1)");
}

namespace {

void check_finite(std::span<const double> values, const char* what) {
    for (double v : values)
        if (!std::isfinite(v)) throw NumericError(std::string("scale_params: non-finite ") + what);
}

}  // namespace

std::vector<int> scale_to_rows(std::span<const double> values, int height) {
    if (values.empty()) throw ConfigError("scale_params: empty value list");
    check_finite(values, "rf value");
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    std::vector<int> rows(values.size());
    if (*mn == *mx) {
        std::fill(rows.begin(), rows.end(), height / 2);
        return rows;
    }
    const double span = *mx - *mn;
    for (std::size_t i = 0; i < values.size(); ++i)
        rows[i] = static_cast<int>(std::lround((values[i] - *mn) / span * (height - 1)));
    return rows;
}

std::vector<double> scale_to_unit(std::span<const double> values, double floor_eps) {
    if (values.empty()) throw ConfigError("scale_params: empty value list");
    check_finite(values, "value");
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    std::vector<double> out(values.size());
    if (*mn == *mx) {
        std::fill(out.begin(), out.end(), 1.0);
        return out;
    }
    const double span = *mx - *mn;
    for (std::size_t i = 0; i < values.size(); ++i)
        out[i] = floor_eps + (1.0 - floor_eps) * (values[i] - *mn) / span;
    return out;
}

std::pair<EncodedImage, PulseRegistry> encode(const pulsegen::Scenario& scenario,
                                              const EncodeConfig& config) {
    config.validate();
    if (scenario.pulses.empty()) throw ConfigError("encode: scenario has no pulses");
    if (std::abs(scenario.window_us - config.window_us()) > 1e-6 * config.window_us())
        throw ConfigError("encode: scenario window " + std::to_string(scenario.window_us) +
                          " us does not match W*dt = " + std::to_string(config.window_us()) +
                          " us");

    const int h = config.height, w = config.width;
    const std::size_t n = scenario.pulses.size();

    std::vector<double> rf(n), pw(n), am(n);
    for (std::size_t i = 0; i < n; ++i) {
        rf[i] = scenario.pulses[i].rf_mhz;
        pw[i] = scenario.pulses[i].pw_us;
        am[i] = scenario.pulses[i].am;
    }
    const std::vector<int> rows = scale_to_rows(rf, h);
    const std::vector<double> pw_scaled = scale_to_unit(pw, config.floor_eps);
    const std::vector<double> am_scaled = scale_to_unit(am, config.floor_eps);

    EncodedImage image;
    image.height = h;
    image.width = w;
    image.data.assign(static_cast<std::size_t>(2) * h * w, 0.0);

    PulseRegistry registry;
    registry.entries.reserve(n);
    std::vector<int> owner(static_cast<std::size_t>(h) * w, -1);
    std::set<std::pair<int, int>> collisions;

    // pulses are in TOA order; later writers overwrite earlier ones
    for (std::size_t i = 0; i < n; ++i) {
        const pulsegen::Pulse& p = scenario.pulses[i];
        const int col = std::min(static_cast<int>(p.toa_us / config.dt_us), w - 1);
        const int row = rows[i];

        for (int r = std::max(0, row - 1); r <= std::min(h - 1, row + 1); ++r) {
            for (int c = std::max(0, col - 1); c <= std::min(w - 1, col + 1); ++c) {
                int& own = owner[static_cast<std::size_t>(r) * w + c];
                if (own >= 0 && own != static_cast<int>(i)) collisions.insert({r, c});
                own = static_cast<int>(i);
                image.at(0, r, c) = pw_scaled[i];
                image.at(1, r, c) = am_scaled[i];
            }
        }
        registry.entries.push_back(
            {static_cast<int>(i), row, col, p.emitter_id});
    }
    registry.collisions.assign(collisions.begin(), collisions.end());
    return {std::move(image), std::move(registry)};
}

std::vector<int> decode(std::span<const double> seg_probs, int channels, int height, int width,
                        const PulseRegistry& registry) {
    if (static_cast<std::int64_t>(seg_probs.size()) !=
        static_cast<std::int64_t>(channels) * height * width)
        throw ConfigError("decode: probability tensor size does not match " +
                          std::to_string(channels) + "x" + std::to_string(height) + "x" +
                          std::to_string(width));
    const std::int64_t px = static_cast<std::int64_t>(height) * width;

    std::vector<int> labels;
    labels.reserve(registry.entries.size());
    std::vector<int> votes(channels);
    for (const RegistryEntry& e : registry.entries) {
        if (e.center_row < 0 || e.center_row >= height || e.center_col < 0 ||
            e.center_col >= width)
            throw ConfigError("decode: registry entry outside the image");
        std::fill(votes.begin(), votes.end(), 0);
        for (int r = std::max(0, e.center_row - 1); r <= std::min(height - 1, e.center_row + 1);
             ++r) {
            for (int c = std::max(0, e.center_col - 1);
                 c <= std::min(width - 1, e.center_col + 1); ++c) {
                const std::int64_t base = static_cast<std::int64_t>(r) * width + c;
                int best = 0;
                for (int ch = 1; ch < channels; ++ch)
                    if (seg_probs[ch * px + base] > seg_probs[best * px + base]) best = ch;
                ++votes[best];
            }
        }
        int winner = 0;
        for (int ch = 1; ch < channels; ++ch)
            if (votes[ch] > votes[winner]) winner = ch;
        labels.push_back(winner);
    }
    return labels;
}

std::vector<double> ground_truth_probs(const PulseRegistry& registry, int channels, int height,
                                       int width) {
    const std::int64_t px = static_cast<std::int64_t>(height) * width;
    std::vector<double> probs(static_cast<std::size_t>(channels) * px, 0.0);
    std::fill(probs.begin(), probs.begin() + px, 1.0);  // background -> channel 0
    for (const RegistryEntry& e : registry.entries) {
        if (e.emitter_id < 0 || e.emitter_id >= channels)
            throw ConfigError("ground_truth_probs: emitter id " + std::to_string(e.emitter_id) +
                              " exceeds channel count " + std::to_string(channels));
        for (int r = std::max(0, e.center_row - 1); r <= std::min(height - 1, e.center_row + 1);
             ++r) {
            for (int c = std::max(0, e.center_col - 1);
                 c <= std::min(width - 1, e.center_col + 1); ++c) {
                const std::int64_t base = static_cast<std::int64_t>(r) * width + c;
                for (int ch = 0; ch < channels; ++ch)
                    probs[ch * px + base] = (ch == e.emitter_id) ? 1.0 : 0.0;
            }
        }
    }
    return probs;
}

void write_pgm(const std::string& path, const EncodedImage& image, int channel) {
    if (channel < 0 || channel > 1) throw ConfigError("write_pgm: channel must be 0 or 1");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("write_pgm: cannot open " + path);
    out << "P5\n" << image.width << " " << image.height << "\n255\n";
    for (int r = 0; r < image.height; ++r) {
        for (int c = 0; c < image.width; ++c) {
            const double v = std::clamp(image.at(channel, r, c), 0.0, 1.0);
            out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v))));
        }
    }
    if (!out) throw DataError("write_pgm: write failed for " + path);
}

}  // namespace deint::rfimage
