#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deint/pulsegen.hpp"

namespace deint::rfimage {

struct EncodeConfig {
    int height = 128;      // RF axis
    int width = 128;       // TOA axis
    double dt_us = 5.0;    // time per pixel column
    double floor_eps = 0.1;  // dimmest encoded intensity, in (0, 1)

    double window_us() const { return width * dt_us; }
    void validate() const;
};

// Two-channel RF-TOA image: channel 0 holds scaled PW, channel 1 scaled AM.
// Background pixels are exactly 0; pulse pixels lie in [floor_eps, 1].
struct EncodedImage {
    int height = 0;
    int width = 0;
    std::vector<double> data;  // 2 * height * width, channel-major

    double at(int channel, int row, int col) const {
        return data[(static_cast<std::size_t>(channel) * height + row) * width + col];
    }
    double& at(int channel, int row, int col) {
        return data[(static_cast<std::size_t>(channel) * height + row) * width + col];
    }
};

struct RegistryEntry {
    int pulse_index = 0;
    int center_row = 0;
    int center_col = 0;
    int emitter_id = 0;
};

// Map from pulses to their image locations, kept from the encoding step so
// the segmentation output can be read back per pulse.
struct PulseRegistry {
    std::vector<RegistryEntry> entries;
    std::vector<std::pair<int, int>> collisions;  // pixels written by more than one pulse
};

// Min-max scaling of the observed values onto RF rows [0, H-1]; a single
// distinct value maps to the middle row.
std::vector<int> scale_to_rows(std::span<const double> values, int height);

// Min-max scaling onto [floor_eps, 1]; a single distinct value maps to 1.
std::vector<double> scale_to_unit(std::span<const double> values, double floor_eps);

std::pair<EncodedImage, PulseRegistry> encode(const pulsegen::Scenario& scenario,
                                              const EncodeConfig& config);

// Majority vote of the per-pixel argmax channel over each pulse's in-bounds
// 3x3 region; ties break to the lowest channel index. Background pixels are
// never consulted.
std::vector<int> decode(std::span<const double> seg_probs, int channels, int height, int width,
                        const PulseRegistry& registry);

// One-hot segmentation of the ground truth: channel emitter_id set to 1 over
// every pulse's 3x3 region (channel 0 elsewhere). Inverse of decode for
// collision-free scenarios.
std::vector<double> ground_truth_probs(const PulseRegistry& registry, int channels, int height,
                                       int width);

// 8-bit grayscale PGM (P5) of one channel, value = round(255 * intensity).
void write_pgm(const std::string& path, const EncodedImage& image, int channel);

}  // namespace deint::rfimage
