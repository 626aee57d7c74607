#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deint/gradkit.hpp"

namespace deint::segnet {

struct UNetConfig {
    int in_channels = 2;
    int base_channels = 8;
    int depth = 3;          // pooling stages; channels double per stage
    int out_channels = 8;
    std::uint64_t seed = 0;

    void validate() const;
    int bottleneck_channels() const { return base_channels << depth; }
    bool operator==(const UNetConfig&) const = default;
};

// Encoder-decoder with skip connections. Each encoder stage applies two
// 3x3 conv+relu blocks and a 2x2 maxpool; the decoder mirrors it with
// nearest-neighbor upsampling, a channel-halving conv, skip concatenation and
// two conv+relu blocks. A final conv maps to out_channels logits.
struct Model {
    UNetConfig config;
    std::vector<gradkit::Param> params;

    gradkit::Param& find(const std::string& name);
    const gradkit::Param& find(const std::string& name) const;
    std::int64_t parameter_count() const;
};

Model init_model(const UNetConfig& config);

struct ForwardResult {
    gradkit::Tensor logits;                      // (out_channels, H, W)
    std::vector<gradkit::Tensor> param_tensors;  // same order as model.params
};

// H and W must be divisible by 2^depth. When with_grad is set, parameter
// leaves require gradients; pull them from param_tensors after backward.
ForwardResult forward(gradkit::Tape& tape, const Model& model, const gradkit::Tensor& image,
                      bool with_grad = true);

void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace deint::segnet
