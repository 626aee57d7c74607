#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "deint/gradkit.hpp"
#include "deint/rfimage.hpp"

namespace deint::scmloss {

// Differentiable G x N matrix: row i accumulates the mean softmax vectors of
// all pulses whose ground-truth label is i. Total mass equals the pulse count.
struct SoftConfusionMatrix {
    gradkit::Tensor values;  // shape (G, N), on the tape
    int truth_clusters = 0;  // G
    int channels = 0;        // N
};

// Averages each pulse's in-bounds 3x3 softmax vectors and accumulates the
// result into the row of its label. labels defaults to the registry's
// emitter ids; pass an override to train with swapped targets.
SoftConfusionMatrix build_scm(const gradkit::Tensor& probs,
                              const rfimage::PulseRegistry& registry, int truth_clusters,
                              std::span<const int> labels = {});

// Mass outside the column maxima over the total mass: 1 - sum(M(S))/sum(S).
// The maxima selection acts as a constant mask in backward; gradient flows
// through the selected cells and the denominator.
gradkit::Tensor sci_loss(const SoftConfusionMatrix& scm);

// Per row, every column maximum beyond the row's largest is a fragment cell
// f; the loss sums f / stop_gradient(f) and divides by N. Its value counts
// fragments; its gradient 1/(N*f) shrinks fragment mass. Zero-valued cells
// are excluded before the division.
gradkit::Tensor scf_loss(const SoftConfusionMatrix& scm);

struct CombinedLoss {
    gradkit::Tensor total;
    gradkit::Tensor sci;
    gradkit::Tensor scf;
};

CombinedLoss combined_loss(const SoftConfusionMatrix& scm, double w_purity, double w_frag);

// Applies a uniformly random permutation of the label alphabet [0, max+1).
std::vector<int> permute_targets(std::span<const int> labels, std::uint64_t seed);

}  // namespace deint::scmloss
