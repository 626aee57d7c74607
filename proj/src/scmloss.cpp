#include "deint/scmloss.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "deint/common.hpp"

namespace deint::scmloss {

using gradkit::PixelCoord;
using gradkit::Tensor;

SoftConfusionMatrix build_scm(const Tensor& probs, const rfimage::PulseRegistry& registry,
                              int truth_clusters, std::span<const int> labels) {
    if (registry.entries.empty()) throw std::invalid_argument("build_scm: empty pulse registry");
    if (probs.shape().size() != 3)
        throw std::invalid_argument("build_scm: probs must be (N,H,W), got " +
                                    gradkit::shape_str(probs.shape()));
    if (!labels.empty() && labels.size() != registry.entries.size())
        throw std::invalid_argument("build_scm: label override length mismatch");

    const int n = probs.shape()[0];
    const int h = probs.shape()[1];
    const int w = probs.shape()[2];
    gradkit::Tape& tape = *probs.tape();

    // one (1, N) mean vector per pulse, summed into its row
    std::vector<Tensor> rows(static_cast<std::size_t>(truth_clusters));
    for (std::size_t i = 0; i < registry.entries.size(); ++i) {
        const rfimage::RegistryEntry& e = registry.entries[i];
        const int label = labels.empty() ? e.emitter_id : labels[i];
        if (label < 0 || label >= truth_clusters)
            throw std::invalid_argument("build_scm: label " + std::to_string(label) +
                                        " outside [0, " + std::to_string(truth_clusters) + ")");

        std::vector<PixelCoord> coords;
        coords.reserve(9);
        for (int r = std::max(0, e.center_row - 1); r <= std::min(h - 1, e.center_row + 1); ++r)
            for (int c = std::max(0, e.center_col - 1); c <= std::min(w - 1, e.center_col + 1);
                 ++c)
                coords.push_back({r, c});

        const Tensor gathered = gradkit::gather_pixels(probs, coords);        // (k, N)
        const Tensor summed = gradkit::sum_axis(gathered, 0, /*keepdim=*/true);  // (1, N)
        const Tensor mean = gradkit::scalar_mul(summed, 1.0 / static_cast<double>(coords.size()));
        rows[label] = rows[label].defined() ? gradkit::add(rows[label], mean) : mean;
    }
    for (int g = 0; g < truth_clusters; ++g)
        if (!rows[g].defined()) rows[g] = tape.zeros({1, n});

    SoftConfusionMatrix scm;
    scm.values = gradkit::concat_channels(rows);
    scm.truth_clusters = truth_clusters;
    scm.channels = n;
    return scm;
}

Tensor sci_loss(const SoftConfusionMatrix& scm) {
    const Tensor& s = scm.values;
    const Tensor total = gradkit::sum_all(s);
    if (total.scalar() <= 0.0) throw std::invalid_argument("sci_loss: empty soft confusion matrix");
    // max_axis routes gradient to the selected (lowest-row tie) cells only,
    // exactly the constant selection mask the loss requires.
    const Tensor col_maxima = gradkit::max_axis(s, 0);
    const Tensor in_maxima = gradkit::sum_all(col_maxima);
    return gradkit::div(gradkit::sub(total, in_maxima), total);
}

namespace {

// Column argmax per column, lowest row on ties; mirrors max_axis selection.
std::vector<int> column_argmax(const std::vector<double>& v, int rows, int cols) {
    std::vector<int> arg(cols, 0);
    for (int j = 0; j < cols; ++j) {
        for (int i = 1; i < rows; ++i)
            if (v[static_cast<std::size_t>(i) * cols + j] >
                v[static_cast<std::size_t>(arg[j]) * cols + j])
                arg[j] = i;
    }
    return arg;
}

}  // namespace

Tensor scf_loss(const SoftConfusionMatrix& scm) {
    const Tensor& s = scm.values;
    const int g = scm.truth_clusters, n = scm.channels;
    const std::vector<double>& v = s.values();
    gradkit::Tape& tape = *s.tape();

    // R_i: the column maxima falling in row i, grouped
    const std::vector<int> colmax_row = column_argmax(v, g, n);
    std::vector<std::vector<int>> row_maxima(static_cast<std::size_t>(g));
    for (int j = 0; j < n; ++j) row_maxima[colmax_row[j]].push_back(j);

    // F: every R_i cell except the row's largest (ties keep the lowest
    // column). Cells at or below the guard carry no fragment mass and are
    // dropped; the guard also caps the 1/(N*f) gradient before it overflows.
    constexpr double kZeroCellGuard = 1e-12;
    std::vector<double> frag_mask(static_cast<std::size_t>(g) * n, 0.0);
    bool any = false;
    for (int i = 0; i < g; ++i) {
        const auto& cols = row_maxima[i];
        if (cols.size() < 2) continue;
        int keep = cols[0];
        for (int j : cols)
            if (v[static_cast<std::size_t>(i) * n + j] > v[static_cast<std::size_t>(i) * n + keep])
                keep = j;
        for (int j : cols) {
            if (j == keep) continue;
            if (v[static_cast<std::size_t>(i) * n + j] <= kZeroCellGuard) continue;
            frag_mask[static_cast<std::size_t>(i) * n + j] = 1.0;
            any = true;
        }
    }
    if (!any) return tape.scalar(0.0);

    std::vector<double> keep_mask(frag_mask.size());
    for (std::size_t i = 0; i < frag_mask.size(); ++i) keep_mask[i] = 1.0 - frag_mask[i];
    const Tensor mask = tape.tensor({g, n}, std::move(frag_mask));
    const Tensor inv_mask = tape.tensor({g, n}, std::move(keep_mask));

    // f / stop_gradient(f) per fragment cell; non-fragment cells divide by 1
    const Tensor numer = gradkit::mul(s, mask);
    const Tensor denom = gradkit::add(gradkit::mul(gradkit::stop_gradient(s), mask), inv_mask);
    const Tensor fragments = gradkit::sum_all(gradkit::div(numer, denom));
    return gradkit::scalar_mul(fragments, 1.0 / static_cast<double>(n));
}

CombinedLoss combined_loss(const SoftConfusionMatrix& scm, double w_purity, double w_frag) {
    if (w_purity < 0.0 || w_frag < 0.0)
        throw std::invalid_argument("combined_loss: weights must be >= 0");
    CombinedLoss out;
    out.sci = sci_loss(scm);
    out.scf = scf_loss(scm);
    out.total = gradkit::add(gradkit::scalar_mul(out.sci, w_purity),
                             gradkit::scalar_mul(out.scf, w_frag));
    return out;
}

std::vector<int> permute_targets(std::span<const int> labels, std::uint64_t seed) {
    if (labels.empty()) return {};
    const int g = *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<int> perm(static_cast<std::size_t>(g));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    rng.shuffle(perm);
    std::vector<int> out;
    out.reserve(labels.size());
    for (int l : labels) {
        if (l < 0 || l >= g) throw std::invalid_argument("permute_targets: label out of range");
        out.push_back(perm[l]);
    }
    return out;
}

}  // namespace deint::scmloss
