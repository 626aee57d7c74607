#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace deint::gradkit {

class Tape;

struct PixelCoord {
    int row = 0;
    int col = 0;
};

// One value on the tape. Gradient buffers exist only on nodes that require
// gradients; backward rules capture raw pointers to their input nodes, which
// stay valid until the owning tape is reset.
struct Node {
    std::vector<int> shape;
    std::vector<double> values;
    std::vector<double> grad;
    bool requires_grad = false;
    const char* op = "leaf";
    std::function<void()> backprop;
    std::size_t index = 0;
};

// Lightweight handle to a tape node.
class Tensor {
  public:
    Tensor() = default;
    Tensor(Tape* t, Node* n) : tape_(t), node_(n) {}

    bool defined() const { return node_ != nullptr; }
    const std::vector<int>& shape() const;
    std::int64_t numel() const;
    const std::vector<double>& values() const;
    const std::vector<double>& grad() const;
    bool requires_grad() const;
    double scalar() const;

    Tape* tape() const { return tape_; }
    Node* node() const { return node_; }

  private:
    Tape* tape_ = nullptr;
    Node* node_ = nullptr;
};

// Records every operation in topological order; backward replays the list in
// exact reverse. Single-threaded by contract (ops may parallelize internally
// with fixed reduction order).
class Tape {
  public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Tensor tensor(std::vector<int> shape, std::vector<double> values, bool requires_grad = false);
    Tensor zeros(std::vector<int> shape, bool requires_grad = false);
    Tensor full(std::vector<int> shape, double value, bool requires_grad = false);
    Tensor scalar(double value, bool requires_grad = false);

    // Seeds d(loss)/d(loss) = 1 and runs every recorded backward rule in
    // reverse order, accumulating into .grad of all requires_grad nodes.
    // One backward per tape; reset before reuse.
    void backward(const Tensor& loss);

    void reset();
    std::size_t node_count() const { return nodes_.size(); }

    Node* make_node(std::vector<int> shape, bool requires_grad, const char* op);

  private:
    std::vector<std::unique_ptr<Node>> nodes_;
    bool consumed_ = false;
};

std::int64_t numel_of(std::span<const int> shape);
std::string shape_str(std::span<const int> shape);

// ---- elementwise ----
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
// No epsilon guard: callers guarantee nonzero denominators.
Tensor div(const Tensor& a, const Tensor& b);
Tensor scalar_mul(const Tensor& a, double s);
Tensor relu(const Tensor& a);
// Copies values, blocks gradient flow.
Tensor stop_gradient(const Tensor& a);

// ---- reductions ----
Tensor sum_all(const Tensor& a);
Tensor sum_axis(const Tensor& a, int axis, bool keepdim = false);
// Gradient routed to the argmax element, lowest index on ties.
Tensor max_axis(const Tensor& a, int axis, bool keepdim = false);

// ---- image ops, layout (C, H, W) ----
// 3x3 kernels, stride 1, zero same-padding. w: (out_ch, in_ch, 3, 3), b: (out_ch).
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b);
Tensor maxpool2x2(const Tensor& x);
Tensor upsample_nearest2x(const Tensor& x);
// Concatenates along axis 0; remaining dims must agree.
Tensor concat_channels(const std::vector<Tensor>& parts);
// Per-pixel softmax over the channel axis; strictly positive, sums to 1.
Tensor softmax_channels(const Tensor& x);
// Gathers the channel vector at each (row, col): (C,H,W) -> (K, C).
Tensor gather_pixels(const Tensor& x, std::span<const PixelCoord> coords);

inline void backward(const Tensor& loss) { loss.tape()->backward(loss); }

// ---- optimizer ----
struct Param {
    std::string name;
    std::vector<int> shape;
    std::vector<double> values;
    std::vector<double> grad;  // filled by the caller after backward

    std::int64_t numel() const { return numel_of(shape); }
};

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class AdamState {
  public:
    AdamState(AdamConfig cfg, std::span<const Param> params);

    // Standard bias-corrected Adam update; requires grads to be populated.
    void step(std::span<Param> params);

    long step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

  private:
    AdamConfig cfg_;
    long t_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

// ---- finite-difference checker ----
struct GradCheckReport {
    double max_rel_err = 0.0;
    bool tie_perturbed = false;  // inputs contained exact duplicates and were nudged
};

using TensorFn = std::function<Tensor(Tape&, std::vector<Tensor>&)>;

// Central differences with step fd_step against the analytic gradients of a
// scalar-valued tensor function. Exact duplicate values within one input are
// deterministically perturbed first so argmax selections stay stable.
GradCheckReport grad_check(const TensorFn& f, const std::vector<std::vector<int>>& shapes,
                           std::vector<std::vector<double>> inputs, double fd_step = 1e-4);

}  // namespace deint::gradkit
