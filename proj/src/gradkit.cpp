#include "deint/gradkit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "deint/parallel.hpp"

namespace deint::gradkit {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void require_same_tape(const Tensor& a, const Tensor& b, const char* op) {
    require(a.defined() && b.defined(), std::string(op) + ": undefined tensor");
    require(a.tape() == b.tape(), std::string(op) + ": tensors from different tapes");
}

std::string op_shape_msg(const char* op, const Tensor& a, const Tensor& b) {
    std::ostringstream os;
    os << op << ": shape mismatch " << shape_str(a.shape()) << " vs " << shape_str(b.shape());
    return os.str();
}

}  // namespace

std::int64_t numel_of(std::span<const int> shape) {
    std::int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
}

std::string shape_str(std::span<const int> shape) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ")";
    return os.str();
}

const std::vector<int>& Tensor::shape() const { return node_->shape; }
std::int64_t Tensor::numel() const { return static_cast<std::int64_t>(node_->values.size()); }
const std::vector<double>& Tensor::values() const { return node_->values; }
bool Tensor::requires_grad() const { return node_->requires_grad; }

const std::vector<double>& Tensor::grad() const {
    if (!node_->requires_grad)
        throw std::logic_error("Tensor::grad: node does not require gradients");
    return node_->grad;
}

double Tensor::scalar() const {
    if (numel() != 1) throw std::logic_error("Tensor::scalar: tensor is not scalar");
    return node_->values[0];
}

Node* Tape::make_node(std::vector<int> shape, bool requires_grad, const char* op) {
    auto node = std::make_unique<Node>();
    node->shape = std::move(shape);
    node->values.assign(static_cast<std::size_t>(numel_of(node->shape)), 0.0);
    node->requires_grad = requires_grad;
    if (requires_grad) node->grad.assign(node->values.size(), 0.0);
    node->op = op;
    node->index = nodes_.size();
    nodes_.push_back(std::move(node));
    return nodes_.back().get();
}

Tensor Tape::tensor(std::vector<int> shape, std::vector<double> values, bool requires_grad) {
    const auto n = numel_of(shape);
    require(static_cast<std::int64_t>(values.size()) == n,
            "Tape::tensor: " + std::to_string(values.size()) + " values for shape " +
                shape_str(shape));
    Node* node = make_node(std::move(shape), requires_grad, "leaf");
    node->values = std::move(values);
    return Tensor(this, node);
}

Tensor Tape::zeros(std::vector<int> shape, bool requires_grad) {
    return Tensor(this, make_node(std::move(shape), requires_grad, "leaf"));
}

Tensor Tape::full(std::vector<int> shape, double value, bool requires_grad) {
    Node* node = make_node(std::move(shape), requires_grad, "leaf");
    std::fill(node->values.begin(), node->values.end(), value);
    return Tensor(this, node);
}

Tensor Tape::scalar(double value, bool requires_grad) {
    return tensor({1}, {value}, requires_grad);
}

void Tape::backward(const Tensor& loss) {
    require(loss.defined() && loss.tape() == this, "backward: loss not on this tape");
    require(loss.numel() == 1,
            "backward: loss must be scalar, got shape " + shape_str(loss.shape()));
    if (!std::isfinite(loss.scalar()))
        throw std::invalid_argument("backward: loss is not finite");
    if (consumed_)
        throw std::logic_error("backward: tape already consumed; reset it before reuse");
    consumed_ = true;
    Node* top = loss.node();
    if (!top->requires_grad) return;
    std::fill(top->grad.begin(), top->grad.end(), 0.0);
    top->grad[0] = 1.0;
    for (std::size_t i = top->index + 1; i-- > 0;) {
        Node* n = nodes_[i].get();
        if (n->requires_grad && n->backprop) n->backprop();
    }
}

void Tape::reset() {
    nodes_.clear();
    consumed_ = false;
}

// ---------------------------------------------------------------- elementwise

namespace {

template <typename Fwd, typename Bwd>
Tensor binary_op(const Tensor& a, const Tensor& b, const char* op, Fwd fwd, Bwd bwd) {
    require_same_tape(a, b, op);
    require(a.shape() == b.shape(), op_shape_msg(op, a, b));
    Tape* tape = a.tape();
    const bool rg = a.requires_grad() || b.requires_grad();
    Node* out = tape->make_node(a.shape(), rg, op);
    Node* na = a.node();
    Node* nb = b.node();
    const std::size_t n = na->values.size();
    for (std::size_t i = 0; i < n; ++i) out->values[i] = fwd(na->values[i], nb->values[i]);
    if (rg) {
        out->backprop = [na, nb, out, bwd, n] {
            for (std::size_t i = 0; i < n; ++i)
                bwd(out->grad[i], na->values[i], nb->values[i], out->values[i],
                    na->requires_grad ? &na->grad[i] : nullptr,
                    nb->requires_grad ? &nb->grad[i] : nullptr);
        };
    }
    return Tensor(tape, out);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, "add", [](double x, double y) { return x + y; },
        [](double g, double, double, double, double* ga, double* gb) {
            if (ga) *ga += g;
            if (gb) *gb += g;
        });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, "sub", [](double x, double y) { return x - y; },
        [](double g, double, double, double, double* ga, double* gb) {
            if (ga) *ga += g;
            if (gb) *gb -= g;
        });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, "mul", [](double x, double y) { return x * y; },
        [](double g, double x, double y, double, double* ga, double* gb) {
            if (ga) *ga += g * y;
            if (gb) *gb += g * x;
        });
}

Tensor div(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, "div", [](double x, double y) { return x / y; },
        [](double g, double, double y, double out, double* ga, double* gb) {
            if (ga) *ga += g / y;
            if (gb) *gb -= g * out / y;
        });
}

Tensor scalar_mul(const Tensor& a, double s) {
    require(a.defined(), "scalar_mul: undefined tensor");
    Tape* tape = a.tape();
    Node* na = a.node();
    Node* out = tape->make_node(na->shape, na->requires_grad, "scalar_mul");
    const std::size_t n = na->values.size();
    for (std::size_t i = 0; i < n; ++i) out->values[i] = s * na->values[i];
    if (na->requires_grad) {
        out->backprop = [na, out, s, n] {
            for (std::size_t i = 0; i < n; ++i) na->grad[i] += s * out->grad[i];
        };
    }
    return Tensor(tape, out);
}

Tensor relu(const Tensor& a) {
    require(a.defined(), "relu: undefined tensor");
    Tape* tape = a.tape();
    Node* na = a.node();
    Node* out = tape->make_node(na->shape, na->requires_grad, "relu");
    const std::size_t n = na->values.size();
    for (std::size_t i = 0; i < n; ++i) out->values[i] = na->values[i] > 0.0 ? na->values[i] : 0.0;
    if (na->requires_grad) {
        out->backprop = [na, out, n] {
            for (std::size_t i = 0; i < n; ++i)
                if (na->values[i] > 0.0) na->grad[i] += out->grad[i];
        };
    }
    return Tensor(tape, out);
}

Tensor stop_gradient(const Tensor& a) {
    require(a.defined(), "stop_gradient: undefined tensor");
    Tape* tape = a.tape();
    Node* out = tape->make_node(a.shape(), false, "stop_gradient");
    out->values = a.values();
    return Tensor(tape, out);
}

// ---------------------------------------------------------------- reductions

Tensor sum_all(const Tensor& a) {
    require(a.defined(), "sum_all: undefined tensor");
    Tape* tape = a.tape();
    Node* na = a.node();
    Node* out = tape->make_node({1}, na->requires_grad, "sum_all");
    double acc = 0.0;
    for (double v : na->values) acc += v;
    out->values[0] = acc;
    if (na->requires_grad) {
        out->backprop = [na, out] {
            const double g = out->grad[0];
            for (double& gv : na->grad) gv += g;
        };
    }
    return Tensor(tape, out);
}

namespace {

struct AxisSplit {
    std::int64_t pre = 1;
    std::int64_t mid = 1;
    std::int64_t post = 1;
    std::vector<int> out_shape;
};

AxisSplit split_axis(const Tensor& a, int axis, bool keepdim, const char* op) {
    const auto& shape = a.shape();
    require(axis >= 0 && axis < static_cast<int>(shape.size()),
            std::string(op) + ": axis " + std::to_string(axis) + " out of range for shape " +
                shape_str(shape));
    AxisSplit s;
    for (int i = 0; i < axis; ++i) s.pre *= shape[i];
    s.mid = shape[axis];
    for (std::size_t i = axis + 1; i < shape.size(); ++i) s.post *= shape[i];
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (static_cast<int>(i) == axis) {
            if (keepdim) s.out_shape.push_back(1);
        } else {
            s.out_shape.push_back(shape[i]);
        }
    }
    if (s.out_shape.empty()) s.out_shape.push_back(1);
    return s;
}

}  // namespace

Tensor sum_axis(const Tensor& a, int axis, bool keepdim) {
    require(a.defined(), "sum_axis: undefined tensor");
    const AxisSplit s = split_axis(a, axis, keepdim, "sum_axis");
    Tape* tape = a.tape();
    Node* na = a.node();
    Node* out = tape->make_node(s.out_shape, na->requires_grad, "sum_axis");
    for (std::int64_t o = 0; o < s.pre; ++o) {
        for (std::int64_t q = 0; q < s.post; ++q) {
            double acc = 0.0;
            for (std::int64_t m = 0; m < s.mid; ++m)
                acc += na->values[(o * s.mid + m) * s.post + q];
            out->values[o * s.post + q] = acc;
        }
    }
    if (na->requires_grad) {
        out->backprop = [na, out, s] {
            for (std::int64_t o = 0; o < s.pre; ++o)
                for (std::int64_t m = 0; m < s.mid; ++m)
                    for (std::int64_t q = 0; q < s.post; ++q)
                        na->grad[(o * s.mid + m) * s.post + q] += out->grad[o * s.post + q];
        };
    }
    return Tensor(tape, out);
}

Tensor max_axis(const Tensor& a, int axis, bool keepdim) {
    require(a.defined(), "max_axis: undefined tensor");
    const AxisSplit s = split_axis(a, axis, keepdim, "max_axis");
    Tape* tape = a.tape();
    Node* na = a.node();
    Node* out = tape->make_node(s.out_shape, na->requires_grad, "max_axis");
    std::vector<std::int64_t> arg(static_cast<std::size_t>(s.pre * s.post));
    for (std::int64_t o = 0; o < s.pre; ++o) {
        for (std::int64_t q = 0; q < s.post; ++q) {
            std::int64_t best = (o * s.mid) * s.post + q;
            double best_v = na->values[best];
            for (std::int64_t m = 1; m < s.mid; ++m) {
                const std::int64_t idx = (o * s.mid + m) * s.post + q;
                if (na->values[idx] > best_v) {  // strict: ties keep the lowest index
                    best_v = na->values[idx];
                    best = idx;
                }
            }
            out->values[o * s.post + q] = best_v;
            arg[o * s.post + q] = best;
        }
    }
    if (na->requires_grad) {
        out->backprop = [na, out, arg = std::move(arg)] {
            for (std::size_t i = 0; i < arg.size(); ++i) na->grad[arg[i]] += out->grad[i];
        };
    }
    return Tensor(tape, out);
}

// ---------------------------------------------------------------- image ops

namespace {

void require_chw(const Tensor& t, const char* op) {
    require(t.defined(), std::string(op) + ": undefined tensor");
    require(t.shape().size() == 3,
            std::string(op) + ": expected (C,H,W) tensor, got " + shape_str(t.shape()));
}

// copies (C,H,W) into a zero-padded (C,H+2,W+2) buffer
std::vector<double> pad1(const std::vector<double>& src, int c, int h, int w) {
    const int hp = h + 2, wp = w + 2;
    std::vector<double> dst(static_cast<std::size_t>(c) * hp * wp, 0.0);
    for (int ch = 0; ch < c; ++ch) {
        for (int y = 0; y < h; ++y) {
            const double* s = src.data() + (static_cast<std::size_t>(ch) * h + y) * w;
            double* d = dst.data() + (static_cast<std::size_t>(ch) * hp + (y + 1)) * wp + 1;
            std::copy(s, s + w, d);
        }
    }
    return dst;
}

// dst += 3x3 stencil over three padded rows; the single hot loop of conv2d
inline void conv_row_9tap(double* __restrict dst, const double* __restrict r0,
                          const double* __restrict r1, const double* __restrict r2,
                          const double* __restrict wk, int n) {
    for (int x = 0; x < n; ++x) {
        dst[x] += wk[0] * r0[x] + wk[1] * r0[x + 1] + wk[2] * r0[x + 2] +
                  wk[3] * r1[x] + wk[4] * r1[x + 1] + wk[5] * r1[x + 2] +
                  wk[6] * r2[x] + wk[7] * r2[x + 1] + wk[8] * r2[x + 2];
    }
}

// eight-lane dot product with a fixed reduction tree (deterministic and
// vectorizable without reassociation)
inline double dot_row(const double* __restrict a, const double* __restrict b, int n) {
    double acc[8] = {0.0};
    int i = 0;
    for (; i + 8 <= n; i += 8)
        for (int k = 0; k < 8; ++k) acc[k] += a[i + k] * b[i + k];
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) +
           tail;
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b) {
    require_chw(x, "conv2d");
    require_same_tape(x, w, "conv2d");
    require_same_tape(x, b, "conv2d");
    const int c_in = x.shape()[0], h = x.shape()[1], wd = x.shape()[2];
    require(w.shape().size() == 4 && w.shape()[1] == c_in && w.shape()[2] == 3 &&
                w.shape()[3] == 3,
            "conv2d: weight shape " + shape_str(w.shape()) + " does not match input " +
                shape_str(x.shape()) + " (want (out," + std::to_string(c_in) + ",3,3))");
    const int c_out = w.shape()[0];
    require(b.shape().size() == 1 && b.shape()[0] == c_out,
            "conv2d: bias shape " + shape_str(b.shape()) + " does not match out channels " +
                std::to_string(c_out));

    Tape* tape = x.tape();
    Node* nx = x.node();
    Node* nw = w.node();
    Node* nb = b.node();
    const bool rg = nx->requires_grad || nw->requires_grad || nb->requires_grad;
    Node* out = tape->make_node({c_out, h, wd}, rg, "conv2d");

    const int hp = h + 2, wp = wd + 2;
    const std::vector<double> xpad = pad1(nx->values, c_in, h, wd);

    ThreadPool::instance().parallel_for(
        c_out,
        [&](std::int64_t oc0, std::int64_t oc1) {
            for (std::int64_t oc = oc0; oc < oc1; ++oc) {
                double* o = out->values.data() + oc * h * wd;
                std::fill(o, o + static_cast<std::size_t>(h) * wd, nb->values[oc]);
                for (int ic = 0; ic < c_in; ++ic) {
                    const double* xp = xpad.data() + static_cast<std::size_t>(ic) * hp * wp;
                    const double* wk = nw->values.data() + (oc * c_in + ic) * 9;
                    for (int y = 0; y < h; ++y) {
                        conv_row_9tap(o + static_cast<std::size_t>(y) * wd, xp + y * wp,
                                      xp + (y + 1) * wp, xp + (y + 2) * wp, wk, wd);
                    }
                }
            }
        },
        2);

    if (rg) {
        out->backprop = [nx, nw, nb, out, c_in, c_out, h, wd, hp, wp] {
            if (nb->requires_grad) {
                for (int oc = 0; oc < c_out; ++oc) {
                    const double* g = out->grad.data() + static_cast<std::size_t>(oc) * h * wd;
                    double acc = 0.0;
                    for (std::int64_t i = 0; i < static_cast<std::int64_t>(h) * wd; ++i)
                        acc += g[i];
                    nb->grad[oc] += acc;
                }
            }
            if (nw->requires_grad) {
                const std::vector<double> xpad = pad1(nx->values, c_in, h, wd);
                ThreadPool::instance().parallel_for(
                    c_out,
                    [&](std::int64_t oc0, std::int64_t oc1) {
                        for (std::int64_t oc = oc0; oc < oc1; ++oc) {
                            const double* g = out->grad.data() + oc * h * wd;
                            for (int ic = 0; ic < c_in; ++ic) {
                                const double* xp =
                                    xpad.data() + static_cast<std::size_t>(ic) * hp * wp;
                                double* gw = nw->grad.data() + (oc * c_in + ic) * 9;
                                for (int ky = 0; ky < 3; ++ky) {
                                    for (int kx = 0; kx < 3; ++kx) {
                                        double acc = 0.0;
                                        for (int y = 0; y < h; ++y)
                                            acc += dot_row(xp + (y + ky) * wp + kx,
                                                           g + static_cast<std::size_t>(y) * wd,
                                                           wd);
                                        gw[ky * 3 + kx] += acc;
                                    }
                                }
                            }
                        }
                    },
                    2);
            }
            if (nx->requires_grad) {
                const std::vector<double> gpad = pad1(out->grad, c_out, h, wd);
                ThreadPool::instance().parallel_for(
                    c_in,
                    [&](std::int64_t ic0, std::int64_t ic1) {
                        for (std::int64_t ic = ic0; ic < ic1; ++ic) {
                            double* gx = nx->grad.data() + ic * h * wd;
                            for (int oc = 0; oc < c_out; ++oc) {
                                const double* gp =
                                    gpad.data() + static_cast<std::size_t>(oc) * hp * wp;
                                const double* wk = nw->values.data() + (oc * c_in + ic) * 9;
                                // correlation with the flipped kernel
                                const double wflip[9] = {wk[8], wk[7], wk[6], wk[5], wk[4],
                                                         wk[3], wk[2], wk[1], wk[0]};
                                for (int y = 0; y < h; ++y) {
                                    conv_row_9tap(gx + static_cast<std::size_t>(y) * wd,
                                                  gp + y * wp, gp + (y + 1) * wp,
                                                  gp + (y + 2) * wp, wflip, wd);
                                }
                            }
                        }
                    },
                    2);
            }
        };
    }
    return Tensor(tape, out);
}

Tensor maxpool2x2(const Tensor& x) {
    require_chw(x, "maxpool2x2");
    const int c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
    require(h % 2 == 0 && w % 2 == 0,
            "maxpool2x2: spatial dims must be even, got " + shape_str(x.shape()));
    Tape* tape = x.tape();
    Node* nx = x.node();
    const int ho = h / 2, wo = w / 2;
    Node* out = tape->make_node({c, ho, wo}, nx->requires_grad, "maxpool2x2");
    std::vector<std::int64_t> arg(out->values.size());
    for (int ch = 0; ch < c; ++ch) {
        for (int y = 0; y < ho; ++y) {
            for (int xcol = 0; xcol < wo; ++xcol) {
                std::int64_t best = -1;
                double best_v = 0.0;
                for (int dy = 0; dy < 2; ++dy) {
                    for (int dx = 0; dx < 2; ++dx) {
                        const std::int64_t idx =
                            (static_cast<std::int64_t>(ch) * h + 2 * y + dy) * w + 2 * xcol + dx;
                        if (best < 0 || nx->values[idx] > best_v) {
                            best_v = nx->values[idx];
                            best = idx;
                        }
                    }
                }
                const std::int64_t oidx = (static_cast<std::int64_t>(ch) * ho + y) * wo + xcol;
                out->values[oidx] = best_v;
                arg[oidx] = best;
            }
        }
    }
    if (nx->requires_grad) {
        out->backprop = [nx, out, arg = std::move(arg)] {
            for (std::size_t i = 0; i < arg.size(); ++i) nx->grad[arg[i]] += out->grad[i];
        };
    }
    return Tensor(tape, out);
}

Tensor upsample_nearest2x(const Tensor& x) {
    require_chw(x, "upsample_nearest2x");
    const int c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
    Tape* tape = x.tape();
    Node* nx = x.node();
    Node* out = tape->make_node({c, 2 * h, 2 * w}, nx->requires_grad, "upsample_nearest2x");
    for (int ch = 0; ch < c; ++ch) {
        for (int y = 0; y < 2 * h; ++y) {
            const double* src = nx->values.data() + (static_cast<std::size_t>(ch) * h + y / 2) * w;
            double* dst = out->values.data() + (static_cast<std::size_t>(ch) * 2 * h + y) * 2 * w;
            for (int xcol = 0; xcol < 2 * w; ++xcol) dst[xcol] = src[xcol / 2];
        }
    }
    if (nx->requires_grad) {
        out->backprop = [nx, out, c, h, w] {
            for (int ch = 0; ch < c; ++ch) {
                for (int y = 0; y < 2 * h; ++y) {
                    const double* g =
                        out->grad.data() + (static_cast<std::size_t>(ch) * 2 * h + y) * 2 * w;
                    double* dst = nx->grad.data() + (static_cast<std::size_t>(ch) * h + y / 2) * w;
                    for (int xcol = 0; xcol < 2 * w; ++xcol) dst[xcol / 2] += g[xcol];
                }
            }
        };
    }
    return Tensor(tape, out);
}

Tensor concat_channels(const std::vector<Tensor>& parts) {
    require(!parts.empty(), "concat_channels: no inputs");
    Tape* tape = parts[0].tape();
    const auto& ref = parts[0].shape();
    int dim0 = 0;
    bool rg = false;
    for (const Tensor& p : parts) {
        require_same_tape(parts[0], p, "concat_channels");
        require(p.shape().size() == ref.size() &&
                    std::equal(ref.begin() + 1, ref.end(), p.shape().begin() + 1),
                "concat_channels: incompatible shapes " + shape_str(ref) + " vs " +
                    shape_str(p.shape()));
        dim0 += p.shape()[0];
        rg = rg || p.requires_grad();
    }
    std::vector<int> out_shape = ref;
    out_shape[0] = dim0;
    Node* out = tape->make_node(out_shape, rg, "concat_channels");

    std::vector<Node*> srcs;
    srcs.reserve(parts.size());
    for (const Tensor& p : parts) srcs.push_back(p.node());

    std::size_t offset = 0;
    for (Node* s : srcs) {
        std::copy(s->values.begin(), s->values.end(), out->values.begin() + offset);
        offset += s->values.size();
    }
    if (rg) {
        out->backprop = [srcs = std::move(srcs), out] {
            std::size_t off = 0;
            for (Node* s : srcs) {
                if (s->requires_grad) {
                    for (std::size_t i = 0; i < s->values.size(); ++i)
                        s->grad[i] += out->grad[off + i];
                }
                off += s->values.size();
            }
        };
    }
    return Tensor(tape, out);
}

Tensor softmax_channels(const Tensor& x) {
    require_chw(x, "softmax_channels");
    const int c = x.shape()[0];
    const std::int64_t px = static_cast<std::int64_t>(x.shape()[1]) * x.shape()[2];
    Tape* tape = x.tape();
    Node* nx = x.node();
    Node* out = tape->make_node(x.shape(), nx->requires_grad, "softmax_channels");

    ThreadPool::instance().parallel_for(px, [&](std::int64_t p0, std::int64_t p1) {
        for (std::int64_t p = p0; p < p1; ++p) {
            double m = nx->values[p];
            for (int ch = 1; ch < c; ++ch) m = std::max(m, nx->values[ch * px + p]);
            double denom = 0.0;
            for (int ch = 0; ch < c; ++ch) {
                const double e = std::exp(nx->values[ch * px + p] - m);
                out->values[ch * px + p] = e;
                denom += e;
            }
            for (int ch = 0; ch < c; ++ch) out->values[ch * px + p] /= denom;
        }
    });

    if (nx->requires_grad) {
        out->backprop = [nx, out, c, px] {
            ThreadPool::instance().parallel_for(px, [&](std::int64_t p0, std::int64_t p1) {
                for (std::int64_t p = p0; p < p1; ++p) {
                    double dot = 0.0;
                    for (int ch = 0; ch < c; ++ch)
                        dot += out->grad[ch * px + p] * out->values[ch * px + p];
                    for (int ch = 0; ch < c; ++ch)
                        nx->grad[ch * px + p] +=
                            out->values[ch * px + p] * (out->grad[ch * px + p] - dot);
                }
            });
        };
    }
    return Tensor(tape, out);
}

Tensor gather_pixels(const Tensor& x, std::span<const PixelCoord> coords) {
    require_chw(x, "gather_pixels");
    require(!coords.empty(), "gather_pixels: no coordinates");
    const int c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
    for (const PixelCoord& p : coords) {
        require(p.row >= 0 && p.row < h && p.col >= 0 && p.col < w,
                "gather_pixels: coordinate (" + std::to_string(p.row) + "," +
                    std::to_string(p.col) + ") outside " + shape_str(x.shape()));
    }
    Tape* tape = x.tape();
    Node* nx = x.node();
    const int k = static_cast<int>(coords.size());
    Node* out = tape->make_node({k, c}, nx->requires_grad, "gather_pixels");
    std::vector<PixelCoord> cc(coords.begin(), coords.end());
    const std::int64_t px = static_cast<std::int64_t>(h) * w;
    for (int i = 0; i < k; ++i) {
        const std::int64_t base = static_cast<std::int64_t>(cc[i].row) * w + cc[i].col;
        for (int ch = 0; ch < c; ++ch) out->values[i * c + ch] = nx->values[ch * px + base];
    }
    if (nx->requires_grad) {
        out->backprop = [nx, out, cc = std::move(cc), c, w, px] {
            for (std::size_t i = 0; i < cc.size(); ++i) {
                const std::int64_t base = static_cast<std::int64_t>(cc[i].row) * w + cc[i].col;
                for (int ch = 0; ch < c; ++ch)
                    nx->grad[ch * px + base] += out->grad[i * c + ch];
            }
        };
    }
    return Tensor(tape, out);
}

// ---------------------------------------------------------------- optimizer

AdamState::AdamState(AdamConfig cfg, std::span<const Param> params) : cfg_(cfg) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const Param& p : params) {
        m_.emplace_back(p.values.size(), 0.0);
        v_.emplace_back(p.values.size(), 0.0);
    }
}

void AdamState::step(std::span<Param> params) {
    if (params.size() != m_.size())
        throw std::invalid_argument("adam_step: parameter count changed");
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Param& p = params[k];
        if (p.grad.size() != p.values.size())
            throw std::invalid_argument("adam_step: missing gradient for parameter " + p.name);
        for (std::size_t i = 0; i < p.values.size(); ++i) {
            const double g = p.grad[i];
            m_[k][i] = cfg_.beta1 * m_[k][i] + (1.0 - cfg_.beta1) * g;
            v_[k][i] = cfg_.beta2 * v_[k][i] + (1.0 - cfg_.beta2) * g * g;
            const double mhat = m_[k][i] / bc1;
            const double vhat = v_[k][i] / bc2;
            p.values[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

// ---------------------------------------------------------------- grad check

namespace {

bool has_duplicates(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) != v.end();
}

}  // namespace

GradCheckReport grad_check(const TensorFn& f, const std::vector<std::vector<int>>& shapes,
                           std::vector<std::vector<double>> inputs, double fd_step) {
    if (shapes.size() != inputs.size())
        throw std::invalid_argument("grad_check: shapes/inputs size mismatch");

    GradCheckReport report;
    for (auto& input : inputs) {
        for (int round = 1; has_duplicates(input) && round <= 3; ++round) {
            report.tie_perturbed = true;
            for (std::size_t j = 0; j < input.size(); ++j)
                input[j] += static_cast<double>(j + 1) * 3e-3 * round;
        }
    }

    auto eval = [&](const std::vector<std::vector<double>>& vals, bool with_grad) {
        Tape tape;
        std::vector<Tensor> leaves;
        leaves.reserve(vals.size());
        for (std::size_t i = 0; i < vals.size(); ++i)
            leaves.push_back(tape.tensor(shapes[i], vals[i], with_grad));
        Tensor loss = f(tape, leaves);
        if (loss.numel() != 1)
            throw std::invalid_argument("grad_check: function must be scalar-valued");
        std::pair<double, std::vector<std::vector<double>>> result{loss.scalar(), {}};
        if (with_grad) {
            tape.backward(loss);
            for (const Tensor& leaf : leaves) result.second.push_back(leaf.grad());
        }
        return result;
    };

    const auto analytic = eval(inputs, true).second;

    for (std::size_t i = 0; i < inputs.size(); ++i) {
        for (std::size_t j = 0; j < inputs[i].size(); ++j) {
            auto probe = inputs;
            probe[i][j] = inputs[i][j] + fd_step;
            const double up = eval(probe, false).first;
            probe[i][j] = inputs[i][j] - fd_step;
            const double down = eval(probe, false).first;
            const double numeric = (up - down) / (2.0 * fd_step);
            const double a = analytic[i][j];
            const double rel =
                std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
            report.max_rel_err = std::max(report.max_rel_err, rel);
        }
    }
    return report;
}

}  // namespace deint::gradkit
