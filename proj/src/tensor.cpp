#include "hepnas/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hepnas {

std::string shape_str(const Tensor& t) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < t.shape.size(); ++i) {
        if (i) os << 'x';
        os << t.shape[i];
    }
    os << ']';
    return os.str();
}

bool all_finite(const Tensor& t) {
    for (double v : t.data)
        if (!std::isfinite(v)) return false;
    return true;
}

void axpy(Tensor& y, double a, const Tensor& x) {
    if (!y.same_shape(x))
        throw ShapeError("axpy: shape mismatch " + shape_str(y) + " vs " + shape_str(x));
    for (std::size_t i = 0; i < y.size(); ++i) y.data[i] += a * x.data[i];
}

double dot(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b))
        throw ShapeError("dot: shape mismatch " + shape_str(a) + " vs " + shape_str(b));
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data[i] * b.data[i];
    return s;
}

double l2_norm_sq(const Tensor& t) {
    double s = 0.0;
    for (double v : t.data) s += v * v;
    return s;
}

std::uint64_t Rng::next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::size_t Rng::index(std::size_t n) { return n ? static_cast<std::size_t>(next_u64() % n) : 0; }

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

void require_2d(const Tensor& t, const char* op) {
    if (t.shape.size() != 2)
        throw ShapeError(std::string(op) + ": expected 2-D tensor, got " + shape_str(t));
}

constexpr double kProbFloor = 1e-12;

}  // namespace

ValueId Tape::push(Tensor value, std::function<void(Tape&)> back) {
    nodes_.push_back(Node{std::move(value), Tensor{}, std::move(back)});
    grads_ready_ = false;
    return static_cast<ValueId>(nodes_.size() - 1);
}

ValueId Tape::input(Tensor t) { return push(std::move(t), nullptr); }

const Tensor& Tape::grad(ValueId id) const {
    if (!grads_ready_)
        throw std::logic_error("Tape::grad: backward() has not run");
    return nodes_[id].grad;
}

ValueId Tape::affine(ValueId x, ValueId w, ValueId b) {
    const Tensor& xv = value(x);
    const Tensor& wv = value(w);
    const Tensor& bv = value(b);
    require_2d(xv, "affine");
    require_2d(wv, "affine");
    if (xv.shape[1] != wv.shape[0] || bv.size() != wv.shape[1])
        throw ShapeError("affine: shape mismatch x=" + shape_str(xv) + " W=" + shape_str(wv) +
                         " b=" + shape_str(bv));
    const std::size_t B = xv.shape[0], I = xv.shape[1], O = wv.shape[1];
    Tensor y({B, O});
    for (std::size_t r = 0; r < B; ++r) {
        const double* xr = &xv.data[r * I];
        double* yr = &y.data[r * O];
        for (std::size_t c = 0; c < O; ++c) yr[c] = bv.data[c];
        for (std::size_t i = 0; i < I; ++i) {
            const double xi = xr[i];
            const double* wi = &wv.data[i * O];
            for (std::size_t c = 0; c < O; ++c) yr[c] += xi * wi[c];
        }
    }
    ValueId out = push(std::move(y), nullptr);
    nodes_[out].back = [x, w, b, out, B, I, O](Tape& t) {
        const Tensor& g = t.nodes_[out].grad;
        const Tensor& xv = t.nodes_[x].value;
        const Tensor& wv = t.nodes_[w].value;
        Tensor& gx = t.grad_mut(x);
        Tensor& gw = t.grad_mut(w);
        Tensor& gb = t.grad_mut(b);
        for (std::size_t r = 0; r < B; ++r) {
            const double* gr = &g.data[r * O];
            const double* xr = &xv.data[r * I];
            double* gxr = &gx.data[r * I];
            for (std::size_t c = 0; c < O; ++c) gb.data[c] += gr[c];
            for (std::size_t i = 0; i < I; ++i) {
                const double* wi = &wv.data[i * O];
                double* gwi = &gw.data[i * O];
                double acc = 0.0;
                const double xi = xr[i];
                for (std::size_t c = 0; c < O; ++c) {
                    acc += gr[c] * wi[c];
                    gwi[c] += xi * gr[c];
                }
                gxr[i] += acc;
            }
        }
    };
    return out;
}

ValueId Tape::relu(ValueId x) {
    const Tensor& xv = value(x);
    Tensor y = xv;
    for (double& v : y.data) v = v > 0.0 ? v : 0.0;
    ValueId out = push(std::move(y), nullptr);
    nodes_[out].back = [x, out](Tape& t) {
        const Tensor& g = t.nodes_[out].grad;
        const Tensor& xv = t.nodes_[x].value;
        Tensor& gx = t.grad_mut(x);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (xv.data[i] > 0.0) gx.data[i] += g.data[i];
    };
    return out;
}

ValueId Tape::tanh(ValueId x) {
    const Tensor& xv = value(x);
    Tensor y = xv;
    for (double& v : y.data) v = std::tanh(v);
    ValueId out = push(std::move(y), nullptr);
    nodes_[out].back = [x, out](Tape& t) {
        const Tensor& g = t.nodes_[out].grad;
        const Tensor& yv = t.nodes_[out].value;
        Tensor& gx = t.grad_mut(x);
        for (std::size_t i = 0; i < g.size(); ++i)
            gx.data[i] += (1.0 - yv.data[i] * yv.data[i]) * g.data[i];
    };
    return out;
}

ValueId Tape::avg_pair(ValueId x) {
    const Tensor& xv = value(x);
    require_2d(xv, "avg_pair");
    const std::size_t B = xv.shape[0], W = xv.shape[1];
    Tensor y({B, W});
    for (std::size_t r = 0; r < B; ++r) {
        const double* xr = &xv.data[r * W];
        double* yr = &y.data[r * W];
        std::size_t c = 0;
        for (; c + 1 < W; c += 2) {
            double m = 0.5 * (xr[c] + xr[c + 1]);
            yr[c] = m;
            yr[c + 1] = m;
        }
        if (c < W) yr[c] = xr[c];  // odd tail: its own mean
    }
    ValueId out = push(std::move(y), nullptr);
    nodes_[out].back = [x, out, B, W](Tape& t) {
        const Tensor& g = t.nodes_[out].grad;
        Tensor& gx = t.grad_mut(x);
        for (std::size_t r = 0; r < B; ++r) {
            const double* gr = &g.data[r * W];
            double* gxr = &gx.data[r * W];
            std::size_t c = 0;
            for (; c + 1 < W; c += 2) {
                double m = 0.5 * (gr[c] + gr[c + 1]);
                gxr[c] += m;
                gxr[c + 1] += m;
            }
            if (c < W) gxr[c] += gr[c];
        }
    };
    return out;
}

namespace {

// 1-D tensors are treated as a single softmax row.
std::pair<std::size_t, std::size_t> row_view(const Tensor& t, const char* op) {
    if (t.shape.size() == 1) return {1, t.shape[0]};
    if (t.shape.size() == 2) return {t.shape[0], t.shape[1]};
    throw ShapeError(std::string(op) + ": expected 1-D or 2-D tensor, got " + shape_str(t));
}

// Stable row-wise softmax into `out`.
void softmax_rows(const Tensor& x, Tensor& out) {
    const auto [B, C] = row_view(x, "softmax");
    for (std::size_t r = 0; r < B; ++r) {
        const double* xr = &x.data[r * C];
        double* yr = &out.data[r * C];
        double mx = xr[0];
        for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, xr[c]);
        double s = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            yr[c] = std::exp(xr[c] - mx);
            s += yr[c];
        }
        for (std::size_t c = 0; c < C; ++c) yr[c] /= s;
    }
}

}  // namespace

ValueId Tape::softmax(ValueId x) {
    const Tensor& xv = value(x);
    row_view(xv, "softmax");
    Tensor y(xv.shape);
    softmax_rows(xv, y);
    ValueId out = push(std::move(y), nullptr);
    nodes_[out].back = [x, out](Tape& t) {
        const Tensor& g = t.nodes_[out].grad;
        const Tensor& yv = t.nodes_[out].value;
        Tensor& gx = t.grad_mut(x);
        const auto [B, C] = row_view(yv, "softmax");
        for (std::size_t r = 0; r < B; ++r) {
            const double* gr = &g.data[r * C];
            const double* yr = &yv.data[r * C];
            double* gxr = &gx.data[r * C];
            double inner = 0.0;
            for (std::size_t c = 0; c < C; ++c) inner += gr[c] * yr[c];
            for (std::size_t c = 0; c < C; ++c) gxr[c] += yr[c] * (gr[c] - inner);
        }
    };
    return out;
}

ValueId Tape::log_softmax(ValueId x) {
    const Tensor& xv = value(x);
    require_2d(xv, "log_softmax");
    const std::size_t B = xv.shape[0], C = xv.shape[1];
    Tensor y({B, C});
    for (std::size_t r = 0; r < B; ++r) {
        const double* xr = &xv.data[r * C];
        double* yr = &y.data[r * C];
        double mx = xr[0];
        for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, xr[c]);
        double s = 0.0;
        for (std::size_t c = 0; c < C; ++c) s += std::exp(xr[c] - mx);
        const double lse = mx + std::log(s);
        for (std::size_t c = 0; c < C; ++c) yr[c] = xr[c] - lse;
    }
    ValueId out = push(std::move(y), nullptr);
    nodes_[out].back = [x, out, B, C](Tape& t) {
        const Tensor& g = t.nodes_[out].grad;
        const Tensor& yv = t.nodes_[out].value;
        Tensor& gx = t.grad_mut(x);
        for (std::size_t r = 0; r < B; ++r) {
            const double* gr = &g.data[r * C];
            const double* yr = &yv.data[r * C];
            double* gxr = &gx.data[r * C];
            double gsum = 0.0;
            for (std::size_t c = 0; c < C; ++c) gsum += gr[c];
            for (std::size_t c = 0; c < C; ++c) gxr[c] += gr[c] - std::exp(yr[c]) * gsum;
        }
    };
    return out;
}

ValueId Tape::cross_entropy(ValueId logits, const std::vector<int>& labels) {
    const Tensor& lv = value(logits);
    require_2d(lv, "cross_entropy");
    const std::size_t B = lv.shape[0], C = lv.shape[1];
    if (labels.size() != B)
        throw ShapeError("cross_entropy: logits " + shape_str(lv) + " vs " +
                         std::to_string(labels.size()) + " labels");
    for (int l : labels)
        if (l < 0 || static_cast<std::size_t>(l) >= C)
            throw std::invalid_argument("cross_entropy: label " + std::to_string(l) +
                                        " outside [0," + std::to_string(C) + ")");
    // softmax probabilities saved for the backward rule
    Tensor probs({B, C});
    softmax_rows(lv, probs);
    double loss = 0.0;
    for (std::size_t r = 0; r < B; ++r) {
        double p = probs.data[r * C + static_cast<std::size_t>(labels[r])];
        loss -= std::log(std::max(p, kProbFloor));
    }
    loss /= static_cast<double>(B);
    ValueId saved = push(std::move(probs), nullptr);  // constant helper node
    ValueId out = push(Tensor::scalar(loss), nullptr);
    std::vector<int> lab = labels;
    nodes_[out].back = [logits, saved, out, lab, B, C](Tape& t) {
        const double g = t.nodes_[out].grad.data[0];
        const Tensor& probs = t.nodes_[saved].value;
        Tensor& gx = t.grad_mut(logits);
        const double inv_b = 1.0 / static_cast<double>(B);
        for (std::size_t r = 0; r < B; ++r) {
            const double* pr = &probs.data[r * C];
            double* gxr = &gx.data[r * C];
            for (std::size_t c = 0; c < C; ++c) {
                double d = pr[c] - (static_cast<std::size_t>(lab[r]) == c ? 1.0 : 0.0);
                gxr[c] += g * d * inv_b;
            }
        }
    };
    return out;
}

ValueId Tape::kl_div(ValueId p, ValueId q) {
    const Tensor& pv = value(p);
    const Tensor& qv = value(q);
    require_2d(pv, "kl_div");
    if (!pv.same_shape(qv))
        throw ShapeError("kl_div: shape mismatch p=" + shape_str(pv) + " q=" + shape_str(qv));
    const std::size_t B = pv.shape[0], C = pv.shape[1];
    double loss = 0.0;
    for (std::size_t i = 0; i < pv.size(); ++i) {
        double pc = std::max(pv.data[i], kProbFloor);
        double qc = std::max(qv.data[i], kProbFloor);
        loss += pc * std::log(pc / qc);
    }
    loss /= static_cast<double>(B);
    ValueId out = push(Tensor::scalar(loss), nullptr);
    nodes_[out].back = [p, q, out, B, C](Tape& t) {
        const double g = t.nodes_[out].grad.data[0];
        const Tensor& pv = t.nodes_[p].value;
        const Tensor& qv = t.nodes_[q].value;
        Tensor& gp = t.grad_mut(p);
        Tensor& gq = t.grad_mut(q);
        const double inv_b = 1.0 / static_cast<double>(B);
        for (std::size_t i = 0; i < B * C; ++i) {
            double pc = std::max(pv.data[i], kProbFloor);
            double qc = std::max(qv.data[i], kProbFloor);
            if (pv.data[i] > kProbFloor)
                gp.data[i] += g * inv_b * (std::log(pc / qc) + 1.0);
            if (qv.data[i] > kProbFloor)
                gq.data[i] += g * inv_b * (-pc / qc);
        }
    };
    return out;
}

ValueId Tape::scale(ValueId x, double c) {
    Tensor y = value(x);
    for (double& v : y.data) v *= c;
    ValueId out = push(std::move(y), nullptr);
    nodes_[out].back = [x, out, c](Tape& t) {
        const Tensor& g = t.nodes_[out].grad;
        Tensor& gx = t.grad_mut(x);
        for (std::size_t i = 0; i < g.size(); ++i) gx.data[i] += c * g.data[i];
    };
    return out;
}

ValueId Tape::add(ValueId x, ValueId y) {
    const Tensor& xv = value(x);
    const Tensor& yv = value(y);
    if (!xv.same_shape(yv))
        throw ShapeError("add: shape mismatch " + shape_str(xv) + " vs " + shape_str(yv));
    Tensor z = xv;
    for (std::size_t i = 0; i < z.size(); ++i) z.data[i] += yv.data[i];
    ValueId out = push(std::move(z), nullptr);
    nodes_[out].back = [x, y, out](Tape& t) {
        const Tensor& g = t.nodes_[out].grad;
        Tensor& gx = t.grad_mut(x);
        Tensor& gy = t.grad_mut(y);
        for (std::size_t i = 0; i < g.size(); ++i) {
            gx.data[i] += g.data[i];
            gy.data[i] += g.data[i];
        }
    };
    return out;
}

ValueId Tape::sum(ValueId x) {
    const Tensor& xv = value(x);
    double s = 0.0;
    for (double v : xv.data) s += v;
    ValueId out = push(Tensor::scalar(s), nullptr);
    nodes_[out].back = [x, out](Tape& t) {
        const double g = t.nodes_[out].grad.data[0];
        Tensor& gx = t.grad_mut(x);
        for (double& v : gx.data) v += g;
    };
    return out;
}

ValueId Tape::select(ValueId v, std::size_t i) {
    const Tensor& vv = value(v);
    if (i >= vv.size())
        throw ShapeError("select: index " + std::to_string(i) + " out of range for " +
                         shape_str(vv));
    ValueId out = push(Tensor::scalar(vv.data[i]), nullptr);
    nodes_[out].back = [v, out, i](Tape& t) {
        t.grad_mut(v).data[i] += t.nodes_[out].grad.data[0];
    };
    return out;
}

ValueId Tape::mul_scalar(ValueId x, ValueId s) {
    const Tensor& xv = value(x);
    const Tensor& sv = value(s);
    if (!sv.is_scalar())
        throw ShapeError("mul_scalar: scalar operand has shape " + shape_str(sv));
    const double sval = sv.data[0];
    Tensor y = xv;
    for (double& v : y.data) v *= sval;
    ValueId out = push(std::move(y), nullptr);
    nodes_[out].back = [x, s, out](Tape& t) {
        const Tensor& g = t.nodes_[out].grad;
        const Tensor& xv = t.nodes_[x].value;
        const double sval = t.nodes_[s].value.data[0];
        Tensor& gx = t.grad_mut(x);
        double acc = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            gx.data[i] += sval * g.data[i];
            acc += xv.data[i] * g.data[i];
        }
        t.grad_mut(s).data[0] += acc;
    };
    return out;
}

void Tape::backward(ValueId loss) {
    if (loss < 0 || static_cast<std::size_t>(loss) >= nodes_.size())
        throw std::out_of_range("Tape::backward: bad loss id");
    if (!nodes_[loss].value.is_scalar())
        throw std::invalid_argument("Tape::backward: loss is not scalar, shape " +
                                    shape_str(nodes_[loss].value));
    for (auto& n : nodes_) {
        n.grad = Tensor(n.value.shape);
    }
    nodes_[loss].grad.data[0] = 1.0;
    grads_ready_ = true;
    for (ValueId id = loss; id >= 0; --id)
        if (nodes_[id].back) nodes_[id].back(*this);
}

}  // namespace hepnas
