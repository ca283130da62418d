#pragma once

#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace hepnas {

// Thrown by primitives on mismatched operand shapes. Message names the
// primitive and the offending shapes.
class ShapeError : public std::invalid_argument {
public:
    explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Dense row-major 64-bit float tensor. Desk-scale: shapes are small and
// everything lives in one contiguous vector.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s)
        : shape(std::move(s)), data(count(shape), 0.0) {}
    Tensor(std::vector<std::size_t> s, std::vector<double> d)
        : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != count(shape))
            throw ShapeError("Tensor: data length " + std::to_string(data.size()) +
                             " != shape product " + std::to_string(count(shape)));
    }

    static std::size_t count(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (auto d : s) n *= d;
        return n;
    }

    static Tensor zeros(std::vector<std::size_t> s) { return Tensor(std::move(s)); }
    static Tensor full(std::vector<std::size_t> s, double v) {
        Tensor t(std::move(s));
        std::fill(t.data.begin(), t.data.end(), v);
        return t;
    }
    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    std::size_t size() const { return data.size(); }
    bool is_scalar() const { return data.size() == 1; }

    // 2-D accessors; rank is checked by the ops that care.
    std::size_t rows() const { return shape.empty() ? 1 : shape[0]; }
    std::size_t cols() const { return shape.size() < 2 ? (shape.empty() ? 1 : shape[0]) : shape[1]; }

    double& at(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }
    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

std::string shape_str(const Tensor& t);
bool all_finite(const Tensor& t);

// In-place helpers used by the optimizers.
void axpy(Tensor& y, double a, const Tensor& x);  // y += a*x
double dot(const Tensor& a, const Tensor& b);
double l2_norm_sq(const Tensor& t);

// Deterministic random source. Box-Muller normals are hand-rolled so the
// stream does not depend on the standard library's distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9E3779B97F4A7C15ULL) {}

    std::uint64_t next_u64();
    double uniform();                       // [0, 1)
    double uniform(double lo, double hi);
    double normal();                        // standard normal
    std::size_t index(std::size_t n);       // [0, n)

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[index(i)]);
    }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// splitmix64-style mixing for deriving sub-seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

using ValueId = int;

// Reverse-mode autodiff tape. Nodes are appended in topological order
// (every operand id precedes its consumer), so the backward pass is a
// single reverse sweep. Gradients accumulate additively across fan-out.
class Tape {
public:
    ValueId input(Tensor t);

    ValueId affine(ValueId x, ValueId w, ValueId b);   // [B,I]x[I,O]+[O] -> [B,O]
    ValueId relu(ValueId x);
    ValueId tanh(ValueId x);
    ValueId avg_pair(ValueId x);                       // adjacent-pair mean, duplicated
    ValueId softmax(ValueId x);                        // row-wise, stable
    ValueId log_softmax(ValueId x);
    ValueId cross_entropy(ValueId logits, const std::vector<int>& labels);  // mean over batch
    ValueId kl_div(ValueId p, ValueId q);              // mean row KL(p||q), probability rows
    ValueId scale(ValueId x, double c);
    ValueId add(ValueId x, ValueId y);
    ValueId sum(ValueId x);
    ValueId select(ValueId v, std::size_t i);          // scalar v[i]
    ValueId mul_scalar(ValueId x, ValueId s);          // s is a scalar node

    const Tensor& value(ValueId id) const { return nodes_[id].value; }
    const Tensor& grad(ValueId id) const;

    // Fills gradients of every node reachable from `loss`. Unreached leaves
    // keep exact-zero gradients. Loss must be scalar.
    void backward(ValueId loss);

    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::function<void(Tape&)> back;  // null for leaves
    };
    std::vector<Node> nodes_;
    bool grads_ready_ = false;

    ValueId push(Tensor value, std::function<void(Tape&)> back);
    Tensor& grad_mut(ValueId id) { return nodes_[id].grad; }
    friend struct TapeAccess;
};

}  // namespace hepnas
