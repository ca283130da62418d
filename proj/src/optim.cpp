#include "hepnas/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace hepnas {

namespace {

void check_group(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
                 std::vector<Tensor>& buffers, const char* who) {
    if (params.size() != grads.size())
        throw std::invalid_argument(std::string(who) + ": " + std::to_string(params.size()) +
                                    " params vs " + std::to_string(grads.size()) + " grads");
    if (buffers.empty()) {
        buffers.reserve(params.size());
        for (const Tensor* p : params) buffers.emplace_back(p->shape);
    }
    if (buffers.size() != params.size())
        throw std::invalid_argument(std::string(who) + ": state buffers out of sync");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i]->same_shape(grads[i]) || !params[i]->same_shape(buffers[i]))
            throw ShapeError(std::string(who) + ": shape mismatch at param " + std::to_string(i) +
                             " param=" + shape_str(*params[i]) + " grad=" + shape_str(grads[i]));
    }
}

}  // namespace

void sgd_step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
              SgdState& state) {
    check_group(params, grads, state.velocity, "sgd_step");

    double norm_sq = 0.0;
    for (const Tensor& g : grads) norm_sq += l2_norm_sq(g);
    double clip_scale = 1.0;
    if (state.clip_norm > 0.0) {
        double norm = std::sqrt(norm_sq);
        if (norm > state.clip_norm) clip_scale = state.clip_norm / norm;
    }

    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        Tensor& v = state.velocity[i];
        const Tensor& g = grads[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            double gj = g.data[j] * clip_scale + state.weight_decay * p.data[j];
            v.data[j] = state.momentum * v.data[j] + gj;
            p.data[j] -= state.learning_rate * v.data[j];
        }
    }
}

void adam_step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
               AdamState& state) {
    check_group(params, grads, state.m, "adam_step");
    if (state.v.empty())
        for (const Tensor* p : params) state.v.emplace_back(p->shape);

    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        Tensor& m = state.m[i];
        Tensor& v = state.v[i];
        const Tensor& g = grads[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            double gj = g.data[j] + state.weight_decay * p.data[j];
            m.data[j] = state.beta1 * m.data[j] + (1.0 - state.beta1) * gj;
            v.data[j] = state.beta2 * v.data[j] + (1.0 - state.beta2) * gj * gj;
            double mh = m.data[j] / bc1;
            double vh = v.data[j] / bc2;
            p.data[j] -= state.learning_rate * mh / (std::sqrt(vh) + state.epsilon);
        }
    }
}

double cosine_lr(double lr_max, double lr_min, long epoch, long total_epochs) {
    if (total_epochs <= 0 || epoch >= total_epochs) return lr_min;
    if (epoch < 0) epoch = 0;
    double t = static_cast<double>(epoch) / static_cast<double>(total_epochs);
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(3.14159265358979323846 * t));
}

}  // namespace hepnas
