#pragma once

#include "hepnas/tensor.hpp"

namespace hepnas {

// Momentum SGD with global-norm gradient clipping (clip applied across the
// whole parameter group before momentum/decay, clip_norm <= 0 disables it).
struct SgdState {
    double learning_rate = 0.025;
    double momentum = 0.9;
    double weight_decay = 3e-4;
    double clip_norm = 5.0;
    std::vector<Tensor> velocity;  // sized lazily to match the parameter group
};

void sgd_step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
              SgdState& state);

struct AdamState {
    double learning_rate = 3e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double weight_decay = 1e-3;
    double epsilon = 1e-8;
    long step = 0;
    std::vector<Tensor> m;
    std::vector<Tensor> v;
};

void adam_step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
               AdamState& state);

// Half-cosine decay from lr_max (epoch 0) to lr_min (epoch >= total).
double cosine_lr(double lr_max, double lr_min, long epoch, long total_epochs);

}  // namespace hepnas
