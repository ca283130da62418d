#pragma once

#include "hepnas/tensor.hpp"

namespace hepnas {

// Coefficients of the two distillation terms. Unit weights reproduce the
// combined training loss; (0,0) reduces to plain classification.
struct SmdWeights {
    double lambda_prev = 1.0;
    double lambda_peer = 1.0;
};

struct SmdLossParts {
    ValueId loss = -1;      // total, on the tape
    double ce = 0.0;        // component values at the forward point
    double kl_prev = 0.0;
    double kl_peer = 0.0;   // already averaged over peers
};

// total = CE(student, labels)
//       + lambda_prev * KL(softmax(student) || prev)
//       + lambda_peer * mean_i KL(softmax(student) || peer_i)
// Terms with a zero lambda (or no teacher) are skipped entirely, so the tape
// is identical to a plain classification loss in that case. Teacher rows are
// constants; no gradient reaches them.
SmdLossParts smd_loss(Tape& tape, ValueId student_logits, const std::vector<int>& labels,
                      const Tensor* prev_probs, const std::vector<Tensor>& peer_probs,
                      const SmdWeights& weights);

}  // namespace hepnas
