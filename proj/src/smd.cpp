#include "hepnas/smd.hpp"

namespace hepnas {

SmdLossParts smd_loss(Tape& tape, ValueId student_logits, const std::vector<int>& labels,
                      const Tensor* prev_probs, const std::vector<Tensor>& peer_probs,
                      const SmdWeights& weights) {
    SmdLossParts parts;
    ValueId total = tape.cross_entropy(student_logits, labels);
    parts.ce = tape.value(total).data[0];

    const bool want_prev = weights.lambda_prev > 0.0 && prev_probs != nullptr;
    const bool want_peer = weights.lambda_peer > 0.0 && !peer_probs.empty();

    ValueId student_probs = -1;
    if (want_prev || want_peer) student_probs = tape.softmax(student_logits);

    if (want_prev) {
        ValueId q = tape.input(*prev_probs);
        ValueId kl = tape.kl_div(student_probs, q);
        parts.kl_prev = tape.value(kl).data[0];
        total = tape.add(total, tape.scale(kl, weights.lambda_prev));
    }
    if (want_peer) {
        ValueId peer_sum = -1;
        for (const Tensor& probs : peer_probs) {
            ValueId q = tape.input(probs);
            ValueId kl = tape.kl_div(student_probs, q);
            peer_sum = peer_sum < 0 ? kl : tape.add(peer_sum, kl);
        }
        const double inv = 1.0 / static_cast<double>(peer_probs.size());
        ValueId peer_mean = tape.scale(peer_sum, inv);
        parts.kl_peer = tape.value(peer_mean).data[0];
        total = tape.add(total, tape.scale(peer_mean, weights.lambda_peer));
    }
    parts.loss = total;
    return parts;
}

}  // namespace hepnas
