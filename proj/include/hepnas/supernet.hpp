#pragma once

#include "hepnas/dataset.hpp"
#include "hepnas/optim.hpp"
#include "hepnas/searchspace.hpp"
#include "hepnas/smd.hpp"
#include "hepnas/tensor.hpp"

#include <map>
#include <optional>

namespace hepnas {

// Stable identifier for one parameter tensor of a supernet. The global
// parameter order (stem, head, then edges ascending / ops in canonical order,
// W before b) is the flattening order used by gradient probes.
struct ParamRef {
    enum class Kind { StemW = 0, StemB, HeadW, HeadB, EdgeW, EdgeB };
    Kind kind = Kind::StemW;
    int edge = -1;
    OpKind op = OpKind::Zero;

    auto operator<=>(const ParamRef&) const = default;
};

std::string param_ref_str(const ParamRef& ref);

struct TrainConfig {
    double lr_w = 0.025;
    double lr_w_min = 0.001;
    double momentum = 0.9;
    double weight_decay_w = 3e-4;
    double clip_norm = 5.0;
    double lr_alpha = 3e-4;
    double beta1_alpha = 0.5;
    double beta2_alpha = 0.999;
    double weight_decay_alpha = 1e-3;
    std::size_t batch_size = 32;
    long alpha_freeze_epochs = 5;   // alpha fixed while epochs_trained < this
    long total_epochs = 45;         // cosine horizon for lr_w

    void validate() const;
};

class Supernet;

// Frozen guidance for one training epoch: the previous stage's optimal
// supernet plus the current stage's sibling sub-supernets.
struct TeacherSet {
    const Supernet* previous_best = nullptr;
    std::vector<const Supernet*> peers;
    bool empty() const { return previous_best == nullptr && peers.empty(); }
};

struct TrainStats {
    std::vector<double> weight_batch_losses;  // total loss per weight step
    double mean_total = 0.0;
    double mean_ce = 0.0;
    double mean_kl_prev = 0.0;
    double mean_kl_peer = 0.0;
    long weight_steps = 0;
    long alpha_steps = 0;
};

// Weight-sharing supernet over a Region: mixture forward over the allowed
// ops per edge, bilevel training (momentum SGD on weights, Adam on alpha),
// weight inheritance on splitting, discretization and evaluation.
class Supernet {
public:
    Supernet(CellSpec spec, std::size_t input_dim, Region region, std::uint64_t seed);
    static Supernet make(const CellSpec& spec, std::size_t input_dim, std::uint64_t seed);

    struct Forward {
        Tape tape;
        ValueId logits = -1;
        std::map<ParamRef, ValueId> weight_leaves;
        std::vector<ValueId> alpha_leaves;  // per edge; -1 where unused
    };

    // Mixture forward: node features are sums over incoming edges of
    // softmax(alpha)-weighted operation outputs.
    Forward forward(const Tensor& inputs) const;
    // Mixture everywhere except `edge`, which runs `op` with coefficient 1.
    Forward forward_probe(const Tensor& inputs, int edge, OpKind op) const;
    // Single-path forward for a fixed architecture; no alpha involved.
    Forward forward_path(const Tensor& inputs, const Architecture& arch) const;

    Tensor logits(const Tensor& inputs) const;
    Tensor probs(const Tensor& inputs) const;  // softmax(logits), teacher targets

    // One epoch of bilevel training: per paired batch, an alpha Adam step on
    // classification loss (skipped inside the freeze window) followed by a
    // weight SGD step on the combined loss.
    TrainStats train_epoch(const DataSplits& splits, const TrainConfig& cfg,
                           const TeacherSet& teachers, const SmdWeights& smd);

    // Weight-only step on one batch; `arch` switches to single-path forward.
    double weight_step(const Tensor& inputs, const std::vector<int>& labels,
                       const Architecture* arch, const TeacherSet& teachers,
                       const SmdWeights& smd, double lr, TrainStats* stats = nullptr);
    void alpha_step(const Tensor& inputs, const std::vector<int>& labels, double lr);

    double eval_accuracy(const Dataset& ds) const;
    double eval_accuracy_path(const Dataset& ds, const Architecture& arch) const;

    // Weights and alpha restricted to `sub`; optimizer states reset; epoch
    // counter and seed carried over.
    Supernet inherit(const Region& sub) const;

    Architecture discretize() const;  // per-edge argmax alpha, first-op tie-break

    void save(const std::string& path) const;
    static Supernet load(const std::string& path);
    std::string to_json_string() const;
    static Supernet from_json_string(const std::string& text);

    const CellSpec& spec() const { return spec_; }
    const Region& region() const { return region_; }
    std::size_t input_dim() const { return input_dim_; }
    long epochs_trained() const { return epochs_trained_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<Tensor>& alpha() const { return alpha_; }
    std::vector<Tensor>& alpha_mut() { return alpha_; }

    std::vector<ParamRef> weight_param_order() const;
    const Tensor& param(const ParamRef& ref) const;
    Tensor& param_mut(const ParamRef& ref);

    // FNV-1a over all parameter and alpha bytes; used by purity checks.
    std::uint64_t param_checksum() const;

    SgdState& sgd_state() { return sgd_; }
    AdamState& adam_state() { return adam_; }

private:
    CellSpec spec_;
    Region region_;
    std::size_t input_dim_ = 0;
    Tensor stem_w_, stem_b_, head_w_, head_b_;
    std::map<std::pair<int, OpKind>, std::pair<Tensor, Tensor>> edge_params_;  // (W, b)
    std::vector<Tensor> alpha_;  // per edge, length = |allowed|
    SgdState sgd_;
    AdamState adam_;
    long epochs_trained_ = 0;
    std::uint64_t seed_ = 0;

    enum class Mode { Mixture, Probe, Path };
    Forward run_forward(const Tensor& inputs, Mode mode, int probe_edge, OpKind probe_op,
                        const Architecture* arch) const;
    double eval_impl(const Dataset& ds, const Architecture* arch) const;
    void init_params();
};

}  // namespace hepnas
