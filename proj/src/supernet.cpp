#include "hepnas/supernet.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hepnas {

using nlohmann::json;

std::string param_ref_str(const ParamRef& ref) {
    switch (ref.kind) {
        case ParamRef::Kind::StemW: return "stem_w";
        case ParamRef::Kind::StemB: return "stem_b";
        case ParamRef::Kind::HeadW: return "head_w";
        case ParamRef::Kind::HeadB: return "head_b";
        case ParamRef::Kind::EdgeW:
            return "edge/" + std::to_string(ref.edge) + "/" + op_name(ref.op) + "/w";
        case ParamRef::Kind::EdgeB:
            return "edge/" + std::to_string(ref.edge) + "/" + op_name(ref.op) + "/b";
    }
    return "?";
}

void TrainConfig::validate() const {
    if (lr_w < 0 || lr_w_min < 0 || lr_alpha < 0)
        throw std::invalid_argument("TrainConfig: learning rates must be non-negative");
    if (lr_w_min > lr_w)
        throw std::invalid_argument("TrainConfig: lr_w_min above lr_w");
    if (momentum < 0 || momentum >= 1)
        throw std::invalid_argument("TrainConfig: momentum outside [0,1)");
    if (weight_decay_w < 0 || weight_decay_alpha < 0)
        throw std::invalid_argument("TrainConfig: negative weight decay");
    if (beta1_alpha <= 0 || beta1_alpha >= 1 || beta2_alpha <= 0 || beta2_alpha >= 1)
        throw std::invalid_argument("TrainConfig: betas outside (0,1)");
    if (batch_size == 0) throw std::invalid_argument("TrainConfig: batch_size must be positive");
    if (alpha_freeze_epochs < 0)
        throw std::invalid_argument("TrainConfig: alpha_freeze_epochs must be >= 0");
    if (total_epochs <= 0) throw std::invalid_argument("TrainConfig: total_epochs must be positive");
}

Supernet::Supernet(CellSpec spec, std::size_t input_dim, Region region, std::uint64_t seed)
    : spec_(std::move(spec)), region_(std::move(region)), input_dim_(input_dim), seed_(seed) {
    spec_.validate();
    region_.validate(spec_);
    if (input_dim_ == 0) throw std::invalid_argument("Supernet: input_dim must be positive");
    init_params();
}

Supernet Supernet::make(const CellSpec& spec, std::size_t input_dim, std::uint64_t seed) {
    return Supernet(spec, input_dim, full_region(spec), seed);
}

void Supernet::init_params() {
    Rng rng(mix_seed(seed_, 0x11717));
    auto he_init = [&rng](Tensor& t, std::size_t fan_in) {
        const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (double& v : t.data) v = std_dev * rng.normal();
    };
    const std::size_t W = spec_.width;
    stem_w_ = Tensor({input_dim_, W});
    stem_b_ = Tensor({W});
    head_w_ = Tensor({W, static_cast<std::size_t>(spec_.classes)});
    head_b_ = Tensor({static_cast<std::size_t>(spec_.classes)});
    he_init(stem_w_, input_dim_);
    he_init(head_w_, W);

    const int E = spec_.edge_count();
    for (int e = 0; e < E; ++e) {
        for (OpKind op : region_.allowed[static_cast<std::size_t>(e)]) {
            if (!op_is_parametric(op)) continue;
            Tensor w({W, W});
            Tensor b({W});
            he_init(w, W);
            edge_params_[{e, op}] = {std::move(w), std::move(b)};
        }
    }
    alpha_.clear();
    for (int e = 0; e < E; ++e)
        alpha_.push_back(Tensor({region_.allowed[static_cast<std::size_t>(e)].size()}));
}

std::vector<ParamRef> Supernet::weight_param_order() const {
    std::vector<ParamRef> order;
    order.push_back({ParamRef::Kind::StemW});
    order.push_back({ParamRef::Kind::StemB});
    order.push_back({ParamRef::Kind::HeadW});
    order.push_back({ParamRef::Kind::HeadB});
    for (const auto& [key, wb] : edge_params_) {
        order.push_back({ParamRef::Kind::EdgeW, key.first, key.second});
        order.push_back({ParamRef::Kind::EdgeB, key.first, key.second});
    }
    return order;
}

const Tensor& Supernet::param(const ParamRef& ref) const {
    return const_cast<Supernet*>(this)->param_mut(ref);
}

Tensor& Supernet::param_mut(const ParamRef& ref) {
    switch (ref.kind) {
        case ParamRef::Kind::StemW: return stem_w_;
        case ParamRef::Kind::StemB: return stem_b_;
        case ParamRef::Kind::HeadW: return head_w_;
        case ParamRef::Kind::HeadB: return head_b_;
        case ParamRef::Kind::EdgeW: return edge_params_.at({ref.edge, ref.op}).first;
        case ParamRef::Kind::EdgeB: return edge_params_.at({ref.edge, ref.op}).second;
    }
    throw std::logic_error("param_mut: bad kind");
}

Supernet::Forward Supernet::run_forward(const Tensor& inputs, Mode mode, int probe_edge,
                                        OpKind probe_op, const Architecture* arch) const {
    if (inputs.shape.size() != 2 || inputs.shape[1] != input_dim_)
        throw ShapeError("Supernet::forward: inputs " + shape_str(inputs) + " need width " +
                         std::to_string(input_dim_));
    const std::size_t B = inputs.shape[0];
    const std::size_t W = spec_.width;

    Forward f;
    Tape& tape = f.tape;
    // Every region parameter becomes a leaf up front so gradient maps are
    // total: dead parameters get exact-zero gradients.
    for (const ParamRef& ref : weight_param_order())
        f.weight_leaves[ref] = tape.input(param(ref));

    const auto edges = spec_.edges();
    const std::size_t E = edges.size();
    f.alpha_leaves.assign(E, -1);
    if (mode != Mode::Path) {
        for (std::size_t e = 0; e < E; ++e)
            if (!(mode == Mode::Probe && static_cast<int>(e) == probe_edge))
                f.alpha_leaves[e] = tape.input(alpha_[e]);
    }

    ValueId x_in = tape.input(inputs);
    ValueId stem = tape.affine(x_in, f.weight_leaves.at({ParamRef::Kind::StemW}),
                               f.weight_leaves.at({ParamRef::Kind::StemB}));

    auto apply_op = [&](OpKind op, std::size_t edge, ValueId x) -> ValueId {
        switch (op) {
            case OpKind::Zero: return -1;
            case OpKind::Skip: return x;
            case OpKind::AvgPair: return tape.avg_pair(x);
            case OpKind::AffineRelu: {
                ValueId w = f.weight_leaves.at({ParamRef::Kind::EdgeW, static_cast<int>(edge), op});
                ValueId b = f.weight_leaves.at({ParamRef::Kind::EdgeB, static_cast<int>(edge), op});
                return tape.relu(tape.affine(x, w, b));
            }
            case OpKind::AffineTanh: {
                ValueId w = f.weight_leaves.at({ParamRef::Kind::EdgeW, static_cast<int>(edge), op});
                ValueId b = f.weight_leaves.at({ParamRef::Kind::EdgeB, static_cast<int>(edge), op});
                return tape.tanh(tape.affine(x, w, b));
            }
        }
        return -1;
    };

    std::vector<ValueId> node_feat(static_cast<std::size_t>(spec_.nodes), -1);
    node_feat[0] = stem;
    std::size_t edge_idx = 0;
    for (int k = 1; k < spec_.nodes; ++k) {
        ValueId acc = -1;
        for (int i = 0; i < k; ++i, ++edge_idx) {
            const OpSet& allowed = region_.allowed[edge_idx];
            ValueId x_i = node_feat[static_cast<std::size_t>(i)];

            if (mode == Mode::Path) {
                OpKind chosen = arch->ops[edge_idx];
                if (!region_.contains(static_cast<int>(edge_idx), chosen))
                    throw std::invalid_argument(std::string("forward_path: op ") +
                                                op_name(chosen) + " not allowed on edge " +
                                                std::to_string(edge_idx));
                ValueId y = apply_op(chosen, edge_idx, x_i);
                if (y >= 0) acc = acc < 0 ? y : tape.add(acc, y);
            } else if (mode == Mode::Probe && static_cast<int>(edge_idx) == probe_edge) {
                if (!region_.contains(static_cast<int>(edge_idx), probe_op))
                    throw std::invalid_argument(std::string("forward_probe: op ") +
                                                op_name(probe_op) + " not allowed on edge " +
                                                std::to_string(edge_idx));
                ValueId y = apply_op(probe_op, edge_idx, x_i);
                if (y >= 0) acc = acc < 0 ? y : tape.add(acc, y);
            } else {
                ValueId weights = tape.softmax(f.alpha_leaves[edge_idx]);
                for (std::size_t oi = 0; oi < allowed.size(); ++oi) {
                    ValueId y = apply_op(allowed[oi], edge_idx, x_i);
                    if (y < 0) continue;  // Zero contributes nothing
                    ValueId scaled = tape.mul_scalar(y, tape.select(weights, oi));
                    acc = acc < 0 ? scaled : tape.add(acc, scaled);
                }
            }
        }
        if (acc < 0) acc = tape.input(Tensor({B, W}));  // all-Zero node
        node_feat[static_cast<std::size_t>(k)] = acc;
    }

    f.logits = tape.affine(node_feat[static_cast<std::size_t>(spec_.nodes - 1)],
                           f.weight_leaves.at({ParamRef::Kind::HeadW}),
                           f.weight_leaves.at({ParamRef::Kind::HeadB}));
    return f;
}

Supernet::Forward Supernet::forward(const Tensor& inputs) const {
    return run_forward(inputs, Mode::Mixture, -1, OpKind::Zero, nullptr);
}

Supernet::Forward Supernet::forward_probe(const Tensor& inputs, int edge, OpKind op) const {
    return run_forward(inputs, Mode::Probe, edge, op, nullptr);
}

Supernet::Forward Supernet::forward_path(const Tensor& inputs, const Architecture& arch) const {
    if (arch.ops.size() != region_.allowed.size())
        throw std::invalid_argument("forward_path: architecture has " +
                                    std::to_string(arch.ops.size()) + " ops for " +
                                    std::to_string(region_.allowed.size()) + " edges");
    return run_forward(inputs, Mode::Path, -1, OpKind::Zero, &arch);
}

Tensor Supernet::logits(const Tensor& inputs) const {
    Forward f = forward(inputs);
    return f.tape.value(f.logits);
}

Tensor Supernet::probs(const Tensor& inputs) const {
    Forward f = forward(inputs);
    ValueId p = f.tape.softmax(f.logits);
    return f.tape.value(p);
}

namespace {

Tensor batch_of(const Dataset& ds, const std::vector<std::size_t>& order, std::size_t begin,
                std::size_t end, std::vector<int>& labels_out) {
    const std::size_t d = ds.dim();
    Tensor x({end - begin, d});
    labels_out.clear();
    labels_out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        const std::size_t r = order[i];
        std::copy_n(&ds.inputs.data[r * d], d, &x.data[(i - begin) * d]);
        labels_out.push_back(ds.labels[r]);
    }
    return x;
}

}  // namespace

double Supernet::weight_step(const Tensor& inputs, const std::vector<int>& labels,
                             const Architecture* arch, const TeacherSet& teachers,
                             const SmdWeights& smd, double lr, TrainStats* stats) {
    // Teacher targets are produced fresh from the teachers' current
    // parameters and enter the student tape as constants.
    Tensor prev_probs;
    std::vector<Tensor> peer_probs;
    const Tensor* prev_ptr = nullptr;
    if (teachers.previous_best && smd.lambda_prev > 0.0) {
        prev_probs = teachers.previous_best->probs(inputs);
        prev_ptr = &prev_probs;
    }
    if (smd.lambda_peer > 0.0)
        for (const Supernet* peer : teachers.peers) peer_probs.push_back(peer->probs(inputs));

    Forward f = arch ? forward_path(inputs, *arch) : forward(inputs);
    SmdLossParts parts = smd_loss(f.tape, f.logits, labels, prev_ptr, peer_probs, smd);
    f.tape.backward(parts.loss);

    std::vector<Tensor*> params;
    std::vector<Tensor> grads;
    for (const ParamRef& ref : weight_param_order()) {
        params.push_back(&param_mut(ref));
        grads.push_back(f.tape.grad(f.weight_leaves.at(ref)));
    }
    sgd_.learning_rate = lr;
    sgd_step(params, grads, sgd_);

    const double total = f.tape.value(parts.loss).data[0];
    if (stats) {
        stats->weight_batch_losses.push_back(total);
        stats->mean_total += total;
        stats->mean_ce += parts.ce;
        stats->mean_kl_prev += parts.kl_prev;
        stats->mean_kl_peer += parts.kl_peer;
        stats->weight_steps += 1;
    }
    return total;
}

void Supernet::alpha_step(const Tensor& inputs, const std::vector<int>& labels, double lr) {
    Forward f = forward(inputs);
    ValueId loss = f.tape.cross_entropy(f.logits, labels);
    f.tape.backward(loss);

    std::vector<Tensor*> params;
    std::vector<Tensor> grads;
    for (std::size_t e = 0; e < alpha_.size(); ++e) {
        params.push_back(&alpha_[e]);
        grads.push_back(f.tape.grad(f.alpha_leaves[e]));
    }
    adam_.learning_rate = lr;
    adam_step(params, grads, adam_);
}

TrainStats Supernet::train_epoch(const DataSplits& splits, const TrainConfig& cfg,
                                 const TeacherSet& teachers, const SmdWeights& smd) {
    cfg.validate();
    sgd_.momentum = cfg.momentum;
    sgd_.weight_decay = cfg.weight_decay_w;
    sgd_.clip_norm = cfg.clip_norm;
    adam_.beta1 = cfg.beta1_alpha;
    adam_.beta2 = cfg.beta2_alpha;
    adam_.weight_decay = cfg.weight_decay_alpha;

    const double lr = cosine_lr(cfg.lr_w, cfg.lr_w_min, epochs_trained_, cfg.total_epochs);
    const bool alpha_on = epochs_trained_ >= cfg.alpha_freeze_epochs;

    Rng rng(mix_seed(seed_, 0xE90C + static_cast<std::uint64_t>(epochs_trained_)));
    std::vector<std::size_t> w_order(splits.train_w.size());
    std::vector<std::size_t> a_order(splits.train_alpha.size());
    for (std::size_t i = 0; i < w_order.size(); ++i) w_order[i] = i;
    for (std::size_t i = 0; i < a_order.size(); ++i) a_order[i] = i;
    rng.shuffle(w_order);
    rng.shuffle(a_order);

    TrainStats stats;
    const std::size_t bs = cfg.batch_size;
    const std::size_t n_w = w_order.size();
    std::size_t a_pos = 0;
    std::vector<int> labels;
    for (std::size_t begin = 0; begin < n_w; begin += bs) {
        const std::size_t end = std::min(begin + bs, n_w);
        if (alpha_on && !a_order.empty()) {
            const std::size_t a_end = std::min(a_pos + bs, a_order.size());
            Tensor ax = batch_of(splits.train_alpha, a_order, a_pos, a_end, labels);
            alpha_step(ax, labels, cfg.lr_alpha);
            stats.alpha_steps += 1;
            a_pos = a_end < a_order.size() ? a_end : 0;
        }
        Tensor wx = batch_of(splits.train_w, w_order, begin, end, labels);
        weight_step(wx, labels, nullptr, teachers, smd, lr, &stats);
    }
    if (stats.weight_steps > 0) {
        stats.mean_total /= static_cast<double>(stats.weight_steps);
        stats.mean_ce /= static_cast<double>(stats.weight_steps);
        stats.mean_kl_prev /= static_cast<double>(stats.weight_steps);
        stats.mean_kl_peer /= static_cast<double>(stats.weight_steps);
    }
    epochs_trained_ += 1;
    return stats;
}

namespace {

double accuracy_of_logits(const Tensor& logits, const std::vector<int>& labels) {
    const std::size_t B = logits.shape[0], C = logits.shape[1];
    std::size_t hits = 0;
    for (std::size_t r = 0; r < B; ++r) {
        const double* row = &logits.data[r * C];
        std::size_t best = 0;
        for (std::size_t c = 1; c < C; ++c)
            if (row[c] > row[best]) best = c;
        if (static_cast<int>(best) == labels[r]) ++hits;
    }
    return static_cast<double>(hits);
}

}  // namespace

double Supernet::eval_accuracy(const Dataset& ds) const { return eval_impl(ds, nullptr); }

double Supernet::eval_accuracy_path(const Dataset& ds, const Architecture& arch) const {
    return eval_impl(ds, &arch);
}

double Supernet::eval_impl(const Dataset& ds, const Architecture* arch) const {
    const std::size_t n = ds.size();
    if (n == 0) throw std::invalid_argument("eval_accuracy: empty dataset");
    const std::size_t bs = 256;
    const std::size_t d = ds.dim();
    double hits = 0.0;
    std::vector<int> labels;
    for (std::size_t begin = 0; begin < n; begin += bs) {
        const std::size_t end = std::min(begin + bs, n);
        Tensor x({end - begin, d});
        labels.assign(ds.labels.begin() + static_cast<std::ptrdiff_t>(begin),
                      ds.labels.begin() + static_cast<std::ptrdiff_t>(end));
        std::copy_n(&ds.inputs.data[begin * d], (end - begin) * d, x.data.data());
        Tensor lg;
        if (arch) {
            Forward f = forward_path(x, *arch);
            lg = f.tape.value(f.logits);
        } else {
            lg = logits(x);
        }
        hits += accuracy_of_logits(lg, labels);
    }
    return hits / static_cast<double>(n);
}

Supernet Supernet::inherit(const Region& sub) const {
    if (!region_subset(sub, region_))
        throw std::invalid_argument("inherit: sub-region is not contained in the parent region");
    Supernet child(spec_, input_dim_, sub, seed_);
    child.stem_w_ = stem_w_;
    child.stem_b_ = stem_b_;
    child.head_w_ = head_w_;
    child.head_b_ = head_b_;
    child.edge_params_.clear();
    for (const auto& [key, wb] : edge_params_)
        if (sub.contains(key.first, key.second)) child.edge_params_[key] = wb;
    // Alpha entries restricted to the surviving ops; softmax renormalizes.
    for (std::size_t e = 0; e < sub.allowed.size(); ++e) {
        Tensor a({sub.allowed[e].size()});
        for (std::size_t i = 0; i < sub.allowed[e].size(); ++i) {
            const OpSet& parent_set = region_.allowed[e];
            auto it = std::find(parent_set.begin(), parent_set.end(), sub.allowed[e][i]);
            a.data[i] = alpha_[e].data[static_cast<std::size_t>(it - parent_set.begin())];
        }
        child.alpha_[e] = std::move(a);
    }
    child.sgd_ = SgdState{};
    child.adam_ = AdamState{};
    child.epochs_trained_ = epochs_trained_;
    return child;
}

Architecture Supernet::discretize() const {
    Architecture arch;
    for (std::size_t e = 0; e < region_.allowed.size(); ++e) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < alpha_[e].size(); ++i)
            if (alpha_[e].data[i] > alpha_[e].data[best]) best = i;
        arch.ops.push_back(region_.allowed[e][best]);
    }
    return arch;
}

std::uint64_t Supernet::param_checksum() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const Tensor& t) {
        for (double v : t.data) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof(bits));
            for (int s = 0; s < 64; s += 8) {
                h ^= (bits >> s) & 0xff;
                h *= 0x100000001b3ULL;
            }
        }
    };
    for (const ParamRef& ref : weight_param_order()) feed(param(ref));
    for (const Tensor& a : alpha_) feed(a);
    return h;
}

namespace {

json tensor_to_json(const Tensor& t) {
    return json{{"shape", t.shape}, {"data", t.data}};
}

Tensor tensor_from_json(const json& j) {
    return Tensor(j.at("shape").get<std::vector<std::size_t>>(),
                  j.at("data").get<std::vector<double>>());
}

}  // namespace

std::string Supernet::to_json_string() const {
    json j;
    j["format"] = "hepnas-supernet";
    j["version"] = 1;
    json spec;
    spec["nodes"] = spec_.nodes;
    spec["width"] = spec_.width;
    spec["classes"] = spec_.classes;
    json palette = json::array();
    for (OpKind op : spec_.palette) palette.push_back(op_name(op));
    spec["palette"] = palette;
    j["spec"] = spec;
    j["input_dim"] = input_dim_;
    j["seed"] = seed_;
    j["epochs_trained"] = epochs_trained_;
    json region = json::array();
    for (const OpSet& set : region_.allowed) {
        json ops = json::array();
        for (OpKind op : set) ops.push_back(op_name(op));
        region.push_back(ops);
    }
    j["region"] = region;
    json params;
    for (const ParamRef& ref : weight_param_order()) params[param_ref_str(ref)] = tensor_to_json(param(ref));
    j["params"] = params;
    json alpha = json::array();
    for (const Tensor& a : alpha_) alpha.push_back(a.data);
    j["alpha"] = alpha;
    return j.dump(2) + "\n";
}

Supernet Supernet::from_json_string(const std::string& text) {
    json j = json::parse(text);
    if (j.at("format") != "hepnas-supernet" || j.at("version") != 1)
        throw std::runtime_error("Supernet::load: unknown checkpoint format");
    CellSpec spec;
    spec.nodes = j.at("spec").at("nodes").get<int>();
    spec.width = j.at("spec").at("width").get<std::size_t>();
    spec.classes = j.at("spec").at("classes").get<int>();
    for (const auto& name : j.at("spec").at("palette")) {
        auto op = op_from_name(name.get<std::string>());
        if (!op) throw std::runtime_error("Supernet::load: unknown op in palette");
        spec.palette.push_back(*op);
    }
    Region region;
    for (const auto& set_json : j.at("region")) {
        OpSet set;
        for (const auto& name : set_json) {
            auto op = op_from_name(name.get<std::string>());
            if (!op) throw std::runtime_error("Supernet::load: unknown op in region");
            set.push_back(*op);
        }
        region.allowed.push_back(std::move(set));
    }
    Supernet sn(spec, j.at("input_dim").get<std::size_t>(), region,
                j.at("seed").get<std::uint64_t>());
    sn.epochs_trained_ = j.at("epochs_trained").get<long>();
    for (const ParamRef& ref : sn.weight_param_order())
        sn.param_mut(ref) = tensor_from_json(j.at("params").at(param_ref_str(ref)));
    const json& alpha = j.at("alpha");
    if (alpha.size() != sn.alpha_.size())
        throw std::runtime_error("Supernet::load: alpha count mismatch");
    for (std::size_t e = 0; e < sn.alpha_.size(); ++e) {
        auto data = alpha[e].get<std::vector<double>>();
        if (data.size() != sn.alpha_[e].size())
            throw std::runtime_error("Supernet::load: alpha length mismatch on edge " +
                                     std::to_string(e));
        sn.alpha_[e].data = std::move(data);
    }
    return sn;
}

void Supernet::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("Supernet::save: cannot open " + path);
    f << to_json_string();
}

Supernet Supernet::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("Supernet::load: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return from_json_string(ss.str());
}

}  // namespace hepnas
