#include "hepnas/grouping.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace hepnas {

std::vector<GmBatch> gm_batches(const Dataset& train_w, const GmConfig& cfg) {
    if (cfg.batch_count < 1) throw std::invalid_argument("gm_batches: batch_count must be >= 1");
    if (cfg.batch_size == 0) throw std::invalid_argument("gm_batches: batch_size must be >= 1");
    const std::size_t n = train_w.size();
    if (n == 0) throw std::invalid_argument("gm_batches: empty split");
    const std::size_t d = train_w.dim();

    Rng rng(mix_seed(cfg.seed, 0x96A7));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);

    std::vector<GmBatch> batches;
    std::size_t pos = 0;
    for (int b = 0; b < cfg.batch_count; ++b) {
        Tensor x({cfg.batch_size, d});
        std::vector<int> labels(cfg.batch_size);
        for (std::size_t i = 0; i < cfg.batch_size; ++i) {
            if (pos == n) {  // wrap with a reshuffle
                rng.shuffle(order);
                pos = 0;
            }
            const std::size_t r = order[pos++];
            std::copy_n(&train_w.inputs.data[r * d], d, &x.data[i * d]);
            labels[i] = train_w.labels[r];
        }
        batches.emplace_back(std::move(x), std::move(labels));
    }
    return batches;
}

std::vector<double> op_gradient(const Supernet& sn, int edge, OpKind op,
                                const std::vector<GmBatch>& batches) {
    if (!sn.region().contains(edge, op))
        throw std::invalid_argument(std::string("op_gradient: op ") + op_name(op) +
                                    " not allowed on edge " + std::to_string(edge));
    if (batches.empty()) throw std::invalid_argument("op_gradient: no batches");

    std::vector<ParamRef> order;
    for (const ParamRef& ref : sn.weight_param_order())
        if (ref.edge != edge) order.push_back(ref);

    std::vector<double> flat;
    for (const auto& [x, labels] : batches) {
        Supernet::Forward f = sn.forward_probe(x, edge, op);
        ValueId loss = f.tape.cross_entropy(f.logits, labels);
        f.tape.backward(loss);
        std::size_t pos = 0;
        for (const ParamRef& ref : order) {
            const Tensor& g = f.tape.grad(f.weight_leaves.at(ref));
            if (flat.size() < pos + g.size()) flat.resize(pos + g.size(), 0.0);
            for (double v : g.data) flat[pos++] += v;
        }
    }
    const double inv = 1.0 / static_cast<double>(batches.size());
    for (double& v : flat) v *= inv;
    return flat;
}

namespace {

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    double na = 0.0, nb = 0.0, ab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        na += a[i] * a[i];
        nb += b[i] * b[i];
        ab += a[i] * b[i];
    }
    // Zero-norm convention: two zero vectors are identical (1), a zero vector
    // against a nonzero one carries no signal (0).
    if (na == 0.0 && nb == 0.0) return 1.0;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return ab / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

GmMatrix gm_matrix(const Supernet& sn, const Dataset& train_w, int edge, const GmConfig& cfg) {
    const OpSet& allowed = sn.region().allowed[static_cast<std::size_t>(edge)];
    if (allowed.size() < 2)
        throw std::invalid_argument("gm_matrix: edge " + std::to_string(edge) +
                                    " has a singleton allowed set, nothing to split");
    const std::vector<GmBatch> batches = gm_batches(train_w, cfg);

    std::vector<std::vector<double>> grads;
    grads.reserve(allowed.size());
    for (OpKind op : allowed) grads.push_back(op_gradient(sn, edge, op, batches));

    GmMatrix m;
    m.edge = edge;
    m.ops = allowed;
    m.batch_count = cfg.batch_count;
    const std::size_t n = allowed.size();
    m.sim.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double s = cosine_similarity(grads[i], grads[j]);
            m.sim[i][j] = s;
            m.sim[j][i] = s;
        }
    return m;
}

OpSplit min_cut_split(const GmMatrix& matrix) {
    const std::size_t n = matrix.ops.size();
    if (n < 2 || n > 16)
        throw std::invalid_argument("min_cut_split: op count " + std::to_string(n) +
                                    " outside [2,16]");
    // Subsets of {1..n-1}; op 0 is always in group A, so each unordered
    // bipartition is visited exactly once (2^(n-1)-1 candidates).
    const std::uint32_t limit = 1u << (n - 1);
    double best_cut = 0.0;
    std::uint64_t best_key = 0;
    std::uint32_t best_mask = 0;
    bool have = false;
    for (std::uint32_t mask = 0; mask + 1 < limit; ++mask) {
        // bit i of `mask` set means op i+1 joins group A
        double cut = 0.0;
        std::uint64_t key = 1ull << (n - 1);  // op 0, most-significant position
        for (std::size_t i = 1; i < n; ++i)
            if (mask & (1u << (i - 1))) key |= 1ull << (n - 1 - i);
        for (std::size_t i = 0; i < n; ++i) {
            const bool ai = i == 0 || (mask & (1u << (i - 1)));
            if (!ai) continue;
            for (std::size_t j = 0; j < n; ++j) {
                const bool aj = j == 0 || (j > 0 && (mask & (1u << (j - 1))));
                if (!aj) cut += matrix.sim[i][j];
            }
        }
        if (!have || cut < best_cut || (cut == best_cut && key < best_key)) {
            have = true;
            best_cut = cut;
            best_key = key;
            best_mask = mask;
        }
    }
    OpSplit split;
    split.edge = matrix.edge;
    split.cut_value = best_cut;
    for (std::size_t i = 0; i < n; ++i) {
        const bool ai = i == 0 || (best_mask & (1u << (i - 1)));
        (ai ? split.group_a : split.group_b).push_back(matrix.ops[i]);
    }
    return split;
}

void write_gm_csv(const GmMatrix& matrix, std::ostream& out) {
    out << "edge,op_i,op_j,similarity\n";
    for (std::size_t i = 0; i < matrix.ops.size(); ++i)
        for (std::size_t j = 0; j < matrix.ops.size(); ++j) {
            char buf[32];
            auto res = std::to_chars(buf, buf + sizeof(buf), matrix.sim[i][j]);
            out << matrix.edge << ',' << op_name(matrix.ops[i]) << ',' << op_name(matrix.ops[j])
                << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << '\n';
        }
}

}  // namespace hepnas
