#pragma once

#include "hepnas/dataset.hpp"
#include "hepnas/supernet.hpp"

#include <iosfwd>

namespace hepnas {

struct GmConfig {
    int batch_count = 4;          // gradients averaged over this many batches
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
};

// Pairwise cosine similarities of per-op shared-weight gradients on one edge.
struct GmMatrix {
    int edge = -1;
    std::vector<OpKind> ops;
    std::vector<std::vector<double>> sim;  // symmetric, [-1, 1]
    int batch_count = 0;
};

// Binary operation grouping on one edge; A holds the palette-first op.
struct OpSplit {
    int edge = -1;
    OpSet group_a;
    OpSet group_b;
    double cut_value = 0.0;
};

using GmBatch = std::pair<Tensor, std::vector<int>>;

// Deterministic batches drawn from the weight-training split.
std::vector<GmBatch> gm_batches(const Dataset& train_w, const GmConfig& cfg);

// Classification-loss gradient over the shared parameters (stem, head, and
// every op weight on edges other than `edge`), with the probed edge's mixture
// replaced by coefficient 1 on `op`. Averaged over the batches; flattened in
// the global parameter order with the probed edge's own entries skipped.
std::vector<double> op_gradient(const Supernet& sn, int edge, OpKind op,
                                const std::vector<GmBatch>& batches);

GmMatrix gm_matrix(const Supernet& sn, const Dataset& train_w, int edge, const GmConfig& cfg);

// Exhaustive minimum cut over all 2^(n-1)-1 unordered non-trivial
// bipartitions of the edge's ops; ties broken by the lexicographically
// smallest group-A membership mask.
OpSplit min_cut_split(const GmMatrix& matrix);

void write_gm_csv(const GmMatrix& matrix, std::ostream& out);

}  // namespace hepnas
