#pragma once

#include "hepnas/tensor.hpp"

#include <string>

namespace hepnas {

// Synthetic classification dataset. Immutable after construction.
struct Dataset {
    Tensor inputs;             // [n, d]
    std::vector<int> labels;   // class indices in [0, classes)
    int classes = 0;
    std::uint64_t seed = 0;

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return inputs.shape.size() == 2 ? inputs.shape[1] : 0; }
    Dataset take(const std::vector<std::size_t>& rows) const;
};

struct SplitSpec {
    double train_w = 0.35;
    double train_alpha = 0.35;
    double valid = 0.15;
    double test = 0.15;
    std::uint64_t shuffle_seed = 0;

    void validate() const;  // fractions positive, sum 1 +- 1e-9
};

struct DataSplits {
    Dataset train_w;
    Dataset train_alpha;
    Dataset valid;
    Dataset test;
};

// C Gaussian clusters around per-seed centers; labels are cluster indices,
// row i belongs to class i % C.
Dataset gen_blobs(std::uint64_t seed, std::size_t n, std::size_t d, int classes, double spread);

// Interleaved 2-D spirals, one arm per class. Non-linearly separable so the
// choice of cell operations matters.
Dataset gen_spirals(std::uint64_t seed, std::size_t n, int classes, double noise);

// Class-stratified four-way split. Disjoint cover of the input rows,
// deterministic in spec.shuffle_seed.
DataSplits split(const Dataset& ds, const SplitSpec& spec);

void write_dataset_csv(const Dataset& ds, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

}  // namespace hepnas
