#pragma once

#include "hepnas/partition_search.hpp"

#include <functional>
#include <map>

namespace hepnas {

struct OracleTrainConfig {
    long epochs = 40;
    double lr = 0.05;
    double lr_min = 0.001;
    double momentum = 0.9;
    double weight_decay = 3e-4;
    double clip_norm = 5.0;
    std::size_t batch_size = 32;
    std::uint64_t cap = kEnumerationCap;

    void validate() const;
};

// Exact standalone test accuracy for every architecture in a small region.
struct OracleTable {
    CellSpec spec;
    Region region;
    std::uint64_t base_seed = 0;
    struct Row {
        std::uint64_t arch_id = 0;
        std::string encoding;
        std::uint64_t seed = 0;
        double test_acc = 0.0;
    };
    std::vector<Row> rows;  // sorted by arch_id

    const Row* find(const std::string& encoding) const;
    double best_acc() const;
};

// Trains `arch` from scratch as a single-path network on the union of both
// training splits; returns test-set accuracy. Deterministic per seed.
double train_standalone(const Architecture& arch, const CellSpec& spec, const DataSplits& splits,
                        const OracleTrainConfig& cfg, std::uint64_t seed);

// Full table over enumerate_archs(region). Per-arch seed = base_seed XOR the
// architecture index. Rows present in `existing` are reused, making reruns
// resumable. `workers` > 1 fans rows out across threads (results identical).
// `row_sink`, when set, receives each freshly computed row as it completes
// (serialized under a lock), so callers can append to durable storage.
OracleTable build_table(const CellSpec& spec, const Region& region, const DataSplits& splits,
                        const OracleTrainConfig& cfg, std::uint64_t base_seed,
                        const OracleTable* existing = nullptr, int workers = 1,
                        const std::function<void(std::size_t, std::size_t)>& progress = {},
                        const std::function<void(const OracleTable::Row&)>& row_sink = {});

void write_oracle_csv(const OracleTable& table, const std::string& path);
// Reads rows from a table CSV; spec/region supplied by the caller.
OracleTable read_oracle_csv(const std::string& path, const CellSpec& spec, const Region& region);

// Spearman rank correlation with average ranks for ties. Throws on length
// mismatch, fewer than two points, or zero rank variance.
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

struct RankReport {
    std::optional<double> spearman_rho;  // absent when undefined (< 2 archs or no variance)
    std::string selected_encoding;
    double selected_oracle_acc = 0.0;
    double oracle_best_acc = 0.0;
    double regret = 0.0;                 // best - selected, >= 0
    double percentile = 0.0;             // 1 - (#strictly better)/total, in (0,1]
    std::size_t n_estimates = 0;
};

struct ArchEstimate {
    std::string encoding;
    double estimate = 0.0;    // single-path validation accuracy under shared weights
    double oracle_acc = 0.0;  // standalone test accuracy from the table
};

// Single-path validation-set estimates for every architecture in the final
// supernet's region, under the final supernet's weights. Never mutates the
// supernet.
std::vector<ArchEstimate> extract_estimates(const Supernet& final_supernet, const Dataset& valid,
                                            const OracleTable& table);

RankReport rank_report(const Architecture& selected, const std::vector<ArchEstimate>& estimates,
                       const OracleTable& table);

}  // namespace hepnas
