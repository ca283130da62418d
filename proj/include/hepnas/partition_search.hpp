#pragma once

#include "hepnas/grouping.hpp"
#include "hepnas/smd.hpp"
#include "hepnas/supernet.hpp"

namespace hepnas {

struct StageSchedule {
    std::vector<long> split_epos;  // strictly ascending; one entry per stage
    long warm_epo = 5;             // warmup epochs for the first stage
    long warm_decay = 1;           // per-stage decrement, floored at 1

    void validate() const;
    long warmup_for_stage(int stage) const;
    long total_epochs() const;     // split_epos back + all warmups, the cosine horizon
};

enum class SplitOrder { Ascending, Reverse, Random };
enum class BaselineMode { HepNas, OneShot, EdgeWise };

const char* split_order_name(SplitOrder o);
const char* baseline_name(BaselineMode m);
std::optional<SplitOrder> split_order_from_name(std::string_view s);
std::optional<BaselineMode> baseline_from_name(std::string_view s);

struct SearchOptions {
    SplitOrder order = SplitOrder::Ascending;
    BaselineMode baseline = BaselineMode::HepNas;
    int max_stages = 0;        // 0 = split every stage group
    bool disable_smd = false;  // bypass distillation machinery entirely
};

struct ChildLog {
    std::string region;
    std::uint64_t region_size = 0;
    double val_acc = 0.0;
    bool selected = false;
};

struct StageLog {
    int stage = 0;
    std::string label;  // "h2" for a hierarchy stage, "e3" for an edge stage
    std::uint64_t parent_region_size = 0;
    int selected_index = -1;
    std::vector<ChildLog> children;
    // In-memory extras for verification; not serialized.
    Region parent_region;
    std::vector<Region> child_regions;
    std::vector<OpSplit> edge_splits;
    std::vector<std::vector<TrainStats>> child_epoch_stats;  // [child][warm epoch]
};

struct SearchResult {
    Architecture final_arch;
    Supernet final_supernet;
    std::vector<StageLog> stages;
    std::vector<TrainStats> oneshot_stats;  // pre-split training segments
    double final_val_acc = 0.0;
    std::uint64_t seed = 0;
};

// Per splittable stage edge, gradient-match and min-cut into two groups;
// children are the Cartesian product of per-edge groups, weights inherited
// from the parent. Singleton edges contribute a single factor.
std::vector<Supernet> split_stage(const Supernet& parent, const std::vector<int>& stage_edges,
                                  const Dataset& train_w, const GmConfig& gm_cfg,
                                  std::vector<OpSplit>* out_splits = nullptr);

// Argmax of validation accuracy, ties to the smallest index.
int select_best(const std::vector<Supernet>& children, const Dataset& valid,
                std::vector<double>* accs = nullptr);

// The full staged search: train, split a stage group, warm the children
// under mutual distillation, keep the best, repeat, then discretize. Stage
// groups come from the baseline mode: one group per hierarchy (hepnas), one
// per edge (edgewise), or none (oneshot).
SearchResult run_search(const CellSpec& spec, const DataSplits& splits, const TrainConfig& train,
                        const StageSchedule& schedule, const SmdWeights& smd,
                        const GmConfig& gm_cfg, const SearchOptions& options, std::uint64_t seed);

// The per-stage edge groups run_search will use; exposed for validation.
std::vector<std::vector<int>> stage_edge_groups(const CellSpec& spec, const SearchOptions& options,
                                                std::uint64_t seed);

}  // namespace hepnas
