#include "hepnas/partition_search.hpp"

#include <algorithm>

namespace hepnas {

void StageSchedule::validate() const {
    if (split_epos.empty()) throw std::invalid_argument("StageSchedule: empty split_epos");
    long prev = 0;
    for (long e : split_epos) {
        if (e <= prev)
            throw std::invalid_argument("StageSchedule: split_epos must be strictly ascending "
                                        "and positive");
        prev = e;
    }
    if (warm_epo < 1) throw std::invalid_argument("StageSchedule: warm_epo must be >= 1");
    if (warm_decay < 0) throw std::invalid_argument("StageSchedule: warm_decay must be >= 0");
}

long StageSchedule::warmup_for_stage(int stage) const {
    return std::max<long>(1, warm_epo - warm_decay * static_cast<long>(stage));
}

long StageSchedule::total_epochs() const {
    long total = split_epos.back();
    for (std::size_t s = 0; s < split_epos.size(); ++s)
        total += warmup_for_stage(static_cast<int>(s));
    return total;
}

const char* split_order_name(SplitOrder o) {
    switch (o) {
        case SplitOrder::Ascending: return "ascending";
        case SplitOrder::Reverse: return "reverse";
        case SplitOrder::Random: return "random";
    }
    return "?";
}

const char* baseline_name(BaselineMode m) {
    switch (m) {
        case BaselineMode::HepNas: return "hepnas";
        case BaselineMode::OneShot: return "oneshot";
        case BaselineMode::EdgeWise: return "edgewise";
    }
    return "?";
}

std::optional<SplitOrder> split_order_from_name(std::string_view s) {
    for (SplitOrder o : {SplitOrder::Ascending, SplitOrder::Reverse, SplitOrder::Random})
        if (s == split_order_name(o)) return o;
    return std::nullopt;
}

std::optional<BaselineMode> baseline_from_name(std::string_view s) {
    for (BaselineMode m : {BaselineMode::HepNas, BaselineMode::OneShot, BaselineMode::EdgeWise})
        if (s == baseline_name(m)) return m;
    return std::nullopt;
}

std::vector<Supernet> split_stage(const Supernet& parent, const std::vector<int>& stage_edges,
                                  const Dataset& train_w, const GmConfig& gm_cfg,
                                  std::vector<OpSplit>* out_splits) {
    // Per-edge factors: two min-cut groups where the edge is splittable, the
    // singleton set otherwise.
    std::vector<std::vector<OpSet>> factors;
    for (int e : stage_edges) {
        const OpSet& allowed = parent.region().allowed[static_cast<std::size_t>(e)];
        if (allowed.size() >= 2) {
            GmMatrix m = gm_matrix(parent, train_w, e, gm_cfg);
            OpSplit split = min_cut_split(m);
            if (out_splits) out_splits->push_back(split);
            factors.push_back({split.group_a, split.group_b});
        } else {
            factors.push_back({allowed});
        }
    }

    std::size_t count = 1;
    for (const auto& f : factors) count *= f.size();

    std::vector<Supernet> children;
    children.reserve(count);
    std::vector<std::size_t> idx(factors.size(), 0);
    for (std::size_t c = 0; c < count; ++c) {
        Region region = parent.region();
        for (std::size_t i = 0; i < stage_edges.size(); ++i)
            region.allowed[static_cast<std::size_t>(stage_edges[i])] = factors[i][idx[i]];
        children.push_back(parent.inherit(region));
        for (std::size_t i = factors.size(); i-- > 0;) {  // last edge fastest
            if (++idx[i] < factors[i].size()) break;
            idx[i] = 0;
        }
    }
    return children;
}

int select_best(const std::vector<Supernet>& children, const Dataset& valid,
                std::vector<double>* accs) {
    if (children.empty()) throw std::invalid_argument("select_best: no children");
    int best = 0;
    double best_acc = -1.0;
    for (std::size_t i = 0; i < children.size(); ++i) {
        double acc = children[i].eval_accuracy(valid);
        if (accs) accs->push_back(acc);
        if (acc > best_acc) {
            best_acc = acc;
            best = static_cast<int>(i);
        }
    }
    return best;
}

std::vector<std::vector<int>> stage_edge_groups(const CellSpec& spec, const SearchOptions& options,
                                                std::uint64_t seed) {
    std::vector<std::vector<int>> groups;
    if (options.baseline == BaselineMode::OneShot) return groups;
    if (options.baseline == BaselineMode::EdgeWise) {
        for (int e = 0; e < spec.edge_count(); ++e) groups.push_back({e});
    } else {
        for (const Hierarchy& h : hierarchies(spec)) groups.push_back(h.edge_indices);
    }
    switch (options.order) {
        case SplitOrder::Ascending: break;
        case SplitOrder::Reverse: std::reverse(groups.begin(), groups.end()); break;
        case SplitOrder::Random: {
            Rng rng(mix_seed(seed, 0x0D0E0 + static_cast<std::uint64_t>(groups.size())));
            rng.shuffle(groups);
            break;
        }
    }
    return groups;
}

namespace {

std::string stage_label(const CellSpec& spec, const SearchOptions& options,
                        const std::vector<int>& edges) {
    if (options.baseline == BaselineMode::EdgeWise) return "e" + std::to_string(edges[0]);
    // hierarchy label: the shared end node of its edges
    const auto all = spec.edges();
    return "h" + std::to_string(all[static_cast<std::size_t>(edges[0])].to);
}

}  // namespace

SearchResult run_search(const CellSpec& spec, const DataSplits& splits, const TrainConfig& train,
                        const StageSchedule& schedule, const SmdWeights& smd,
                        const GmConfig& gm_cfg, const SearchOptions& options, std::uint64_t seed) {
    spec.validate();
    train.validate();
    schedule.validate();
    if (splits.train_w.dim() == 0) throw std::invalid_argument("run_search: empty train split");

    auto groups = stage_edge_groups(spec, options, seed);
    if (options.baseline != BaselineMode::OneShot &&
        schedule.split_epos.size() != groups.size())
        throw std::invalid_argument(
            "run_search: schedule.split_epos has " + std::to_string(schedule.split_epos.size()) +
            " entries but the " + std::string(baseline_name(options.baseline)) + " mode needs " +
            std::to_string(groups.size()));

    TrainConfig cfg = train;
    cfg.total_epochs = schedule.total_epochs();

    SmdWeights effective_smd = smd;
    if (options.disable_smd) effective_smd = SmdWeights{0.0, 0.0};

    SearchResult result{Architecture{}, Supernet::make(spec, splits.train_w.dim(), seed), {}, {},
                        0.0, seed};
    Supernet& current = result.final_supernet;

    const int n_stages = options.max_stages > 0
                             ? std::min<int>(options.max_stages, static_cast<int>(groups.size()))
                             : static_cast<int>(groups.size());

    if (options.baseline == BaselineMode::OneShot) {
        // Same total budget, no splitting: plain one-shot training.
        for (long e = 0; e < cfg.total_epochs; ++e)
            result.oneshot_stats.push_back(
                current.train_epoch(splits, cfg, TeacherSet{}, SmdWeights{0.0, 0.0}));
        result.final_arch = current.discretize();
        result.final_val_acc = current.eval_accuracy(splits.valid);
        return result;
    }

    long start_epo = 0;
    for (int stage = 0; stage < n_stages; ++stage) {
        const long end_epo = schedule.split_epos[static_cast<std::size_t>(stage)];
        for (long e = start_epo; e < end_epo; ++e)
            result.oneshot_stats.push_back(
                current.train_epoch(splits, cfg, TeacherSet{}, SmdWeights{0.0, 0.0}));

        // The previous-stage optimum (the whole supernet before the first
        // split) becomes the frozen guidance teacher.
        Supernet m_opt = current;

        StageLog log;
        log.stage = stage;
        log.label = stage_label(spec, options, groups[static_cast<std::size_t>(stage)]);
        log.parent_region = current.region();
        log.parent_region_size = region_size(current.region());

        GmConfig stage_gm = gm_cfg;
        stage_gm.seed = mix_seed(gm_cfg.seed ? gm_cfg.seed : seed,
                                 0x6B + static_cast<std::uint64_t>(stage));
        std::vector<Supernet> children = split_stage(
            current, groups[static_cast<std::size_t>(stage)], splits.train_w, stage_gm,
            &log.edge_splits);

        const long warm = schedule.warmup_for_stage(stage);
        log.child_epoch_stats.assign(children.size(), {});
        for (long e = 0; e < warm; ++e) {
            for (std::size_t m = 0; m < children.size(); ++m) {
                TeacherSet teachers;
                if (!options.disable_smd) {
                    teachers.previous_best = &m_opt;
                    for (std::size_t j = 0; j < children.size(); ++j)
                        if (j != m) teachers.peers.push_back(&children[j]);
                }
                log.child_epoch_stats[m].push_back(
                    children[m].train_epoch(splits, cfg, teachers, effective_smd));
            }
        }

        std::vector<double> accs;
        int best = select_best(children, splits.valid, &accs);
        log.selected_index = best;
        for (std::size_t m = 0; m < children.size(); ++m) {
            log.child_regions.push_back(children[m].region());
            log.children.push_back(ChildLog{region_str(children[m].region()),
                                            region_size(children[m].region()), accs[m],
                                            static_cast<int>(m) == best});
        }
        result.stages.push_back(std::move(log));

        current = std::move(children[static_cast<std::size_t>(best)]);
        start_epo = end_epo;
    }

    result.final_arch = current.discretize();
    result.final_val_acc = current.eval_accuracy(splits.valid);
    return result;
}

}  // namespace hepnas
