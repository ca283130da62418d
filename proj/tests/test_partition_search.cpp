#include "hepnas/partition_search.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace hepnas;

namespace {

CellSpec toy_spec(int nodes = 4) {
    CellSpec spec;
    spec.nodes = nodes;
    spec.width = 6;
    spec.classes = 3;
    spec.palette = canonical_palette({OpKind::Zero, OpKind::Skip, OpKind::AffineRelu});
    return spec;
}

DataSplits toy_splits(std::uint64_t seed = 1) {
    Dataset ds = gen_spirals(seed, 240, 3, 0.2);
    SplitSpec sp;
    sp.shuffle_seed = seed;
    return split(ds, sp);
}

TrainConfig fast_cfg() {
    TrainConfig cfg;
    cfg.batch_size = 16;
    cfg.alpha_freeze_epochs = 1;
    cfg.lr_w = 0.05;
    return cfg;
}

StageSchedule tiny_schedule(int stages) {
    StageSchedule s;
    s.split_epos.clear();
    for (int i = 1; i <= stages; ++i) s.split_epos.push_back(i);
    s.warm_epo = 1;
    s.warm_decay = 0;
    return s;
}

GmConfig tiny_gm() {
    GmConfig g;
    g.batch_count = 1;
    g.batch_size = 8;
    g.seed = 7;
    return g;
}

std::set<std::string> arch_set(const Region& region) {
    std::set<std::string> out;
    for (const Architecture& a : enumerate_archs(region, 1 << 20)) out.insert(encode(a));
    return out;
}

}  // namespace

TEST_CASE("schedule warmups decay to a floor of one") {
    StageSchedule s;
    s.split_epos = {10, 20, 30};
    s.warm_epo = 5;
    s.warm_decay = 1;
    CHECK(s.warmup_for_stage(0) == 5);
    CHECK(s.warmup_for_stage(1) == 4);
    CHECK(s.warmup_for_stage(2) == 3);
    CHECK(s.warmup_for_stage(10) == 1);
    CHECK(s.total_epochs() == 30 + 5 + 4 + 3);
    s.validate();
    StageSchedule bad = s;
    bad.split_epos = {10, 10};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("smd_loss equals plain cross-entropy when teachers match the student") {
    Tape tape;
    ValueId logits = tape.input(Tensor({2, 3}, {1.0, -0.5, 0.2, 0.0, 0.3, -0.1}));
    Tensor student_probs = tape.value(tape.softmax(logits));
    std::vector<int> labels = {0, 2};
    SmdLossParts with = smd_loss(tape, logits, labels, &student_probs, {student_probs},
                                 SmdWeights{1.0, 1.0});
    Tape plain_tape;
    ValueId plain_logits = plain_tape.input(Tensor({2, 3}, {1.0, -0.5, 0.2, 0.0, 0.3, -0.1}));
    const double ce =
        plain_tape.value(plain_tape.cross_entropy(plain_logits, labels)).data[0];
    CHECK(tape.value(with.loss).data[0] == doctest::Approx(ce).epsilon(1e-15));
    CHECK(with.kl_prev == 0.0);
    CHECK(with.kl_peer == 0.0);
}

TEST_CASE("smd_loss with no teachers is the classification loss") {
    Tape tape;
    ValueId logits = tape.input(Tensor({1, 2}, {0.3, -0.4}));
    SmdLossParts parts = smd_loss(tape, logits, {1}, nullptr, {}, SmdWeights{1.0, 1.0});
    Tape ref;
    ValueId ref_logits = ref.input(Tensor({1, 2}, {0.3, -0.4}));
    CHECK(tape.value(parts.loss).data[0] ==
          ref.value(ref.cross_entropy(ref_logits, {1})).data[0]);
}

TEST_CASE("smd_loss worked two-class example equals 1.2039") {
    // student uniform over 2 classes, teacher (0.9, 0.1), label 0, lambdas 1:
    // L = ln 2 + 0.5 ln(.5/.9) + 0.5 ln(.5/.1); recomputed here independently
    const double expected = std::log(2.0) + 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
    CHECK(expected == doctest::Approx(1.2039).epsilon(1e-3));

    Tape tape;
    ValueId logits = tape.input(Tensor({1, 2}, {0.0, 0.0}));  // softmax -> (0.5, 0.5)
    Tensor teacher({1, 2}, {0.9, 0.1});
    SmdLossParts parts = smd_loss(tape, logits, {0}, &teacher, {}, SmdWeights{1.0, 1.0});
    CHECK(tape.value(parts.loss).data[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(tape.value(parts.loss).data[0] == doctest::Approx(1.2039).epsilon(1e-3));
}

TEST_CASE("smd_loss peer term divides by the peer count (D-1)") {
    Tape tape;
    ValueId logits = tape.input(Tensor({1, 2}, {0.0, 0.0}));
    Tensor peer1({1, 2}, {0.9, 0.1});
    Tensor peer2({1, 2}, {0.2, 0.8});
    SmdLossParts parts = smd_loss(tape, logits, {0}, nullptr, {peer1, peer2},
                                  SmdWeights{0.0, 1.0});
    const double kl1 = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
    const double kl2 = 0.5 * std::log(0.5 / 0.2) + 0.5 * std::log(0.5 / 0.8);
    CHECK(parts.kl_peer == doctest::Approx(0.5 * (kl1 + kl2)).epsilon(1e-12));
    CHECK(tape.value(parts.loss).data[0] ==
          doctest::Approx(std::log(2.0) + 0.5 * (kl1 + kl2)).epsilon(1e-12));
}

TEST_CASE("smd_loss rejects teacher shape mismatches") {
    Tape tape;
    ValueId logits = tape.input(Tensor({1, 2}, {0.0, 0.0}));
    Tensor bad({1, 3}, {0.2, 0.3, 0.5});
    CHECK_THROWS_AS(smd_loss(tape, logits, {0}, &bad, {}, SmdWeights{1.0, 1.0}), ShapeError);
}

TEST_CASE("split_stage over two splittable edges yields four children") {
    CellSpec spec = toy_spec(4);
    Supernet parent = Supernet::make(spec, 2, 3);
    DataSplits splits = toy_splits(3);
    TrainConfig cfg = fast_cfg();
    cfg.total_epochs = 4;
    for (int e = 0; e < 2; ++e) parent.train_epoch(splits, cfg, TeacherSet{}, SmdWeights{0, 0});

    auto hs = hierarchies(spec);
    std::vector<OpSplit> splits_log;
    auto children = split_stage(parent, hs[1].edge_indices, splits.train_w, tiny_gm(),
                                &splits_log);
    CHECK(children.size() == 4);
    CHECK(splits_log.size() == 2);

    // children partition the parent architecture set
    std::set<std::string> parent_set = arch_set(parent.region());
    std::set<std::string> child_union;
    std::uint64_t size_sum = 0;
    for (const Supernet& c : children) {
        size_sum += region_size(c.region());
        for (const std::string& enc : arch_set(c.region()))
            CHECK(child_union.insert(enc).second);  // pairwise disjoint
    }
    CHECK(size_sum == region_size(parent.region()));
    CHECK(child_union == parent_set);
}

TEST_CASE("split_stage with one splittable edge yields a binary partition") {
    CellSpec spec = toy_spec(2);
    Supernet parent = Supernet::make(spec, 2, 5);
    DataSplits splits = toy_splits(5);
    auto hs = hierarchies(spec);
    auto children = split_stage(parent, hs[0].edge_indices, splits.train_w, tiny_gm(), nullptr);
    REQUIRE(children.size() == 2);
    std::set<std::string> u = arch_set(children[0].region());
    for (const std::string& enc : arch_set(children[1].region())) CHECK(u.insert(enc).second);
    CHECK(u == arch_set(parent.region()));
}

TEST_CASE("split_stage passes singleton edges through as a single factor") {
    CellSpec spec = toy_spec(3);
    Region r = full_region(spec);
    r.allowed[1] = {OpKind::Skip};  // hierarchy h2 = edges {1, 2}; edge 1 singleton
    Supernet parent(spec, 2, r, 7);
    DataSplits splits = toy_splits(7);
    auto hs = hierarchies(spec);
    auto children = split_stage(parent, hs[1].edge_indices, splits.train_w, tiny_gm(), nullptr);
    CHECK(children.size() == 2);  // only edge 2 splits
    for (const Supernet& c : children)
        CHECK(c.region().allowed[1] == OpSet{OpKind::Skip});
}

TEST_CASE("select_best picks the argmax with lowest-index ties") {
    CellSpec spec = toy_spec(2);
    DataSplits splits = toy_splits(9);
    std::vector<Supernet> singles;
    singles.push_back(Supernet::make(spec, 2, 1));
    CHECK(select_best(singles, splits.valid) == 0);

    // identical supernets tie on accuracy -> index 0
    std::vector<Supernet> twins;
    twins.push_back(Supernet::make(spec, 2, 4));
    twins.push_back(Supernet::make(spec, 2, 4));
    std::vector<double> accs;
    CHECK(select_best(twins, splits.valid, &accs) == 0);
    CHECK(accs[0] == accs[1]);

    CHECK_THROWS_AS(select_best({}, splits.valid), std::invalid_argument);
}

TEST_CASE("run_search on an N=4 cell runs three stages with 2/4/8 children") {
    CellSpec spec = toy_spec(4);
    DataSplits splits = toy_splits(11);
    SearchResult res = run_search(spec, splits, fast_cfg(), tiny_schedule(3), SmdWeights{1, 1},
                                  tiny_gm(), SearchOptions{}, 11);
    REQUIRE(res.stages.size() == 3);
    CHECK(res.stages[0].children.size() <= 2);
    CHECK(res.stages[1].children.size() <= 4);
    CHECK(res.stages[2].children.size() <= 8);
    // fully splittable 3-op palette: exact powers
    CHECK(res.stages[0].children.size() == 2);
    CHECK(res.stages[1].children.size() == 4);
    CHECK(res.stages[2].children.size() == 8);
    CHECK(res.stages[0].label == "h1");
    CHECK(res.stages[2].label == "h3");
    CHECK(res.final_arch.ops.size() == 6);

    // monotone shrinkage along the selected path
    std::uint64_t prev = 729;
    for (const StageLog& s : res.stages) {
        CHECK(s.parent_region_size == prev);
        const ChildLog& sel = s.children[static_cast<std::size_t>(s.selected_index)];
        CHECK(sel.region_size < prev);
        prev = sel.region_size;
    }
    CHECK(region_size(res.final_supernet.region()) == prev);
}

TEST_CASE("run_search validates the schedule length upfront") {
    CellSpec spec = toy_spec(4);
    DataSplits splits = toy_splits(13);
    CHECK_THROWS_WITH_AS(run_search(spec, splits, fast_cfg(), tiny_schedule(2), SmdWeights{1, 1},
                                    tiny_gm(), SearchOptions{}, 1),
                         doctest::Contains("split_epos"), std::invalid_argument);
}

TEST_CASE("run_search is deterministic: identical final arch and stage log") {
    CellSpec spec = toy_spec(3);
    DataSplits splits = toy_splits(15);
    auto run = [&]() {
        return run_search(spec, splits, fast_cfg(), tiny_schedule(2), SmdWeights{1, 1}, tiny_gm(),
                          SearchOptions{}, 42);
    };
    SearchResult a = run();
    SearchResult b = run();
    CHECK(encode(a.final_arch) == encode(b.final_arch));
    REQUIRE(a.stages.size() == b.stages.size());
    for (std::size_t s = 0; s < a.stages.size(); ++s) {
        CHECK(a.stages[s].selected_index == b.stages[s].selected_index);
        REQUIRE(a.stages[s].children.size() == b.stages[s].children.size());
        for (std::size_t c = 0; c < a.stages[s].children.size(); ++c) {
            CHECK(a.stages[s].children[c].region == b.stages[s].children[c].region);
            CHECK(a.stages[s].children[c].val_acc == b.stages[s].children[c].val_acc);
        }
    }
    CHECK(a.final_supernet.param_checksum() == b.final_supernet.param_checksum());
}

TEST_CASE("zero SMD weights reproduce the no-distillation ablation batch-for-batch") {
    CellSpec spec = toy_spec(3);
    DataSplits splits = toy_splits(17);
    SearchOptions with_smd_machinery;  // lambdas (0,0) keep the TeacherSet wiring
    SearchResult a = run_search(spec, splits, fast_cfg(), tiny_schedule(2), SmdWeights{0, 0},
                                tiny_gm(), with_smd_machinery, 7);
    SearchOptions ablated;
    ablated.disable_smd = true;
    SearchResult b = run_search(spec, splits, fast_cfg(), tiny_schedule(2), SmdWeights{1, 1},
                                tiny_gm(), ablated, 7);
    REQUIRE(a.stages.size() == b.stages.size());
    for (std::size_t s = 0; s < a.stages.size(); ++s) {
        REQUIRE(a.stages[s].child_epoch_stats.size() == b.stages[s].child_epoch_stats.size());
        for (std::size_t c = 0; c < a.stages[s].child_epoch_stats.size(); ++c)
            for (std::size_t e = 0; e < a.stages[s].child_epoch_stats[c].size(); ++e) {
                const auto& la = a.stages[s].child_epoch_stats[c][e].weight_batch_losses;
                const auto& lb = b.stages[s].child_epoch_stats[c][e].weight_batch_losses;
                REQUIRE(la.size() == lb.size());
                for (std::size_t i = 0; i < la.size(); ++i)
                    CHECK(std::fabs(la[i] - lb[i]) <= 1e-9);
            }
    }
    CHECK(encode(a.final_arch) == encode(b.final_arch));
}

TEST_CASE("oneshot baseline trains the whole budget without splitting") {
    CellSpec spec = toy_spec(3);
    DataSplits splits = toy_splits(19);
    SearchOptions opt;
    opt.baseline = BaselineMode::OneShot;
    StageSchedule sched = tiny_schedule(2);
    SearchResult res = run_search(spec, splits, fast_cfg(), sched, SmdWeights{1, 1}, tiny_gm(),
                                  opt, 3);
    CHECK(res.stages.empty());
    CHECK(res.final_supernet.epochs_trained() == sched.total_epochs());
    CHECK(region_size(res.final_supernet.region()) == 27);
    CHECK(res.final_arch.ops.size() == 3);
}

TEST_CASE("edgewise baseline splits one edge per stage") {
    CellSpec spec = toy_spec(3);  // 3 edges
    DataSplits splits = toy_splits(21);
    SearchOptions opt;
    opt.baseline = BaselineMode::EdgeWise;
    SearchResult res = run_search(spec, splits, fast_cfg(), tiny_schedule(3), SmdWeights{1, 1},
                                  tiny_gm(), opt, 5);
    REQUIRE(res.stages.size() == 3);
    for (const StageLog& s : res.stages) CHECK(s.children.size() == 2);
    CHECK(res.stages[0].label == "e0");
    CHECK(res.stages[2].label == "e2");
}

TEST_CASE("split order flag reorders the stage groups deterministically") {
    CellSpec spec = toy_spec(4);
    SearchOptions asc, rev, rnd;
    rev.order = SplitOrder::Reverse;
    rnd.order = SplitOrder::Random;
    auto ga = stage_edge_groups(spec, asc, 1);
    auto gr = stage_edge_groups(spec, rev, 1);
    CHECK(ga.size() == 3);
    CHECK(gr.front() == ga.back());
    CHECK(gr.back() == ga.front());
    auto g1 = stage_edge_groups(spec, rnd, 9);
    auto g2 = stage_edge_groups(spec, rnd, 9);
    CHECK(g1 == g2);
}

TEST_CASE("max_stages stops the reduction early") {
    CellSpec spec = toy_spec(4);
    DataSplits splits = toy_splits(23);
    SearchOptions opt;
    opt.max_stages = 1;
    StageSchedule sched = tiny_schedule(3);
    SearchResult res = run_search(spec, splits, fast_cfg(), sched, SmdWeights{1, 1}, tiny_gm(),
                                  opt, 9);
    CHECK(res.stages.size() == 1);
    CHECK(region_size(res.final_supernet.region()) > 1);
    CHECK(res.final_arch.ops.size() == 6);
}
