#include "hepnas/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace hepnas {

void OracleTrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("OracleTrainConfig: epochs must be >= 1");
    if (lr <= 0 || lr_min <= 0 || lr_min > lr)
        throw std::invalid_argument("OracleTrainConfig: bad learning rates");
    if (batch_size == 0) throw std::invalid_argument("OracleTrainConfig: batch_size must be >= 1");
}

const OracleTable::Row* OracleTable::find(const std::string& encoding) const {
    for (const Row& r : rows)
        if (r.encoding == encoding) return &r;
    return nullptr;
}

double OracleTable::best_acc() const {
    double best = 0.0;
    for (const Row& r : rows) best = std::max(best, r.test_acc);
    return best;
}

namespace {

Dataset concat(const Dataset& a, const Dataset& b) {
    const std::size_t d = a.dim();
    Dataset out;
    out.classes = a.classes;
    out.seed = a.seed;
    out.inputs = Tensor({a.size() + b.size(), d});
    std::copy(a.inputs.data.begin(), a.inputs.data.end(), out.inputs.data.begin());
    std::copy(b.inputs.data.begin(), b.inputs.data.end(),
              out.inputs.data.begin() + static_cast<std::ptrdiff_t>(a.inputs.data.size()));
    out.labels = a.labels;
    out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
    return out;
}

Region singleton_region(const Architecture& arch) {
    Region r;
    for (OpKind op : arch.ops) r.allowed.push_back(OpSet{op});
    return r;
}

}  // namespace

double train_standalone(const Architecture& arch, const CellSpec& spec, const DataSplits& splits,
                        const OracleTrainConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const Dataset train = concat(splits.train_w, splits.train_alpha);
    Supernet net(spec, train.dim(), singleton_region(arch), seed);
    net.sgd_state().momentum = cfg.momentum;
    net.sgd_state().weight_decay = cfg.weight_decay;
    net.sgd_state().clip_norm = cfg.clip_norm;

    const std::size_t n = train.size();
    const std::size_t d = train.dim();
    std::vector<std::size_t> order(n);
    std::vector<int> labels;
    for (long epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cosine_lr(cfg.lr, cfg.lr_min, epoch, cfg.epochs);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        Rng rng(mix_seed(seed, 0xBA7C + static_cast<std::uint64_t>(epoch)));
        rng.shuffle(order);
        for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
            const std::size_t end = std::min(begin + cfg.batch_size, n);
            Tensor x({end - begin, d});
            labels.clear();
            for (std::size_t i = begin; i < end; ++i) {
                const std::size_t r = order[i];
                std::copy_n(&train.inputs.data[r * d], d, &x.data[(i - begin) * d]);
                labels.push_back(train.labels[r]);
            }
            net.weight_step(x, labels, &arch, TeacherSet{}, SmdWeights{0.0, 0.0}, lr);
        }
    }
    return net.eval_accuracy_path(splits.test, arch);
}

OracleTable build_table(const CellSpec& spec, const Region& region, const DataSplits& splits,
                        const OracleTrainConfig& cfg, std::uint64_t base_seed,
                        const OracleTable* existing, int workers,
                        const std::function<void(std::size_t, std::size_t)>& progress,
                        const std::function<void(const OracleTable::Row&)>& row_sink) {
    cfg.validate();
    const std::vector<Architecture> archs = enumerate_archs(region, cfg.cap);

    OracleTable table;
    table.spec = spec;
    table.region = region;
    table.base_seed = base_seed;
    table.rows.resize(archs.size());

    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < archs.size(); ++i) {
        OracleTable::Row& row = table.rows[i];
        row.arch_id = i;
        row.encoding = encode(archs[i]);
        row.seed = base_seed ^ static_cast<std::uint64_t>(i);
        const OracleTable::Row* prev = existing ? existing->find(row.encoding) : nullptr;
        if (prev && prev->seed == row.seed)
            row.test_acc = prev->test_acc;
        else
            todo.push_back(i);
    }

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex sink_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= todo.size()) return;
            const std::size_t i = todo[t];
            table.rows[i].test_acc =
                train_standalone(archs[i], spec, splits, cfg, table.rows[i].seed);
            const std::size_t d = done.fetch_add(1) + 1;
            if (progress || row_sink) {
                std::lock_guard<std::mutex> lock(sink_mutex);
                if (row_sink) row_sink(table.rows[i]);
                if (progress) progress(d, todo.size());
            }
        }
    };
    const int n_workers = std::max(1, workers);
    if (n_workers == 1 || todo.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return table;
}

namespace {

std::string fmt_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

void write_oracle_csv(const OracleTable& table, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_oracle_csv: cannot open " + path);
    f << "arch_id,encoding,seed,test_acc\n";
    for (const auto& r : table.rows)
        f << r.arch_id << ',' << r.encoding << ',' << r.seed << ',' << fmt_double(r.test_acc)
          << '\n';
}

OracleTable read_oracle_csv(const std::string& path, const CellSpec& spec, const Region& region) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_oracle_csv: cannot open " + path);
    std::string line;
    if (!std::getline(f, line) || line != "arch_id,encoding,seed,test_acc")
        throw std::runtime_error("read_oracle_csv: bad header in " + path);
    OracleTable table;
    table.spec = spec;
    table.region = region;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string id_s, enc, seed_s, acc_s;
        if (!std::getline(ss, id_s, ',') || !std::getline(ss, enc, ',') ||
            !std::getline(ss, seed_s, ',') || !std::getline(ss, acc_s, ','))
            throw std::runtime_error("read_oracle_csv: malformed row: " + line);
        OracleTable::Row row;
        row.arch_id = std::stoull(id_s);
        row.encoding = enc;
        row.seed = std::stoull(seed_s);
        row.test_acc = std::stod(acc_s);
        table.rows.push_back(std::move(row));
    }
    std::sort(table.rows.begin(), table.rows.end(),
              [](const auto& a, const auto& b) { return a.arch_id < b.arch_id; });
    return table;
}

namespace {

// Average ranks (1-based) with ties sharing the mean rank of their run.
std::vector<double> rank_with_ties(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&xs](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[idx[j + 1]] == xs[idx[i]]) ++j;
        const double mean_rank = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size())
        throw std::invalid_argument("spearman: length mismatch " + std::to_string(xs.size()) +
                                    " vs " + std::to_string(ys.size()));
    if (xs.size() < 2) throw std::invalid_argument("spearman: need at least 2 points");
    const std::vector<double> rx = rank_with_ties(xs);
    const std::vector<double> ry = rank_with_ties(ys);
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = rx[i] - mx;
        const double dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw std::domain_error("spearman: undefined, an input has zero rank variance");
    return sxy / std::sqrt(sxx * syy);
}

std::vector<ArchEstimate> extract_estimates(const Supernet& final_supernet, const Dataset& valid,
                                            const OracleTable& table) {
    if (!region_subset(final_supernet.region(), table.region))
        throw std::invalid_argument(
            "extract_estimates: final region is not contained in the oracle table region");
    std::vector<ArchEstimate> out;
    for (const Architecture& arch : enumerate_archs(final_supernet.region())) {
        ArchEstimate est;
        est.encoding = encode(arch);
        est.estimate = final_supernet.eval_accuracy_path(valid, arch);
        const OracleTable::Row* row = table.find(est.encoding);
        if (!row)
            throw std::runtime_error("extract_estimates: " + est.encoding + " missing from table");
        est.oracle_acc = row->test_acc;
        out.push_back(std::move(est));
    }
    return out;
}

RankReport rank_report(const Architecture& selected, const std::vector<ArchEstimate>& estimates,
                       const OracleTable& table) {
    RankReport report;
    report.n_estimates = estimates.size();
    report.selected_encoding = encode(selected);

    const OracleTable::Row* row = table.find(report.selected_encoding);
    if (!row)
        throw std::invalid_argument("rank_report: selected architecture " +
                                    report.selected_encoding + " not in the oracle table");
    report.selected_oracle_acc = row->test_acc;
    report.oracle_best_acc = table.best_acc();
    report.regret = report.oracle_best_acc - report.selected_oracle_acc;

    std::size_t strictly_better = 0;
    for (const auto& r : table.rows)
        if (r.test_acc > row->test_acc) ++strictly_better;
    report.percentile =
        1.0 - static_cast<double>(strictly_better) / static_cast<double>(table.rows.size());

    if (estimates.size() >= 2) {
        std::vector<double> est, orc;
        for (const auto& e : estimates) {
            est.push_back(e.estimate);
            orc.push_back(e.oracle_acc);
        }
        bool est_varies = false, orc_varies = false;
        for (std::size_t i = 1; i < est.size(); ++i) {
            est_varies |= est[i] != est[0];
            orc_varies |= orc[i] != orc[0];
        }
        if (est_varies && orc_varies) report.spearman_rho = spearman(est, orc);
    }
    return report;
}

}  // namespace hepnas
