#include "hepnas/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hepnas {

Dataset Dataset::take(const std::vector<std::size_t>& rows) const {
    const std::size_t d = dim();
    Dataset out;
    out.inputs = Tensor({rows.size(), d});
    out.labels.reserve(rows.size());
    out.classes = classes;
    out.seed = seed;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t r = rows[i];
        std::copy_n(&inputs.data[r * d], d, &out.inputs.data[i * d]);
        out.labels.push_back(labels[r]);
    }
    return out;
}

void SplitSpec::validate() const {
    const double parts[4] = {train_w, train_alpha, valid, test};
    double sum = 0.0;
    for (double p : parts) {
        if (p <= 0.0)
            throw std::invalid_argument("SplitSpec: every fraction must be positive");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("SplitSpec: fractions sum to " + std::to_string(sum) +
                                    ", expected 1");
}

Dataset gen_blobs(std::uint64_t seed, std::size_t n, std::size_t d, int classes, double spread) {
    if (classes < 2) throw std::invalid_argument("gen_blobs: need classes >= 2");
    if (d < 2) throw std::invalid_argument("gen_blobs: need d >= 2");
    if (n < 4 * static_cast<std::size_t>(classes))
        throw std::invalid_argument("gen_blobs: need n >= 4*classes");
    if (spread <= 0.0) throw std::invalid_argument("gen_blobs: need spread > 0");

    Rng rng(mix_seed(seed, 0xB10B5));
    // Fixed per-seed centers, redrawn until pairwise distance >= 1.
    std::vector<std::vector<double>> centers;
    while (centers.size() < static_cast<std::size_t>(classes)) {
        std::vector<double> c(d);
        for (double& v : c) v = rng.uniform(-2.0, 2.0);
        bool ok = true;
        for (const auto& prev : centers) {
            double dist_sq = 0.0;
            for (std::size_t j = 0; j < d; ++j) dist_sq += (c[j] - prev[j]) * (c[j] - prev[j]);
            if (dist_sq < 1.0) {
                ok = false;
                break;
            }
        }
        if (ok) centers.push_back(std::move(c));
    }

    Dataset ds;
    ds.inputs = Tensor({n, d});
    ds.labels.resize(n);
    ds.classes = classes;
    ds.seed = seed;
    for (std::size_t i = 0; i < n; ++i) {
        const int c = static_cast<int>(i % static_cast<std::size_t>(classes));
        ds.labels[i] = c;
        for (std::size_t j = 0; j < d; ++j)
            ds.inputs.data[i * d + j] = centers[c][j] + spread * rng.normal();
    }
    return ds;
}

Dataset gen_spirals(std::uint64_t seed, std::size_t n, int classes, double noise) {
    if (classes < 2) throw std::invalid_argument("gen_spirals: need classes >= 2");
    if (n < 4 * static_cast<std::size_t>(classes))
        throw std::invalid_argument("gen_spirals: need n >= 4*classes");
    if (noise < 0.0) throw std::invalid_argument("gen_spirals: need noise >= 0");

    Rng rng(mix_seed(seed, 0x5917A1));
    const std::size_t d = 2;
    Dataset ds;
    ds.inputs = Tensor({n, d});
    ds.labels.resize(n);
    ds.classes = classes;
    ds.seed = seed;

    std::vector<std::size_t> arm_count(classes, 0);
    std::vector<std::size_t> arm_total(classes, 0);
    for (std::size_t i = 0; i < n; ++i) arm_total[i % classes]++;
    for (std::size_t i = 0; i < n; ++i) {
        const int c = static_cast<int>(i % static_cast<std::size_t>(classes));
        const double u = (static_cast<double>(arm_count[c]) + 0.5) /
                         static_cast<double>(arm_total[c]);
        arm_count[c]++;
        // inner radius offset keeps the arms apart near the origin
        const double r = 0.2 + 0.8 * u;
        const double theta = 4.0 * (static_cast<double>(c) + u) + noise * rng.normal();
        ds.inputs.data[i * d + 0] = r * std::sin(theta);
        ds.inputs.data[i * d + 1] = r * std::cos(theta);
        ds.labels[i] = c;
    }
    return ds;
}

DataSplits split(const Dataset& ds, const SplitSpec& spec) {
    spec.validate();
    const int C = ds.classes;
    std::vector<std::vector<std::size_t>> by_class(C);
    for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);

    Rng rng(mix_seed(spec.shuffle_seed, 0x5137ULL));
    std::vector<std::vector<std::size_t>> parts(4);
    const double cum[4] = {spec.train_w, spec.train_w + spec.train_alpha,
                           spec.train_w + spec.train_alpha + spec.valid, 1.0};
    for (int c = 0; c < C; ++c) {
        auto& rows = by_class[c];
        rng.shuffle(rows);
        const std::size_t m = rows.size();
        std::size_t prev = 0;
        for (int p = 0; p < 4; ++p) {
            std::size_t bound = (p == 3) ? m
                                         : static_cast<std::size_t>(
                                               std::llround(cum[p] * static_cast<double>(m)));
            bound = std::min(bound, m);
            for (std::size_t i = prev; i < bound; ++i) parts[p].push_back(rows[i]);
            prev = bound;
        }
    }
    for (int p = 0; p < 4; ++p)
        if (parts[p].empty())
            throw std::invalid_argument("split: fraction " + std::to_string(p) +
                                        " produced an empty part");
    return DataSplits{ds.take(parts[0]), ds.take(parts[1]), ds.take(parts[2]), ds.take(parts[3])};
}

namespace {

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

void write_dataset_csv(const Dataset& ds, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_dataset_csv: cannot open " + path);
    const std::size_t d = ds.dim();
    for (std::size_t j = 0; j < d; ++j) f << 'f' << j << ',';
    f << "label\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) f << format_double(ds.inputs.data[i * d + j]) << ',';
        f << ds.labels[i] << '\n';
    }
}

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_dataset_csv: cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("read_dataset_csv: empty file " + path);
    std::size_t d = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) ;
    std::vector<double> values;
    std::vector<int> labels;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            if (col < d)
                values.push_back(std::stod(cell));
            else
                labels.push_back(std::stoi(cell));
            ++col;
        }
        if (col != d + 1)
            throw std::runtime_error("read_dataset_csv: row with " + std::to_string(col) +
                                     " columns, expected " + std::to_string(d + 1));
    }
    Dataset ds;
    ds.inputs = Tensor({labels.size(), d}, std::move(values));
    ds.labels = std::move(labels);
    ds.classes = ds.labels.empty() ? 0 : *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
    return ds;
}

}  // namespace hepnas
