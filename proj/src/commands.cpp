#include "hepnas/commands.hpp"

#include "hepnas/config.hpp"
#include "hepnas/oracle.hpp"
#include "hepnas/partition_search.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace hepnas {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kArtifactVersion = "hepnas-v1";

std::string fmt_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << text;
}

std::string read_text(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// One manifest line per artifact: enough to reproduce the file exactly.
void write_manifest(const fs::path& dir, const std::vector<std::string>& files,
                    const std::string& config_hash, std::uint64_t seed) {
    std::ostringstream os;
    for (const std::string& f : files)
        os << f << " config_hash=" << config_hash << " seed=" << seed
           << " version=" << kArtifactVersion << "\n";
    write_text(dir / "manifest.txt", os.str());
}

json result_json(const RunConfig& config, const SearchResult& result, std::uint64_t seed) {
    json j;
    j["format"] = "hepnas-result";
    j["version"] = 1;
    j["config"] = config.to_json();
    j["config_hash"] = config.config_hash();
    j["seed"] = seed;
    j["baseline"] = baseline_name(config.mode.baseline);
    j["final_architecture"] = encode(result.final_arch);
    j["final_region"] = region_str(result.final_supernet.region());
    j["final_val_acc"] = result.final_val_acc;
    j["total_epochs"] = result.final_supernet.epochs_trained();
    json stages = json::array();
    for (const StageLog& s : result.stages) {
        json stage;
        stage["stage"] = s.stage;
        stage["label"] = s.label;
        stage["parent_region_size"] = s.parent_region_size;
        stage["selected_index"] = s.selected_index;
        json children = json::array();
        for (const ChildLog& c : s.children)
            children.push_back(json{{"region", c.region},
                                    {"region_size", c.region_size},
                                    {"val_acc", c.val_acc},
                                    {"selected", c.selected}});
        stage["children"] = children;
        stages.push_back(stage);
    }
    j["stages"] = stages;
    return j;
}

std::string search_log_csv(const SearchResult& result) {
    std::ostringstream os;
    os << "stage,child_id,region,region_size,val_acc,selected\n";
    for (const StageLog& s : result.stages)
        for (std::size_t c = 0; c < s.children.size(); ++c)
            os << s.stage << ',' << c << ',' << s.children[c].region << ','
               << s.children[c].region_size << ',' << fmt_double(s.children[c].val_acc) << ','
               << (s.children[c].selected ? 1 : 0) << '\n';
    return os.str();
}

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

SearchResult run_configured_search(const RunConfig& config, std::uint64_t seed) {
    const DataSplits splits = config.make_splits();
    SearchOptions options;
    options.order = config.mode.split_order;
    options.baseline = config.mode.baseline;
    options.max_stages = config.mode.max_stages;
    return run_search(config.space, splits, config.train, config.schedule, config.smd,
                      config.grouping, options, seed);
}

}  // namespace

int default_workers() {
    if (const char* env = std::getenv("HEPNAS_WORKERS")) {
        int w = std::atoi(env);
        if (w > 0) return w;
    }
    return 1;
}

int cmd_search(const std::string& config_path, std::optional<std::uint64_t> seed_override,
               const std::string& out_dir) {
    return run_guarded([&]() {
        RunConfig config = RunConfig::load(config_path);
        if (seed_override) config.seed = *seed_override;
        config.validate();

        const SearchResult result = run_configured_search(config, config.seed);

        fs::create_directories(out_dir);
        const fs::path dir(out_dir);
        write_text(dir / "result.json", result_json(config, result, config.seed).dump(2) + "\n");
        write_text(dir / "search_log.csv", search_log_csv(result));
        result.final_supernet.save((dir / "final_supernet.json").string());
        write_manifest(dir, {"result.json", "search_log.csv", "final_supernet.json"},
                       config.config_hash(), config.seed);
        return 0;
    });
}

int cmd_oracle(const std::string& config_path, const std::string& out_dir, bool resume,
               int workers) {
    return run_guarded([&]() {
        RunConfig config = RunConfig::load(config_path);
        config.validate();

        const Region region = full_region(config.space);
        if (region_size(region) > config.oracle.cap)
            throw ConfigError("oracle.cap",
                              "region has " + std::to_string(region_size(region)) +
                                  " architectures, above the cap of " +
                                  std::to_string(config.oracle.cap) +
                                  "; shrink the palette or raise the cap");

        const DataSplits splits = config.make_splits();
        fs::create_directories(out_dir);
        const fs::path dir(out_dir);
        const fs::path table_path = dir / "oracle_table.csv";
        const fs::path meta_path = dir / "oracle_meta.json";

        OracleTable existing;
        bool have_existing = false;
        if (resume && fs::exists(table_path)) {
            if (fs::exists(meta_path)) {
                json meta = json::parse(read_text(meta_path));
                if (meta.at("config_hash") != config.config_hash())
                    throw ConfigError("(oracle)",
                                      "existing table was built from a different config; "
                                      "remove " + table_path.string() + " or match the config");
            }
            existing = read_oracle_csv(table_path.string(), config.space, region);
            have_existing = true;
        }

        // Meta first, then append rows as they finish; a crashed run resumes
        // from whatever landed on disk. The table is rewritten sorted at the
        // end.
        json meta;
        meta["format"] = "hepnas-oracle-meta";
        meta["version"] = 1;
        meta["config"] = config.to_json();
        meta["config_hash"] = config.config_hash();
        meta["base_seed"] = config.seed;
        meta["rows"] = region_size(region);
        write_text(meta_path, meta.dump(2) + "\n");

        std::ofstream append_log;
        if (have_existing) {
            append_log.open(table_path, std::ios::app);
        } else {
            append_log.open(table_path);
            append_log << "arch_id,encoding,seed,test_acc\n";
        }
        auto progress = [](std::size_t done, std::size_t total) {
            if (done == total || done % 50 == 0)
                std::cerr << "oracle: " << done << "/" << total << " architectures\n";
        };
        auto row_sink = [&append_log](const OracleTable::Row& row) {
            append_log << row.arch_id << ',' << row.encoding << ',' << row.seed << ','
                       << fmt_double(row.test_acc) << '\n';
            append_log.flush();
        };
        const OracleTable table =
            build_table(config.space, region, splits, config.oracle, config.seed,
                        have_existing ? &existing : nullptr, workers, progress, row_sink);
        append_log.close();

        write_oracle_csv(table, table_path.string());
        write_manifest(dir, {"oracle_table.csv", "oracle_meta.json"}, config.config_hash(),
                       config.seed);
        return 0;
    });
}

int cmd_report(const std::string& search_dir, const std::string& oracle_dir,
               const std::string& out_dir) {
    return run_guarded([&]() {
        const fs::path sdir(search_dir), odir(oracle_dir);
        if (!fs::exists(sdir / "result.json"))
            throw ConfigError("(report)", "missing " + (sdir / "result.json").string());
        if (!fs::exists(odir / "oracle_table.csv"))
            throw ConfigError("(report)", "missing " + (odir / "oracle_table.csv").string());
        if (!fs::exists(sdir / "final_supernet.json"))
            throw ConfigError("(report)", "missing " + (sdir / "final_supernet.json").string());

        const json result = json::parse(read_text(sdir / "result.json"));
        const RunConfig config = RunConfig::from_json(result.at("config"));
        config.validate();

        if (fs::exists(odir / "oracle_meta.json")) {
            const json meta = json::parse(read_text(odir / "oracle_meta.json"));
            const json oracle_config = meta.at("config");
            if (oracle_config.at("dataset") != config.to_json().at("dataset") ||
                oracle_config.at("space") != config.to_json().at("space"))
                throw ConfigError("(report)",
                                  "oracle table was built on a different dataset/space");
        }

        const Supernet final_supernet = Supernet::load((sdir / "final_supernet.json").string());
        const Region oracle_region = full_region(config.space);
        const OracleTable table =
            read_oracle_csv((odir / "oracle_table.csv").string(), config.space, oracle_region);
        if (table.rows.size() != region_size(oracle_region))
            throw ConfigError("(report)", "oracle table has " + std::to_string(table.rows.size()) +
                                              " rows, expected " +
                                              std::to_string(region_size(oracle_region)));
        if (!region_subset(final_supernet.region(), oracle_region))
            throw ConfigError("(report)", "final region is not contained in the table region");

        const DataSplits splits = config.make_splits();
        const std::vector<ArchEstimate> estimates =
            extract_estimates(final_supernet, splits.valid, table);
        const Architecture selected =
            decode(result.at("final_architecture").get<std::string>(), config.space);
        const RankReport report = rank_report(selected, estimates, table);

        fs::create_directories(out_dir);
        const fs::path dir(out_dir);

        json rj;
        rj["format"] = "hepnas-rank-report";
        rj["version"] = 1;
        if (report.spearman_rho)
            rj["spearman"] = *report.spearman_rho;
        else
            rj["spearman"] = nullptr;
        rj["selected_encoding"] = report.selected_encoding;
        rj["selected_oracle_acc"] = report.selected_oracle_acc;
        rj["oracle_best_acc"] = report.oracle_best_acc;
        rj["regret"] = report.regret;
        rj["percentile"] = report.percentile;
        rj["n_estimates"] = report.n_estimates;
        write_text(dir / "rank_report.json", rj.dump(2) + "\n");

        std::ostringstream est_csv;
        est_csv << "encoding,estimate,oracle_acc\n";
        for (const ArchEstimate& e : estimates)
            est_csv << e.encoding << ',' << fmt_double(e.estimate) << ','
                    << fmt_double(e.oracle_acc) << '\n';
        write_text(dir / "estimates.csv", est_csv.str());

        // Per-stage shrinkage and accuracy-distribution summary.
        std::ostringstream stage_csv;
        stage_csv << "stage,label,parent_region_size,selected_region_size,n_children,"
                     "val_acc_min,val_acc_mean,val_acc_max,selected_val_acc\n";
        for (const json& s : result.at("stages")) {
            const json& children = s.at("children");
            double mn = 1.0, mx = 0.0, mean = 0.0, sel_acc = 0.0;
            std::uint64_t sel_size = 0;
            for (const json& c : children) {
                const double acc = c.at("val_acc").get<double>();
                mn = std::min(mn, acc);
                mx = std::max(mx, acc);
                mean += acc;
                if (c.at("selected").get<bool>()) {
                    sel_acc = acc;
                    sel_size = c.at("region_size").get<std::uint64_t>();
                }
            }
            if (!children.empty()) mean /= static_cast<double>(children.size());
            stage_csv << s.at("stage").get<int>() << ',' << s.at("label").get<std::string>() << ','
                      << s.at("parent_region_size").get<std::uint64_t>() << ',' << sel_size << ','
                      << children.size() << ',' << fmt_double(mn) << ',' << fmt_double(mean) << ','
                      << fmt_double(mx) << ',' << fmt_double(sel_acc) << '\n';
        }
        write_text(dir / "stage_summary.csv", stage_csv.str());

        write_manifest(dir, {"rank_report.json", "estimates.csv", "stage_summary.csv"},
                       config.config_hash(), result.at("seed").get<std::uint64_t>());
        return 0;
    });
}

int cmd_ablate(const std::string& config_path, const std::string& grid,
               const std::string& out_dir, int num_seeds,
               const std::optional<std::string>& oracle_dir) {
    return run_guarded([&]() {
        RunConfig base = RunConfig::load(config_path);
        base.validate();
        if (grid != "smd" && grid != "order" && grid != "hierarchies")
            throw ConfigError("(ablate)", "grid must be smd|order|hierarchies, got '" + grid +
                                              "'");
        if (num_seeds < 1) throw ConfigError("(ablate)", "--seeds must be >= 1");

        std::optional<OracleTable> table;
        if (oracle_dir) {
            const fs::path opath = fs::path(*oracle_dir) / "oracle_table.csv";
            if (!fs::exists(opath)) throw ConfigError("(ablate)", "missing " + opath.string());
            table = read_oracle_csv(opath.string(), base.space, full_region(base.space));
        }

        struct Variant {
            std::string name;
            RunConfig config;
        };
        std::vector<Variant> variants;
        if (grid == "smd") {
            const std::pair<const char*, SmdWeights> cells[4] = {
                {"none", {0.0, 0.0}},
                {"prev", {1.0, 0.0}},
                {"peer", {0.0, 1.0}},
                {"both", {1.0, 1.0}},
            };
            for (const auto& [name, weights] : cells) {
                RunConfig c = base;
                c.smd = weights;
                variants.push_back({name, c});
            }
        } else if (grid == "order") {
            for (SplitOrder o :
                 {SplitOrder::Ascending, SplitOrder::Reverse, SplitOrder::Random}) {
                RunConfig c = base;
                c.mode.split_order = o;
                variants.push_back({split_order_name(o), c});
            }
        } else {
            for (int k = 1; k <= base.space.intermediate_count(); ++k) {
                RunConfig c = base;
                c.mode.max_stages = k;
                variants.push_back({"stages_" + std::to_string(k), c});
            }
        }

        std::ostringstream csv;
        csv << "grid,variant,seed,final_architecture,final_val_acc,oracle_test_acc\n";
        for (const Variant& v : variants) {
            for (int s = 0; s < num_seeds; ++s) {
                const std::uint64_t seed = base.seed + static_cast<std::uint64_t>(s);
                const SearchResult result = run_configured_search(v.config, seed);
                std::string oracle_acc;
                if (table) {
                    const OracleTable::Row* row = table->find(encode(result.final_arch));
                    if (!row)
                        throw std::runtime_error("ablate: " + encode(result.final_arch) +
                                                 " missing from the oracle table");
                    oracle_acc = fmt_double(row->test_acc);
                }
                csv << grid << ',' << v.name << ',' << seed << ',' << encode(result.final_arch)
                    << ',' << fmt_double(result.final_val_acc) << ',' << oracle_acc << '\n';
                std::cerr << "ablate: " << v.name << " seed " << seed << " done\n";
            }
        }

        fs::create_directories(out_dir);
        write_text(fs::path(out_dir) / "ablate.csv", csv.str());
        write_manifest(fs::path(out_dir), {"ablate.csv"}, base.config_hash(), base.seed);
        return 0;
    });
}

}  // namespace hepnas
