#include "hepnas/commands.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <optional>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"hepnas: hierarchy-wise supernet partition search with an exact oracle"};
    app.require_subcommand(1);

    // search
    std::string search_config, search_out = "search_out";
    std::optional<std::uint64_t> seed_override;
    std::uint64_t seed_value = 0;
    auto* search = app.add_subcommand("search", "run the partition search");
    search->add_option("config", search_config, "run config JSON")->required();
    auto* seed_opt = search->add_option("--seed", seed_value, "override the config seed");
    search->add_option("--out", search_out, "output directory");

    // oracle
    std::string oracle_config, oracle_out = "oracle_out";
    bool resume = false;
    int workers = hepnas::default_workers();
    auto* oracle = app.add_subcommand("oracle", "build the exhaustive ground-truth table");
    oracle->add_option("config", oracle_config, "run config JSON")->required();
    oracle->add_option("--out", oracle_out, "output directory");
    oracle->add_flag("--resume", resume, "reuse rows from an existing table");
    oracle->add_option("--workers", workers, "parallel training workers");

    // report
    std::string report_search, report_oracle, report_out = "report_out";
    auto* report = app.add_subcommand("report", "ranking quality and regret vs the oracle");
    report->add_option("--search", report_search, "search output directory")->required();
    report->add_option("--oracle", report_oracle, "oracle output directory")->required();
    report->add_option("--out", report_out, "output directory");

    // ablate
    std::string ablate_config, ablate_grid, ablate_out = "ablate_out";
    int num_seeds = 1;
    std::string ablate_oracle;
    auto* ablate = app.add_subcommand("ablate", "run an ablation grid with shared seeds");
    ablate->add_option("config", ablate_config, "run config JSON")->required();
    ablate->add_option("--grid", ablate_grid, "smd|order|hierarchies")->required();
    ablate->add_option("--out", ablate_out, "output directory");
    ablate->add_option("--seeds", num_seeds, "number of shared seeds");
    ablate->add_option("--oracle", ablate_oracle, "oracle dir for ground-truth lookups");

    CLI11_PARSE(app, argc, argv);

    if (search->parsed()) {
        if (seed_opt->count() > 0) seed_override = seed_value;
        return hepnas::cmd_search(search_config, seed_override, search_out);
    }
    if (oracle->parsed()) return hepnas::cmd_oracle(oracle_config, oracle_out, resume, workers);
    if (report->parsed()) return hepnas::cmd_report(report_search, report_oracle, report_out);
    if (ablate->parsed())
        return hepnas::cmd_ablate(ablate_config, ablate_grid, ablate_out, num_seeds,
                                  ablate_oracle.empty()
                                      ? std::nullopt
                                      : std::optional<std::string>(ablate_oracle));
    return 1;
}
