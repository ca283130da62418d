#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace hepnas {

// CLI entry points. Exit codes: 0 success, 2 validation/input failure with a
// field-precise message on stderr, 1 unexpected runtime failure.
// No command mutates its input files.

int cmd_search(const std::string& config_path, std::optional<std::uint64_t> seed_override,
               const std::string& out_dir);

int cmd_oracle(const std::string& config_path, const std::string& out_dir, bool resume,
               int workers);

int cmd_report(const std::string& search_dir, const std::string& oracle_dir,
               const std::string& out_dir);

int cmd_ablate(const std::string& config_path, const std::string& grid,
               const std::string& out_dir, int num_seeds,
               const std::optional<std::string>& oracle_dir);

// --workers fallback: HEPNAS_WORKERS, else 1.
int default_workers();

}  // namespace hepnas
