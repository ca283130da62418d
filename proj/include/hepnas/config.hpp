#pragma once

#include "hepnas/dataset.hpp"
#include "hepnas/oracle.hpp"
#include "hepnas/partition_search.hpp"

#include <json.hpp>

#include <string>

namespace hepnas {

// Validation failure carrying the dotted path of the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& msg)
        : std::runtime_error(field + ": " + msg), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct DatasetConfig {
    std::string generator = "spirals";  // "spirals" or "blobs"
    std::uint64_t seed = 1;
    std::size_t n = 600;
    std::size_t d = 2;
    int classes = 3;
    double spread = 0.3;  // blobs
    double noise = 0.2;   // spirals
    std::vector<double> split_fractions = {0.35, 0.35, 0.15, 0.15};
    std::uint64_t split_seed = 7;
};

struct ModeConfig {
    SplitOrder split_order = SplitOrder::Ascending;
    BaselineMode baseline = BaselineMode::HepNas;
    int max_stages = 0;  // 0 = all stages
};

// Full run configuration. Parsed from JSON with strict unknown-key
// rejection; every cross-field constraint is checked before any work.
struct RunConfig {
    std::uint64_t seed = 1;
    DatasetConfig dataset;
    CellSpec space{4, 8, 3, {OpKind::Zero, OpKind::Skip, OpKind::AffineRelu}};
    TrainConfig train;
    StageSchedule schedule{{10, 20, 30}, 5, 1};
    SmdWeights smd{1.0, 1.0};
    GmConfig grouping{4, 32, 0};
    ModeConfig mode;
    OracleTrainConfig oracle;

    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::string& path);
    nlohmann::json to_json() const;  // all fields materialized
    void validate() const;           // throws ConfigError

    DataSplits make_splits() const;
    std::string config_hash() const;  // 16 hex chars over the canonical dump
};

}  // namespace hepnas
