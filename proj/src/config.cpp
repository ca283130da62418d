#include "hepnas/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace hepnas {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::string& prefix,
                         const std::set<std::string>& known) {
    if (!j.is_object())
        throw ConfigError(prefix.empty() ? "(root)" : prefix, "expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!known.count(key))
            throw ConfigError(prefix.empty() ? key : prefix + "." + key, "unknown key");
    }
}

template <class T>
void get_to(const json& j, const char* key, const std::string& prefix, T& out) {
    if (!j.contains(key)) return;
    try {
        j.at(key).get_to(out);
    } catch (const json::exception& e) {
        throw ConfigError(prefix + "." + key, std::string("bad value: ") + e.what());
    }
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    reject_unknown_keys(j, "", {"seed", "dataset", "space", "train", "schedule", "smd",
                                "grouping", "mode", "oracle"});
    get_to(j, "seed", "", c.seed);

    if (j.contains("dataset")) {
        const json& d = j.at("dataset");
        reject_unknown_keys(d, "dataset",
                            {"generator", "seed", "n", "d", "classes", "spread", "noise",
                             "split_fractions", "split_seed"});
        get_to(d, "generator", "dataset", c.dataset.generator);
        get_to(d, "seed", "dataset", c.dataset.seed);
        get_to(d, "n", "dataset", c.dataset.n);
        get_to(d, "d", "dataset", c.dataset.d);
        get_to(d, "classes", "dataset", c.dataset.classes);
        get_to(d, "spread", "dataset", c.dataset.spread);
        get_to(d, "noise", "dataset", c.dataset.noise);
        get_to(d, "split_fractions", "dataset", c.dataset.split_fractions);
        get_to(d, "split_seed", "dataset", c.dataset.split_seed);
    }
    if (j.contains("space")) {
        const json& s = j.at("space");
        reject_unknown_keys(s, "space", {"nodes", "width", "classes", "palette"});
        get_to(s, "nodes", "space", c.space.nodes);
        get_to(s, "width", "space", c.space.width);
        if (s.contains("classes")) get_to(s, "classes", "space", c.space.classes);
        if (s.contains("palette")) {
            std::vector<std::string> names;
            get_to(s, "palette", "space", names);
            c.space.palette.clear();
            for (const std::string& name : names) {
                auto op = op_from_name(name);
                if (!op) throw ConfigError("space.palette", "unknown op '" + name + "'");
                c.space.palette.push_back(*op);
            }
            try {
                c.space.palette = canonical_palette(c.space.palette);
            } catch (const std::exception& e) {
                throw ConfigError("space.palette", e.what());
            }
        }
    }
    if (j.contains("train")) {
        const json& t = j.at("train");
        reject_unknown_keys(t, "train",
                            {"lr_w", "lr_w_min", "momentum", "weight_decay_w", "clip_norm",
                             "lr_alpha", "betas_alpha", "weight_decay_alpha", "batch_size",
                             "alpha_freeze_epochs"});
        get_to(t, "lr_w", "train", c.train.lr_w);
        get_to(t, "lr_w_min", "train", c.train.lr_w_min);
        get_to(t, "momentum", "train", c.train.momentum);
        get_to(t, "weight_decay_w", "train", c.train.weight_decay_w);
        get_to(t, "clip_norm", "train", c.train.clip_norm);
        get_to(t, "lr_alpha", "train", c.train.lr_alpha);
        if (t.contains("betas_alpha")) {
            std::vector<double> betas;
            get_to(t, "betas_alpha", "train", betas);
            if (betas.size() != 2) throw ConfigError("train.betas_alpha", "expected two values");
            c.train.beta1_alpha = betas[0];
            c.train.beta2_alpha = betas[1];
        }
        get_to(t, "weight_decay_alpha", "train", c.train.weight_decay_alpha);
        get_to(t, "batch_size", "train", c.train.batch_size);
        get_to(t, "alpha_freeze_epochs", "train", c.train.alpha_freeze_epochs);
    }
    if (j.contains("schedule")) {
        const json& s = j.at("schedule");
        reject_unknown_keys(s, "schedule", {"split_epos", "warm_epo", "warm_decay"});
        get_to(s, "split_epos", "schedule", c.schedule.split_epos);
        get_to(s, "warm_epo", "schedule", c.schedule.warm_epo);
        get_to(s, "warm_decay", "schedule", c.schedule.warm_decay);
    }
    if (j.contains("smd")) {
        const json& s = j.at("smd");
        reject_unknown_keys(s, "smd", {"lambda_prev", "lambda_peer"});
        get_to(s, "lambda_prev", "smd", c.smd.lambda_prev);
        get_to(s, "lambda_peer", "smd", c.smd.lambda_peer);
    }
    if (j.contains("grouping")) {
        const json& g = j.at("grouping");
        reject_unknown_keys(g, "grouping", {"batch_count", "batch_size", "seed"});
        get_to(g, "batch_count", "grouping", c.grouping.batch_count);
        get_to(g, "batch_size", "grouping", c.grouping.batch_size);
        get_to(g, "seed", "grouping", c.grouping.seed);
    }
    if (j.contains("mode")) {
        const json& m = j.at("mode");
        reject_unknown_keys(m, "mode", {"split_order", "baseline", "max_stages"});
        if (m.contains("split_order")) {
            std::string s;
            get_to(m, "split_order", "mode", s);
            auto o = split_order_from_name(s);
            if (!o) throw ConfigError("mode.split_order", "expected ascending|reverse|random");
            c.mode.split_order = *o;
        }
        if (m.contains("baseline")) {
            std::string s;
            get_to(m, "baseline", "mode", s);
            auto b = baseline_from_name(s);
            if (!b) throw ConfigError("mode.baseline", "expected hepnas|oneshot|edgewise");
            c.mode.baseline = *b;
        }
        get_to(m, "max_stages", "mode", c.mode.max_stages);
    }
    if (j.contains("oracle")) {
        const json& o = j.at("oracle");
        reject_unknown_keys(o, "oracle",
                            {"epochs", "lr", "lr_min", "momentum", "weight_decay", "clip_norm",
                             "batch_size", "cap"});
        get_to(o, "epochs", "oracle", c.oracle.epochs);
        get_to(o, "lr", "oracle", c.oracle.lr);
        get_to(o, "lr_min", "oracle", c.oracle.lr_min);
        get_to(o, "momentum", "oracle", c.oracle.momentum);
        get_to(o, "weight_decay", "oracle", c.oracle.weight_decay);
        get_to(o, "clip_norm", "oracle", c.oracle.clip_norm);
        get_to(o, "batch_size", "oracle", c.oracle.batch_size);
        get_to(o, "cap", "oracle", c.oracle.cap);
    }
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("(config)", "cannot open " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ConfigError("(config)", std::string("parse error: ") + e.what());
    }
    return from_json(j);
}

json RunConfig::to_json() const {
    json j;
    j["seed"] = seed;
    json d;
    d["generator"] = dataset.generator;
    d["seed"] = dataset.seed;
    d["n"] = dataset.n;
    d["d"] = dataset.d;
    d["classes"] = dataset.classes;
    d["spread"] = dataset.spread;
    d["noise"] = dataset.noise;
    d["split_fractions"] = dataset.split_fractions;
    d["split_seed"] = dataset.split_seed;
    j["dataset"] = d;
    json s;
    s["nodes"] = space.nodes;
    s["width"] = space.width;
    s["classes"] = space.classes;
    json palette = json::array();
    for (OpKind op : space.palette) palette.push_back(op_name(op));
    s["palette"] = palette;
    j["space"] = s;
    json t;
    t["lr_w"] = train.lr_w;
    t["lr_w_min"] = train.lr_w_min;
    t["momentum"] = train.momentum;
    t["weight_decay_w"] = train.weight_decay_w;
    t["clip_norm"] = train.clip_norm;
    t["lr_alpha"] = train.lr_alpha;
    t["betas_alpha"] = std::vector<double>{train.beta1_alpha, train.beta2_alpha};
    t["weight_decay_alpha"] = train.weight_decay_alpha;
    t["batch_size"] = train.batch_size;
    t["alpha_freeze_epochs"] = train.alpha_freeze_epochs;
    j["train"] = t;
    json sc;
    sc["split_epos"] = schedule.split_epos;
    sc["warm_epo"] = schedule.warm_epo;
    sc["warm_decay"] = schedule.warm_decay;
    j["schedule"] = sc;
    j["smd"] = json{{"lambda_prev", smd.lambda_prev}, {"lambda_peer", smd.lambda_peer}};
    j["grouping"] = json{{"batch_count", grouping.batch_count},
                         {"batch_size", grouping.batch_size},
                         {"seed", grouping.seed}};
    j["mode"] = json{{"split_order", split_order_name(mode.split_order)},
                     {"baseline", baseline_name(mode.baseline)},
                     {"max_stages", mode.max_stages}};
    json o;
    o["epochs"] = oracle.epochs;
    o["lr"] = oracle.lr;
    o["lr_min"] = oracle.lr_min;
    o["momentum"] = oracle.momentum;
    o["weight_decay"] = oracle.weight_decay;
    o["clip_norm"] = oracle.clip_norm;
    o["batch_size"] = oracle.batch_size;
    o["cap"] = oracle.cap;
    j["oracle"] = o;
    return j;
}

void RunConfig::validate() const {
    if (dataset.generator != "spirals" && dataset.generator != "blobs")
        throw ConfigError("dataset.generator", "expected spirals|blobs");
    if (dataset.classes < 2) throw ConfigError("dataset.classes", "need >= 2");
    if (dataset.n < 4 * static_cast<std::size_t>(dataset.classes))
        throw ConfigError("dataset.n", "need >= 4*classes");
    if (dataset.generator == "spirals" && dataset.d != 2)
        throw ConfigError("dataset.d", "spirals are 2-D");
    if (dataset.generator == "blobs" && dataset.d < 2) throw ConfigError("dataset.d", "need >= 2");
    if (dataset.generator == "blobs" && dataset.spread <= 0)
        throw ConfigError("dataset.spread", "need > 0");
    if (dataset.generator == "spirals" && dataset.noise < 0)
        throw ConfigError("dataset.noise", "need >= 0");
    if (dataset.split_fractions.size() != 4)
        throw ConfigError("dataset.split_fractions", "expected four fractions");
    {
        double sum = 0.0;
        for (double f : dataset.split_fractions) {
            if (f <= 0) throw ConfigError("dataset.split_fractions", "fractions must be positive");
            sum += f;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ConfigError("dataset.split_fractions",
                              "fractions sum to " + std::to_string(sum) + ", expected 1");
    }
    try {
        space.validate();
    } catch (const std::exception& e) {
        throw ConfigError("space", e.what());
    }
    try {
        train.validate();
    } catch (const std::exception& e) {
        throw ConfigError("train", e.what());
    }
    try {
        schedule.validate();
    } catch (const std::exception& e) {
        throw ConfigError("schedule", e.what());
    }
    if (smd.lambda_prev < 0 || smd.lambda_peer < 0)
        throw ConfigError("smd", "lambdas must be >= 0");
    if (grouping.batch_count < 1) throw ConfigError("grouping.batch_count", "need >= 1");
    if (grouping.batch_size == 0) throw ConfigError("grouping.batch_size", "need >= 1");
    if (mode.max_stages < 0) throw ConfigError("mode.max_stages", "need >= 0");
    try {
        oracle.validate();
    } catch (const std::exception& e) {
        throw ConfigError("oracle", e.what());
    }

    const std::size_t expected =
        mode.baseline == BaselineMode::EdgeWise
            ? static_cast<std::size_t>(space.edge_count())
            : static_cast<std::size_t>(space.intermediate_count());
    if (mode.baseline != BaselineMode::OneShot && schedule.split_epos.size() != expected)
        throw ConfigError("schedule.split_epos",
                          "length " + std::to_string(schedule.split_epos.size()) + " but the " +
                              baseline_name(mode.baseline) + " mode needs " +
                              std::to_string(expected) + " stages");
}

DataSplits RunConfig::make_splits() const {
    Dataset ds = dataset.generator == "blobs"
                     ? gen_blobs(dataset.seed, dataset.n, dataset.d, dataset.classes,
                                 dataset.spread)
                     : gen_spirals(dataset.seed, dataset.n, dataset.classes, dataset.noise);
    SplitSpec sp;
    sp.train_w = dataset.split_fractions[0];
    sp.train_alpha = dataset.split_fractions[1];
    sp.valid = dataset.split_fractions[2];
    sp.test = dataset.split_fractions[3];
    sp.shuffle_seed = dataset.split_seed;
    return split(ds, sp);
}

std::string RunConfig::config_hash() const {
    const std::string dump = to_json().dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex;
    for (int i = 15; i >= 0; --i) os << ((h >> (i * 4)) & 0xf);
    return os.str();
}

}  // namespace hepnas
