#include "hepnas/searchspace.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace hepnas {

const char* op_name(OpKind op) {
    switch (op) {
        case OpKind::Zero: return "zero";
        case OpKind::Skip: return "skip";
        case OpKind::AvgPair: return "avg_pair";
        case OpKind::AffineRelu: return "affine_relu";
        case OpKind::AffineTanh: return "affine_tanh";
    }
    return "?";
}

std::optional<OpKind> op_from_name(std::string_view name) {
    for (int i = 0; i < kOpKindCount; ++i) {
        OpKind op = static_cast<OpKind>(i);
        if (name == op_name(op)) return op;
    }
    return std::nullopt;
}

bool op_is_parametric(OpKind op) {
    return op == OpKind::AffineRelu || op == OpKind::AffineTanh;
}

std::vector<OpKind> canonical_palette(std::vector<OpKind> ops) {
    std::sort(ops.begin(), ops.end());
    if (std::adjacent_find(ops.begin(), ops.end()) != ops.end())
        throw std::invalid_argument("palette: duplicate operation");
    if (ops.empty()) throw std::invalid_argument("palette: empty");
    return ops;
}

void CellSpec::validate() const {
    if (nodes < 2) throw std::invalid_argument("CellSpec: need nodes >= 2");
    if (width == 0) throw std::invalid_argument("CellSpec: need width >= 1");
    if (classes < 2) throw std::invalid_argument("CellSpec: need classes >= 2");
    if (palette.empty()) throw std::invalid_argument("CellSpec: empty palette");
    if (!std::is_sorted(palette.begin(), palette.end()) ||
        std::adjacent_find(palette.begin(), palette.end()) != palette.end())
        throw std::invalid_argument("CellSpec: palette must be unique and in canonical order");
}

std::vector<Edge> CellSpec::edges() const {
    std::vector<Edge> es;
    es.reserve(static_cast<std::size_t>(edge_count()));
    for (int k = 1; k < nodes; ++k)
        for (int i = 0; i < k; ++i) es.push_back(Edge{i, k});
    return es;
}

std::vector<Hierarchy> hierarchies(const CellSpec& spec) {
    spec.validate();
    std::vector<Hierarchy> hs;
    hs.reserve(static_cast<std::size_t>(spec.intermediate_count()));
    int edge_idx = 0;
    for (int k = 1; k < spec.nodes; ++k) {
        Hierarchy h;
        h.end_node = k;
        for (int i = 0; i < k; ++i) h.edge_indices.push_back(edge_idx++);
        hs.push_back(std::move(h));
    }
    return hs;
}

bool Region::contains(int edge, OpKind op) const {
    const OpSet& set = allowed[static_cast<std::size_t>(edge)];
    return std::find(set.begin(), set.end(), op) != set.end();
}

void Region::validate(const CellSpec& spec) const {
    if (allowed.size() != static_cast<std::size_t>(spec.edge_count()))
        throw std::invalid_argument("Region: " + std::to_string(allowed.size()) +
                                    " edge sets for " + std::to_string(spec.edge_count()) +
                                    " edges");
    for (const OpSet& set : allowed) {
        if (set.empty()) throw std::invalid_argument("Region: empty allowed set on an edge");
        if (!std::is_sorted(set.begin(), set.end()) ||
            std::adjacent_find(set.begin(), set.end()) != set.end())
            throw std::invalid_argument("Region: allowed set not canonical");
        for (OpKind op : set)
            if (std::find(spec.palette.begin(), spec.palette.end(), op) == spec.palette.end())
                throw std::invalid_argument(std::string("Region: op ") + op_name(op) +
                                            " outside palette");
    }
}

Region full_region(const CellSpec& spec) {
    Region r;
    r.allowed.assign(static_cast<std::size_t>(spec.edge_count()), spec.palette);
    return r;
}

bool region_subset(const Region& sub, const Region& sup) {
    if (sub.allowed.size() != sup.allowed.size()) return false;
    for (std::size_t e = 0; e < sub.allowed.size(); ++e)
        for (OpKind op : sub.allowed[e])
            if (!sup.contains(static_cast<int>(e), op)) return false;
    return true;
}

std::uint64_t region_size(const Region& region) {
    std::uint64_t n = 1;
    for (const OpSet& set : region.allowed) n *= static_cast<std::uint64_t>(set.size());
    return n;
}

std::string region_str(const Region& region) {
    std::ostringstream os;
    for (std::size_t e = 0; e < region.allowed.size(); ++e) {
        if (e) os << '|';
        for (std::size_t i = 0; i < region.allowed[e].size(); ++i) {
            if (i) os << '+';
            os << op_name(region.allowed[e][i]);
        }
    }
    return os.str();
}

namespace {

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

}  // namespace

Region region_from_str(const std::string& s, const CellSpec& spec) {
    Region r;
    for (const std::string& edge_part : split_on(s, '|')) {
        OpSet set;
        for (const std::string& name : split_on(edge_part, '+')) {
            auto op = op_from_name(name);
            if (!op) throw std::invalid_argument("region_from_str: unknown op '" + name + "'");
            set.push_back(*op);
        }
        std::sort(set.begin(), set.end());
        r.allowed.push_back(std::move(set));
    }
    r.validate(spec);
    return r;
}

std::string encode(const Architecture& arch) {
    std::ostringstream os;
    for (std::size_t e = 0; e < arch.ops.size(); ++e) {
        if (e) os << '|';
        os << op_name(arch.ops[e]);
    }
    return os.str();
}

Architecture decode(const std::string& s, const CellSpec& spec) {
    Architecture arch;
    for (const std::string& name : split_on(s, '|')) {
        auto op = op_from_name(name);
        if (!op) throw std::invalid_argument("decode: unknown op '" + name + "'");
        arch.ops.push_back(*op);
    }
    if (arch.ops.size() != static_cast<std::size_t>(spec.edge_count()))
        throw std::invalid_argument("decode: " + std::to_string(arch.ops.size()) +
                                    " ops for " + std::to_string(spec.edge_count()) + " edges");
    return arch;
}

std::vector<Architecture> enumerate_archs(const Region& region, std::uint64_t cap) {
    const std::uint64_t total = region_size(region);
    if (total > cap)
        throw std::runtime_error("enumerate_archs: region has " + std::to_string(total) +
                                 " architectures, above the cap of " + std::to_string(cap) +
                                 "; reduce the oracle region (fewer ops per edge or fewer nodes)");
    const std::size_t E = region.allowed.size();
    std::vector<Architecture> out;
    out.reserve(static_cast<std::size_t>(total));
    std::vector<std::size_t> idx(E, 0);
    for (std::uint64_t i = 0; i < total; ++i) {
        Architecture a;
        a.ops.reserve(E);
        for (std::size_t e = 0; e < E; ++e) a.ops.push_back(region.allowed[e][idx[e]]);
        out.push_back(std::move(a));
        // odometer, last edge fastest
        for (std::size_t e = E; e-- > 0;) {
            if (++idx[e] < region.allowed[e].size()) break;
            idx[e] = 0;
        }
    }
    return out;
}

}  // namespace hepnas
