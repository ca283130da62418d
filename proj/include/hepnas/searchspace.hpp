#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hepnas {

// Candidate edge operations. Zero/Skip/AvgPair are parameter-free;
// AffineRelu/AffineTanh carry a WxW weight and a bias.
enum class OpKind { Zero = 0, Skip, AvgPair, AffineRelu, AffineTanh };

constexpr int kOpKindCount = 5;

const char* op_name(OpKind op);
std::optional<OpKind> op_from_name(std::string_view name);
bool op_is_parametric(OpKind op);

struct Edge {
    int from;
    int to;
    bool operator==(const Edge&) const = default;
};

// Cell DAG: node 0 is the stem output, nodes 1..N-1 are intermediates with a
// fully connected predecessor pattern (node k has k incoming edges). The cell
// output is the feature vector of the last intermediate node.
struct CellSpec {
    int nodes = 4;                     // N >= 2
    std::size_t width = 8;             // feature width W
    int classes = 2;                   // C
    std::vector<OpKind> palette;       // canonical (enum) order, unique, non-empty

    void validate() const;             // throws std::invalid_argument; sorts nothing
    std::vector<Edge> edges() const;   // (0,1),(0,2),(1,2),(0,3),...
    int edge_count() const { return nodes * (nodes - 1) / 2; }
    int intermediate_count() const { return nodes - 1; }
};

// Canonicalize a palette: sort by enum order, reject duplicates/empties.
std::vector<OpKind> canonical_palette(std::vector<OpKind> ops);

// All edges sharing end node k; the unit of partitioning.
struct Hierarchy {
    int end_node = 0;
    std::vector<int> edge_indices;  // ascending, into CellSpec::edges()
};

std::vector<Hierarchy> hierarchies(const CellSpec& spec);

// Per-edge allowed operation subsets; a Region IS a (sub-)search space.
using OpSet = std::vector<OpKind>;  // kept in canonical order, non-empty

struct Region {
    std::vector<OpSet> allowed;  // one set per edge, edge order

    bool contains(int edge, OpKind op) const;
    void validate(const CellSpec& spec) const;
};

Region full_region(const CellSpec& spec);
bool region_subset(const Region& sub, const Region& sup);
std::uint64_t region_size(const Region& region);

// Per-edge region encoding for logs: ops joined by '+' within an edge,
// edges joined by '|', e.g. "zero+skip|affine_relu|...".
std::string region_str(const Region& region);
Region region_from_str(const std::string& s, const CellSpec& spec);

// One chosen operation per edge.
struct Architecture {
    std::vector<OpKind> ops;
    bool operator==(const Architecture&) const = default;
};

std::string encode(const Architecture& arch);                      // "skip|zero|..."
Architecture decode(const std::string& s, const CellSpec& spec);   // validates names/count

constexpr std::uint64_t kEnumerationCap = 4096;

// Lexicographic enumeration over edge choices (last edge varies fastest).
// Throws if region_size exceeds `cap`, pointing at oracle-space reduction.
std::vector<Architecture> enumerate_archs(const Region& region,
                                          std::uint64_t cap = kEnumerationCap);

}  // namespace hepnas
