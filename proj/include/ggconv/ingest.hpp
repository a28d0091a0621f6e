#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "ggconv/graph.hpp"

namespace ggconv {

/// One-hot element vocabulary; anything else lands in the trailing
/// "other" bucket.
inline constexpr std::array<std::string_view, 10> kElementVocab = {
    "H", "C", "N", "O", "F", "P", "S", "Cl", "Br", "I"};
inline constexpr int kNumElementFeatures = 11;  // vocabulary + other

/// One-hot node feature matrix over kElementVocab. Unknown symbols go to
/// the "other" slot and emit a warning when a sink is given.
Matrix featurize_atoms(const std::vector<std::string>& elements,
                       std::vector<std::string>* warnings = nullptr);

/// Reads one JSON record per line:
///   {"id": "...", "nodes": [{"element": "C", "x": .., "y": .., "z": ..,
///    "extra": [..]?}, ...], "edges": [[i, j, bond_order?], ...],
///    "target": ..?}
/// Edges may be listed once per bond; both directions are stored. Each
/// graph is validated. Throws ParseError (with line number) or
/// ValidationError.
std::vector<Graph3D> parse_jsonl(const std::string& path,
                                 std::vector<std::string>* warnings = nullptr);

/// Reads V2000 molblocks from an SDF file. Atom coordinates and symbols
/// come from the fixed-column atom block, bonds from the bond block
/// (1-based, stored in both directions, bond order kept as the single edge
/// feature). The regression target is read from the named data field when
/// target_field is non-empty. Throws UnsupportedFormat for V3000 and
/// CountsMismatch when the counts line disagrees with the blocks.
std::vector<Graph3D> parse_sdf(const std::string& path, const std::string& target_field = "",
                               std::vector<std::string>* warnings = nullptr);

/// Seeded shuffle-then-partition split. counts wins over fractions when
/// both are set; fractions must sum to 1 within 1e-9 and counts must sum
/// to the dataset size (SizeMismatch otherwise).
struct SplitSpec {
    std::optional<std::array<double, 3>> fractions;  // train / val / test
    std::optional<std::array<int, 3>> counts;
    uint64_t seed = 0;
};

struct SplitResult {
    std::vector<Graph3D> train;
    std::vector<Graph3D> val;
    std::vector<Graph3D> test;
};

SplitResult split(const std::vector<Graph3D>& dataset, const SplitSpec& spec);

/// Serializes one graph back to the JSONL record form (round-trip partner
/// of parse_jsonl; "other" elements are written as "X").
std::string to_jsonl_record(const Graph3D& graph);

void write_jsonl(const std::vector<Graph3D>& graphs, const std::string& path);

}  // namespace ggconv
