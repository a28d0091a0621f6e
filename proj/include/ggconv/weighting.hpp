#pragma once

#include <optional>
#include <string_view>

#include "ggconv/graph.hpp"

namespace ggconv {

/// Reference power-law constants from empirical bond-strength /
/// bond-length fits: r0 = 1.39 A, exponent 1/0.22 ~ 4.55.
inline constexpr double kReferenceR0 = 1.39;
inline constexpr double kReferenceN = 1.0 / 0.22;

/// Power-law weighting parameters per edge kind: w = (d / r0)^(-n).
struct PowerLawParams {
    double r0 = kReferenceR0;
    double n = kReferenceN;
    double r0_theta = kReferenceR0;
    double n_theta = kReferenceN;
    double r0_phi = kReferenceR0;
    double n_phi = kReferenceN;

    static PowerLawParams reference() { return PowerLawParams{}; }

    /// All six entries strictly positive and finite.
    bool valid() const;

    friend bool operator==(const PowerLawParams&, const PowerLawParams&) = default;
};

/// Which edge kinds enter the adjacency: First = edges only, Second adds
/// angle edges, Third adds dihedral edges as well.
enum class NeighborOrder { First = 1, Second = 2, Third = 3 };

std::string_view to_string(NeighborOrder order);
NeighborOrder neighbor_order_from_string(std::string_view name);

/// Symmetric weighted adjacency in directed COO form: both directions of
/// every pair present, no self loops, weights strictly positive, pairs
/// sorted lexicographically. Self loops are added later by normalization.
struct WeightedAdjacency {
    int num_nodes = 0;
    EdgeList pairs;
    std::vector<double> weights;
    std::vector<std::string> warnings;  // clamped weights
};

/// Weights above this are clamped (corrupt inputs must not produce inf).
inline constexpr double kWeightClamp = 1e6;

/// w = (d / r0)^(-n), clamped to kWeightClamp. Throws ZeroDistance when
/// d <= 1e-9; throws std::invalid_argument for non-positive r0 or n.
double power_law_weight(double d, double r0, double n);

/// Builds the weighted adjacency for the requested neighbor order, applying
/// each kind's (r0, n) pair. constant_weight_override forces every included
/// pair to that weight; it exists so the uniform baseline can be expressed
/// through the same code path.
WeightedAdjacency assemble_weighted_adjacency(
    const DistanceGeometricRepr& repr, const PowerLawParams& params, NeighborOrder order,
    std::optional<double> constant_weight_override = std::nullopt);

/// First-neighbor pairs only, every weight exactly 1 (the standard
/// graph-convolution baseline).
WeightedAdjacency uniform_adjacency(const Graph3D& graph);

}  // namespace ggconv
