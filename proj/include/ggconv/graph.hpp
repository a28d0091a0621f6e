#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ggconv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;
using EdgeList = std::vector<std::pair<int, int>>;

/// A 3D graph: node features, COO edge list (every edge stored in both
/// directions), optional per-edge features, and node positions in angstrom.
/// Immutable by convention once built; all consumers copy by value.
struct Graph3D {
    Matrix node_features;                 // N x d
    EdgeList edge_index;                  // directed pairs, symmetric storage
    std::optional<Matrix> edge_features;  // one row per directed pair
    Matrix positions;                     // N x 3
    std::optional<double> target;
    std::string id;

    int num_nodes() const { return static_cast<int>(node_features.rows()); }
    int num_directed_edges() const { return static_cast<int>(edge_index.size()); }
};

/// Checks every Graph3D invariant and returns one message per violation.
/// Empty result means the graph is valid.
std::vector<std::string> validate(const Graph3D& graph);

/// Throws ValidationError if validate() reports anything.
void require_valid(const Graph3D& graph);

/// Unordered node pair (stored with i < j) and its distance in angstrom.
struct DistanceEntry {
    int i = 0;
    int j = 0;
    double d = 0.0;

    friend bool operator==(const DistanceEntry&, const DistanceEntry&) = default;
};

/// Two-edge path i-j-k with the angle at the middle node j; canonical i < k.
struct AngleEntry {
    int i = 0;
    int j = 0;
    int k = 0;
    double theta = 0.0;  // radians, [0, pi]

    friend bool operator==(const AngleEntry&, const AngleEntry&) = default;
};

/// Three-edge chain i-j-k-l with its signed torsion; canonical i < l.
struct DihedralEntry {
    int i = 0;
    int j = 0;
    int k = 0;
    int l = 0;
    double phi = 0.0;  // radians, (-pi, pi]

    friend bool operator==(const DihedralEntry&, const DihedralEntry&) = default;
};

/// Representation that keeps raw node coordinates. Not invariant under
/// rigid motion; kept for completeness and for ingestion round trips.
struct PositionalRepr {
    Graph3D graph;
};

/// Edge distances, angles and dihedrals. Rigid-motion invariant (dihedral
/// sign flips under improper motions).
struct AngleGeometricRepr {
    std::vector<DistanceEntry> edge_distances;
    std::vector<AngleEntry> angles;
    std::vector<DihedralEntry> dihedrals;
    std::vector<std::string> warnings;  // degenerate angles/dihedrals skipped
};

/// Distances only: edge distances plus the end-edge distances of angles and
/// dihedrals. Pairs are unique within and across the three lists (an edge
/// pair is never repeated as an angle- or dihedral-edge pair).
struct DistanceGeometricRepr {
    int num_nodes = 0;
    std::vector<DistanceEntry> edge_distances;
    std::vector<DistanceEntry> angle_edge_distances;
    std::vector<DistanceEntry> dihedral_edge_distances;
};

}  // namespace ggconv
