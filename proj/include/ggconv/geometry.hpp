#pragma once

#include <array>

#include "ggconv/graph.hpp"

namespace ggconv {

/// Minimum admissible distance / vector magnitude in angstrom. Anything
/// below indicates coincident nodes or a collinear chain.
inline constexpr double kDistanceFloor = 1e-9;

/// Proper rotation plus translation.
struct RigidMotion {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Vec3 translation = Vec3::Zero();

    /// Throws std::invalid_argument unless rotation is orthonormal within
    /// 1e-12 with determinant +1.
    static RigidMotion make(const Eigen::Matrix3d& rotation, const Vec3& translation);

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    Graph3D apply(const Graph3D& g) const;
};

/// Euclidean distance between two points. The three squared components are
/// summed in ascending order so the result is invariant under coordinate
/// permutation (and slightly more accurate than naive summation).
double edge_distance(const Vec3& p_i, const Vec3& p_j);

/// Angle at p_j formed by the arms to p_i and to p_k, in [0, pi].
/// Throws DegenerateAngle when either arm is shorter than the floor.
double angle(const Vec3& p_i, const Vec3& p_j, const Vec3& p_k);

/// Signed torsion of the chain i-j-k-l in (-pi, pi]. Positive means the
/// front bond j->i rotates clockwise onto the rear bond k->l when sighting
/// from j to k. Throws DegenerateDihedral when either plane normal is
/// shorter than the floor.
double dihedral(const Vec3& p_i, const Vec3& p_j, const Vec3& p_k, const Vec3& p_l);

/// All two-edge paths (i, j, k) with j adjacent to both ends and i != k,
/// canonicalized to i < k and sorted lexicographically.
std::vector<std::array<int, 3>> enumerate_angle_triples(const Graph3D& graph);

/// All three-edge chains (i, j, k, l) over pairwise-distinct nodes,
/// canonicalized to i < l and sorted lexicographically.
std::vector<std::array<int, 4>> enumerate_dihedral_chains(const Graph3D& graph);

PositionalRepr build_positional(const Graph3D& graph);

/// Edge distances, angles per triple, dihedrals per chain. Degenerate items
/// are skipped and noted in the warnings list rather than failing the build.
AngleGeometricRepr build_angle_geometric(const Graph3D& graph);

/// Edge distances plus end-node distances of angle triples and dihedral
/// chains. Each unordered pair is classified once with precedence
/// edge > angle edge > dihedral edge, so cyclic graphs never double-count a
/// pair. Throws ZeroDistance if any retained pair sits below the floor.
DistanceGeometricRepr build_distance_geometric(const Graph3D& graph);

}  // namespace ggconv
