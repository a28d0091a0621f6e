#include "ggconv/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "ggconv/errors.hpp"

namespace ggconv {

namespace {

constexpr double kPi = std::numbers::pi;

/// Sorted unique neighbor lists per node (duplicate directed pairs in the
/// input collapse here).
std::vector<std::vector<int>> neighbor_lists(const Graph3D& graph) {
    std::vector<std::set<int>> sets(graph.num_nodes());
    for (const auto& [i, j] : graph.edge_index) sets[i].insert(j);
    std::vector<std::vector<int>> out(graph.num_nodes());
    for (size_t i = 0; i < sets.size(); ++i) out[i].assign(sets[i].begin(), sets[i].end());
    return out;
}

std::set<std::pair<int, int>> unordered_edge_set(const Graph3D& graph) {
    std::set<std::pair<int, int>> edges;
    for (const auto& [i, j] : graph.edge_index)
        edges.emplace(std::min(i, j), std::max(i, j));
    return edges;
}

Vec3 row3(const Matrix& m, int r) { return m.row(r).transpose(); }

}  // namespace

RigidMotion RigidMotion::make(const Eigen::Matrix3d& rotation, const Vec3& translation) {
    const double ortho_err =
        (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (ortho_err > 1e-12)
        throw std::invalid_argument("rotation is not orthonormal (deviation " +
                                    std::to_string(ortho_err) + ")");
    if (rotation.determinant() < 0.0)
        throw std::invalid_argument("rotation must be proper (det = +1)");
    return RigidMotion{rotation, translation};
}

Graph3D RigidMotion::apply(const Graph3D& g) const {
    Graph3D moved = g;
    for (Eigen::Index r = 0; r < g.positions.rows(); ++r)
        moved.positions.row(r) = apply(row3(g.positions, static_cast<int>(r))).transpose();
    return moved;
}

double edge_distance(const Vec3& p_i, const Vec3& p_j) {
    double sq[3] = {(p_i.x() - p_j.x()) * (p_i.x() - p_j.x()),
                    (p_i.y() - p_j.y()) * (p_i.y() - p_j.y()),
                    (p_i.z() - p_j.z()) * (p_i.z() - p_j.z())};
    // Ascending fixed-order sum: permutation-invariant, so axis-permuting
    // rotations reproduce the distance bit for bit.
    std::sort(sq, sq + 3);
    return std::sqrt(sq[0] + sq[1] + sq[2]);
}

double angle(const Vec3& p_i, const Vec3& p_j, const Vec3& p_k) {
    const Vec3 a = p_i - p_j;
    const Vec3 b = p_k - p_j;
    const double na = a.norm();
    const double nb = b.norm();
    if (na < kDistanceFloor || nb < kDistanceFloor)
        throw DegenerateAngle("angle arm shorter than " + std::to_string(kDistanceFloor) + " A");
    const double c = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
    return std::acos(c);
}

double dihedral(const Vec3& p_i, const Vec3& p_j, const Vec3& p_k, const Vec3& p_l) {
    const Vec3 b1 = p_j - p_i;
    const Vec3 b2 = p_k - p_j;
    const Vec3 b3 = p_l - p_k;
    const Vec3 n1 = b1.cross(b2);
    const Vec3 n2 = b2.cross(b3);
    if (n1.norm() < kDistanceFloor || n2.norm() < kDistanceFloor)
        throw DegenerateDihedral("collinear chain: plane normal below floor");
    const Vec3 m1 = n1.cross(b2.normalized());
    double phi = std::atan2(m1.dot(n2), n1.dot(n2));
    if (phi <= -kPi) phi += 2.0 * kPi;  // range (-pi, pi]
    return phi;
}

std::vector<std::array<int, 3>> enumerate_angle_triples(const Graph3D& graph) {
    require_valid(graph);
    const auto nbrs = neighbor_lists(graph);
    std::vector<std::array<int, 3>> triples;
    for (int j = 0; j < graph.num_nodes(); ++j) {
        for (int i : nbrs[j]) {
            for (int k : nbrs[j]) {
                if (i < k) triples.push_back({i, j, k});
            }
        }
    }
    std::sort(triples.begin(), triples.end());
    return triples;
}

std::vector<std::array<int, 4>> enumerate_dihedral_chains(const Graph3D& graph) {
    require_valid(graph);
    const auto nbrs = neighbor_lists(graph);
    std::vector<std::array<int, 4>> chains;
    for (int j = 0; j < graph.num_nodes(); ++j) {
        for (int k : nbrs[j]) {
            for (int i : nbrs[j]) {
                if (i == k) continue;
                for (int l : nbrs[k]) {
                    if (l == i || l == j) continue;
                    std::array<int, 4> chain = {i, j, k, l};
                    if (chain[0] > chain[3])
                        chain = {chain[3], chain[2], chain[1], chain[0]};
                    chains.push_back(chain);
                }
            }
        }
    }
    std::sort(chains.begin(), chains.end());
    chains.erase(std::unique(chains.begin(), chains.end()), chains.end());
    return chains;
}

PositionalRepr build_positional(const Graph3D& graph) {
    require_valid(graph);
    return PositionalRepr{graph};
}

AngleGeometricRepr build_angle_geometric(const Graph3D& graph) {
    require_valid(graph);
    AngleGeometricRepr repr;

    for (const auto& [i, j] : unordered_edge_set(graph))
        repr.edge_distances.push_back(
            {i, j, edge_distance(row3(graph.positions, i), row3(graph.positions, j))});

    for (const auto& [i, j, k] : enumerate_angle_triples(graph)) {
        try {
            repr.angles.push_back({i, j, k,
                                   angle(row3(graph.positions, i), row3(graph.positions, j),
                                         row3(graph.positions, k))});
        } catch (const DegenerateAngle& e) {
            std::ostringstream os;
            os << "skipped angle (" << i << ", " << j << ", " << k << "): " << e.what();
            repr.warnings.push_back(os.str());
        }
    }

    for (const auto& [i, j, k, l] : enumerate_dihedral_chains(graph)) {
        try {
            repr.dihedrals.push_back({i, j, k, l,
                                      dihedral(row3(graph.positions, i), row3(graph.positions, j),
                                               row3(graph.positions, k), row3(graph.positions, l))});
        } catch (const DegenerateDihedral& e) {
            std::ostringstream os;
            os << "skipped dihedral (" << i << ", " << j << ", " << k << ", " << l
               << "): " << e.what();
            repr.warnings.push_back(os.str());
        }
    }

    return repr;
}

DistanceGeometricRepr build_distance_geometric(const Graph3D& graph) {
    require_valid(graph);
    DistanceGeometricRepr repr;
    repr.num_nodes = graph.num_nodes();

    auto pair_distance = [&](int i, int j) {
        const double d = edge_distance(row3(graph.positions, i), row3(graph.positions, j));
        if (d < kDistanceFloor) {
            std::ostringstream os;
            os << "pair {" << i << ", " << j << "} of graph '" << graph.id
               << "' has distance below " << kDistanceFloor << " A";
            throw ZeroDistance(os.str());
        }
        return d;
    };

    // Each unordered pair is classified once: edge > angle edge > dihedral
    // edge. A pair reachable along several 2-paths or 3-chains keeps a
    // single entry (its distance is path-independent).
    const auto edges = unordered_edge_set(graph);
    for (const auto& [i, j] : edges) repr.edge_distances.push_back({i, j, pair_distance(i, j)});

    std::set<std::pair<int, int>> angle_pairs;
    for (const auto& t : enumerate_angle_triples(graph)) {
        const std::pair<int, int> ends{t[0], t[2]};  // already i < k
        if (!edges.contains(ends)) angle_pairs.insert(ends);
    }
    for (const auto& [i, k] : angle_pairs)
        repr.angle_edge_distances.push_back({i, k, pair_distance(i, k)});

    std::set<std::pair<int, int>> dihedral_pairs;
    for (const auto& c : enumerate_dihedral_chains(graph)) {
        const std::pair<int, int> ends{c[0], c[3]};  // already i < l
        if (!edges.contains(ends) && !angle_pairs.contains(ends)) dihedral_pairs.insert(ends);
    }
    for (const auto& [i, l] : dihedral_pairs)
        repr.dihedral_edge_distances.push_back({i, l, pair_distance(i, l)});

    return repr;
}

}  // namespace ggconv
