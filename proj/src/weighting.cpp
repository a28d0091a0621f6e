#include "ggconv/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ggconv/errors.hpp"
#include "ggconv/geometry.hpp"

namespace ggconv {

bool PowerLawParams::valid() const {
    for (double v : {r0, n, r0_theta, n_theta, r0_phi, n_phi})
        if (!(v > 0.0) || !std::isfinite(v)) return false;
    return true;
}

std::string_view to_string(NeighborOrder order) {
    switch (order) {
        case NeighborOrder::First: return "first";
        case NeighborOrder::Second: return "second";
        case NeighborOrder::Third: return "third";
    }
    return "third";
}

NeighborOrder neighbor_order_from_string(std::string_view name) {
    if (name == "first" || name == "1") return NeighborOrder::First;
    if (name == "second" || name == "2") return NeighborOrder::Second;
    if (name == "third" || name == "3") return NeighborOrder::Third;
    throw std::invalid_argument("unknown neighbor order: " + std::string(name));
}

double power_law_weight(double d, double r0, double n) {
    if (!(r0 > 0.0) || !(n > 0.0))
        throw std::invalid_argument("power-law parameters must be positive");
    if (d <= kDistanceFloor)
        throw ZeroDistance("distance " + std::to_string(d) + " A is at or below the floor");
    const double w = std::pow(d / r0, -n);
    return std::min(w, kWeightClamp);
}

namespace {

void append_kind(WeightedAdjacency& adj, const std::vector<DistanceEntry>& entries,
                 double r0, double n, const char* kind,
                 const std::optional<double>& override_weight) {
    for (const auto& e : entries) {
        double w;
        if (override_weight) {
            w = *override_weight;
        } else {
            w = power_law_weight(e.d, r0, n);
            if (w >= kWeightClamp) {
                std::ostringstream os;
                os << kind << " pair {" << e.i << ", " << e.j << "} weight clamped to "
                   << kWeightClamp << " (d = " << e.d << " A)";
                adj.warnings.push_back(os.str());
            }
        }
        adj.pairs.emplace_back(e.i, e.j);
        adj.weights.push_back(w);
        adj.pairs.emplace_back(e.j, e.i);
        adj.weights.push_back(w);
    }
}

void sort_pairs(WeightedAdjacency& adj) {
    std::vector<size_t> order(adj.pairs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return adj.pairs[a] < adj.pairs[b]; });
    EdgeList pairs(adj.pairs.size());
    std::vector<double> weights(adj.weights.size());
    for (size_t i = 0; i < order.size(); ++i) {
        pairs[i] = adj.pairs[order[i]];
        weights[i] = adj.weights[order[i]];
    }
    adj.pairs = std::move(pairs);
    adj.weights = std::move(weights);
}

}  // namespace

WeightedAdjacency assemble_weighted_adjacency(const DistanceGeometricRepr& repr,
                                              const PowerLawParams& params, NeighborOrder order,
                                              std::optional<double> constant_weight_override) {
    if (!params.valid())
        throw std::invalid_argument("power-law parameters must be positive and finite");
    WeightedAdjacency adj;
    adj.num_nodes = repr.num_nodes;

    append_kind(adj, repr.edge_distances, params.r0, params.n, "edge", constant_weight_override);
    if (order >= NeighborOrder::Second)
        append_kind(adj, repr.angle_edge_distances, params.r0_theta, params.n_theta, "angle-edge",
                    constant_weight_override);
    if (order >= NeighborOrder::Third)
        append_kind(adj, repr.dihedral_edge_distances, params.r0_phi, params.n_phi,
                    "dihedral-edge", constant_weight_override);

    sort_pairs(adj);
    return adj;
}

WeightedAdjacency uniform_adjacency(const Graph3D& graph) {
    require_valid(graph);
    WeightedAdjacency adj;
    adj.num_nodes = graph.num_nodes();

    std::set<std::pair<int, int>> seen;
    for (const auto& p : graph.edge_index) seen.insert(p);
    adj.pairs.assign(seen.begin(), seen.end());  // already sorted, deduplicated
    adj.weights.assign(adj.pairs.size(), 1.0);
    return adj;
}

}  // namespace ggconv
