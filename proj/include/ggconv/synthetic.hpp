#pragma once

#include <cstdint>
#include <vector>

#include "ggconv/graph.hpp"

namespace ggconv {

/// Built-in benchmark: random geometric graphs with 6-14 nodes placed
/// uniformly in a 6 A box, edges between nodes closer than 1.8 A, resampled
/// until connected. Node features are a single constant 1; the target is
/// the sum of 1/d over all node pairs within 4 A, so it depends on the
/// geometry and not just the topology.
std::vector<Graph3D> make_synthetic_dataset(int count, uint64_t seed);

}  // namespace ggconv
