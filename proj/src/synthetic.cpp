#include "ggconv/synthetic.hpp"

#include <cmath>

#include "ggconv/geometry.hpp"
#include "ggconv/rng.hpp"

namespace ggconv {

namespace {

constexpr double kBoxSize = 6.0;
constexpr double kEdgeCutoff = 1.8;
constexpr double kTargetCutoff = 4.0;
constexpr int kMinNodes = 6;
constexpr int kMaxNodes = 14;

bool connected(int n, const EdgeList& edges) {
    std::vector<std::vector<int>> nbrs(static_cast<size_t>(n));
    for (const auto& [i, j] : edges) nbrs[static_cast<size_t>(i)].push_back(j);
    std::vector<bool> seen(static_cast<size_t>(n), false);
    std::vector<int> stack = {0};
    seen[0] = true;
    int visited = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int w : nbrs[static_cast<size_t>(v)]) {
            if (!seen[static_cast<size_t>(w)]) {
                seen[static_cast<size_t>(w)] = true;
                ++visited;
                stack.push_back(w);
            }
        }
    }
    return visited == n;
}

}  // namespace

std::vector<Graph3D> make_synthetic_dataset(int count, uint64_t seed) {
    Rng rng(seed);
    std::vector<Graph3D> graphs;
    graphs.reserve(static_cast<size_t>(count));

    for (int g = 0; g < count; ++g) {
        const int n = kMinNodes + rng.uniform_int(kMaxNodes - kMinNodes + 1);
        Matrix positions(n, 3);
        EdgeList edges;
        // Uniform placement in the box, resampled until the cutoff graph is
        // connected. Sparse draws dominate, so cheap rejections matter:
        // compare squared distances and skip the BFS when the edge count
        // cannot span the nodes.
        const double cutoff_sq = kEdgeCutoff * kEdgeCutoff;
        while (true) {
            for (int a = 0; a < n; ++a)
                for (int c = 0; c < 3; ++c) positions(a, c) = rng.uniform(0.0, kBoxSize);
            edges.clear();
            for (int a = 0; a < n; ++a) {
                for (int b = a + 1; b < n; ++b) {
                    if ((positions.row(a) - positions.row(b)).squaredNorm() < cutoff_sq) {
                        edges.emplace_back(a, b);
                        edges.emplace_back(b, a);
                    }
                }
            }
            if (edges.size() >= 2 * static_cast<size_t>(n - 1) && connected(n, edges)) break;
        }

        double target = 0.0;
        for (int a = 0; a < n; ++a) {
            for (int b = a + 1; b < n; ++b) {
                const double d = edge_distance(positions.row(a).transpose(),
                                               positions.row(b).transpose());
                if (d < kTargetCutoff) target += 1.0 / d;
            }
        }

        Graph3D graph;
        graph.id = "syn-" + std::to_string(g);
        graph.node_features = Matrix::Ones(n, 1);
        graph.positions = std::move(positions);
        graph.edge_index = std::move(edges);
        graph.target = target;
        graphs.push_back(std::move(graph));
    }
    return graphs;
}

}  // namespace ggconv
