#include "ggconv/graph.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "ggconv/errors.hpp"

namespace ggconv {

ValidationError::ValidationError(std::string id, std::vector<std::string> violations)
    : Error([&] {
          std::ostringstream os;
          os << "invalid graph '" << id << "':";
          for (const auto& v : violations) os << " [" << v << "]";
          return os.str();
      }()),
      id_(std::move(id)),
      violations_(std::move(violations)) {}

ParseError::ParseError(long line, const std::string& reason)
    : Error("parse error at line " + std::to_string(line) + ": " + reason), line_(line) {}

std::vector<std::string> validate(const Graph3D& graph) {
    std::vector<std::string> report;
    const int n = graph.num_nodes();

    if (n < 1) report.push_back("graph must have at least one node");
    if (graph.positions.rows() != graph.node_features.rows())
        report.push_back("positions row count differs from node_features row count");
    if (graph.positions.cols() != 3)
        report.push_back("positions must have exactly 3 columns");
    if (!graph.node_features.allFinite())
        report.push_back("node_features contain non-finite values");
    if (graph.positions.size() > 0 && !graph.positions.allFinite())
        report.push_back("positions contain non-finite values");

    bool indices_ok = true;
    for (const auto& [i, j] : graph.edge_index) {
        if (i < 0 || i >= n || j < 0 || j >= n) {
            std::ostringstream os;
            os << "edge (" << i << ", " << j << ") out of node range [0, " << n << ")";
            report.push_back(os.str());
            indices_ok = false;
        }
        if (i == j) {
            std::ostringstream os;
            os << "self-loop pair (" << i << ", " << i << ") is not allowed";
            report.push_back(os.str());
        }
    }

    if (graph.edge_features) {
        if (static_cast<size_t>(graph.edge_features->rows()) != graph.edge_index.size())
            report.push_back("edge_features row count differs from edge_index length");
        if (!graph.edge_features->allFinite())
            report.push_back("edge_features contain non-finite values");
    }

    // Symmetric storage: the multiset of (i, j) must equal the multiset of
    // (j, i), and all directed occurrences of an unordered pair must carry
    // the same feature row.
    if (indices_ok) {
        std::map<std::pair<int, int>, int> counts;
        for (const auto& p : graph.edge_index) ++counts[p];
        for (const auto& [pair, count] : counts) {
            auto rev = counts.find({pair.second, pair.first});
            const int rev_count = rev == counts.end() ? 0 : rev->second;
            // Only the surplus direction reports, so each imbalance is
            // listed exactly once.
            if (count > rev_count) {
                std::ostringstream os;
                os << "pair (" << pair.first << ", " << pair.second << ") stored " << count
                   << " time(s) but its reverse " << rev_count << " time(s)";
                report.push_back(os.str());
            }
        }
        if (graph.edge_features &&
            static_cast<size_t>(graph.edge_features->rows()) == graph.edge_index.size()) {
            std::map<std::pair<int, int>, Eigen::Index> first_row;
            for (Eigen::Index u = 0; u < static_cast<Eigen::Index>(graph.edge_index.size()); ++u) {
                auto [i, j] = graph.edge_index[u];
                auto key = std::minmax(i, j);
                auto [it, inserted] = first_row.try_emplace({key.first, key.second}, u);
                if (!inserted && graph.edge_features->row(u) != graph.edge_features->row(it->second)) {
                    std::ostringstream os;
                    os << "edge_features differ between directions of pair {" << key.first << ", "
                       << key.second << "}";
                    report.push_back(os.str());
                }
            }
        }
    }

    return report;
}

void require_valid(const Graph3D& graph) {
    auto report = validate(graph);
    if (!report.empty()) throw ValidationError(graph.id, std::move(report));
}

}  // namespace ggconv
