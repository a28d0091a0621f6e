#include <doctest.h>

#include "ggconv/errors.hpp"
#include "ggconv/geometry.hpp"
#include "ggconv/graph.hpp"
#include "test_util.hpp"

using namespace ggconv;

namespace {

Graph3D two_node_graph() {
    Graph3D g;
    g.id = "pair";
    g.node_features = Matrix::Identity(2, 2);
    g.positions.resize(2, 3);
    g.positions << 0, 0, 0, 1, 0, 0;
    g.edge_index = {{0, 1}, {1, 0}};
    return g;
}

}  // namespace

TEST_CASE("minimal valid graph passes validation") {
    CHECK(validate(two_node_graph()).empty());
}

TEST_CASE("self-loop pair is reported") {
    Graph3D g = two_node_graph();
    g.edge_index = {{0, 0}};
    const auto report = validate(g);
    REQUIRE(!report.empty());
    bool found = false;
    for (const auto& v : report)
        if (v.find("self-loop") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("out-of-range edge index is reported") {
    Graph3D g;
    g.id = "bad-index";
    g.node_features = Matrix::Ones(3, 1);
    g.positions = Matrix::Zero(3, 3);
    g.positions.col(0) << 0, 1, 2;
    g.edge_index = {{0, 5}, {5, 0}};
    const auto report = validate(g);
    REQUIRE(!report.empty());
    bool found = false;
    for (const auto& v : report)
        if (v.find("out of node range") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("asymmetric storage is reported") {
    Graph3D g = two_node_graph();
    for (const EdgeList& edges :
         {EdgeList{{0, 1}}, EdgeList{{1, 0}}, EdgeList{{0, 1}, {1, 0}, {1, 0}}}) {
        g.edge_index = edges;
        const auto report = validate(g);
        bool found = false;
        for (const auto& v : report)
            if (v.find("reverse") != std::string::npos) found = true;
        CHECK(found);
    }
}

TEST_CASE("edge features must match across directions") {
    Graph3D g = two_node_graph();
    Matrix ef(2, 1);
    ef << 1.0, 2.0;
    g.edge_features = ef;
    const auto report = validate(g);
    bool found = false;
    for (const auto& v : report)
        if (v.find("differ between directions") != std::string::npos) found = true;
    CHECK(found);

    (*g.edge_features)(1, 0) = 1.0;
    CHECK(validate(g).empty());
}

TEST_CASE("position/feature row mismatch is reported") {
    Graph3D g = two_node_graph();
    g.positions = Matrix::Zero(3, 3);
    CHECK(!validate(g).empty());
}

TEST_CASE("require_valid throws with the report attached") {
    Graph3D g = two_node_graph();
    g.edge_index = {{0, 0}};
    try {
        require_valid(g);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.graph_id() == "pair");
        CHECK(!e.violations().empty());
    }
}

TEST_CASE("symmetric-storage closure holds for generated graphs") {
    Rng rng(11);
    for (int t = 0; t < 50; ++t) {
        const Graph3D g = test::random_connected_graph(rng);
        CHECK(validate(g).empty());
        std::multiset<std::pair<int, int>> fwd, rev;
        for (const auto& [i, j] : g.edge_index) {
            fwd.emplace(i, j);
            rev.emplace(j, i);
        }
        CHECK(fwd == rev);
    }
}

TEST_CASE("representations do not alias their source graph") {
    Rng rng(12);
    Graph3D g = test::random_connected_graph(rng, 4, 8);
    const auto repr = build_distance_geometric(g);
    const auto before = repr.edge_distances;

    g.positions.array() += 10.0;  // mutate the source
    CHECK(repr.edge_distances == before);

    const auto pos = build_positional(g);
    g.positions(0, 0) = -99.0;
    CHECK(pos.graph.positions(0, 0) != -99.0);
}
