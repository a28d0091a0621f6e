#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "ggconv/errors.hpp"
#include "ggconv/geometry.hpp"
#include "ggconv/ingest.hpp"
#include "test_util.hpp"

using namespace ggconv;
using doctest::Approx;

namespace fs = std::filesystem;

namespace {

struct TempFile {
    fs::path path;
    explicit TempFile(const std::string& name, const std::string& content)
        : path(fs::temp_directory_path() / name) {
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { fs::remove(path); }
};

// Water with the experimental O-H bond length 0.9572 A and H-O-H angle
// 104.52 degrees, written to 4-decimal SDF precision.
const char* kWaterSdf =
    "water\n"
    "  test\n"
    "\n"
    "  3  2  0  0  0  0  0  0  0  0999 V2000\n"
    "    0.0000    0.0000    0.0000 O   0  0  0  0  0  0\n"
    "    0.9572    0.0000    0.0000 H   0  0  0  0  0  0\n"
    "   -0.2400    0.9266    0.0000 H   0  0  0  0  0  0\n"
    "  1  2  1  0  0  0\n"
    "  1  3  1  0  0  0\n"
    "M  END\n"
    "> <SOLUBILITY>\n"
    "ignored\n"
    "\n"
    "$$$$\n";

}  // namespace

TEST_CASE("featurize_atoms one-hot layout") {
    const Matrix c = featurize_atoms({"C"});
    CHECK(c.rows() == 1);
    CHECK(c.cols() == kNumElementFeatures);
    CHECK(c(0, 1) == 1.0);  // C slot
    CHECK(c.row(0).sum() == Approx(1.0));

    std::vector<std::string> warnings;
    const Matrix other = featurize_atoms({"Xx"}, &warnings);
    CHECK(other(0, kNumElementFeatures - 1) == 1.0);
    CHECK(warnings.size() == 1);

    const Matrix co = featurize_atoms({"C", "O"});
    CHECK(co.rows() == 2);
    CHECK(co.row(0).dot(co.row(1)) == 0.0);
    CHECK(co.row(0).sum() == Approx(1.0));
    CHECK(co.row(1).sum() == Approx(1.0));
}

TEST_CASE("parse_jsonl reads a two-atom molecule") {
    const TempFile file("ggconv_two_atom.jsonl",
                        R"({"id":"m1","nodes":[{"element":"C","x":0,"y":0,"z":0},)"
                        R"({"element":"O","x":1.2,"y":0,"z":0}],"edges":[[0,1]],"target":-0.5})"
                        "\n");
    const auto graphs = parse_jsonl(file.path.string());
    REQUIRE(graphs.size() == 1);
    const auto& g = graphs[0];
    CHECK(g.id == "m1");
    CHECK(g.num_nodes() == 2);
    CHECK(g.num_directed_edges() == 2);  // both directions stored
    CHECK(g.target == Approx(-0.5));
    CHECK(g.positions(1, 0) == Approx(1.2));
    CHECK(validate(g).empty());
}

TEST_CASE("parse_jsonl reports the failing line") {
    const TempFile file("ggconv_bad.jsonl",
                        R"({"id":"a","nodes":[{"element":"C","x":0,"y":0,"z":0}],"edges":[]})"
                        "\n"
                        R"({"id":"b","nodes":[{"element":"C","x":0,"y":0,"z":0}],"edges":[]})"
                        "\n"
                        "{not json\n");
    try {
        parse_jsonl(file.path.string());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("parse_jsonl warns on unknown elements") {
    const TempFile file("ggconv_unknown.jsonl",
                        R"({"id":"m","nodes":[{"element":"Zz","x":0,"y":0,"z":0}],"edges":[]})"
                        "\n");
    std::vector<std::string> warnings;
    const auto graphs = parse_jsonl(file.path.string(), &warnings);
    REQUIRE(graphs.size() == 1);
    CHECK(graphs[0].node_features(0, kNumElementFeatures - 1) == 1.0);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("Zz") != std::string::npos);
}

TEST_CASE("parse_sdf reads a minimal V2000 molblock") {
    const TempFile file("ggconv_water.sdf", kWaterSdf);
    const auto graphs = parse_sdf(file.path.string());
    REQUIRE(graphs.size() == 1);
    const auto& g = graphs[0];
    CHECK(g.id == "water");
    CHECK(g.num_nodes() == 3);
    CHECK(g.num_directed_edges() == 4);
    REQUIRE(g.edge_features.has_value());
    CHECK((*g.edge_features)(0, 0) == Approx(1.0));

    // O-H distances reproduce the written geometry at SDF precision.
    const auto repr = build_distance_geometric(g);
    REQUIRE(repr.edge_distances.size() == 2);
    CHECK(repr.edge_distances[0].d == Approx(0.9572).epsilon(1e-4));
    CHECK(repr.edge_distances[1].d == Approx(0.9572).epsilon(1e-4));
}

TEST_CASE("parse_sdf reads the target from a named data field") {
    std::string sdf = kWaterSdf;
    const auto pos = sdf.find("> <SOL");
    sdf.replace(pos, sdf.find("\n\n$$$$") - pos,
                "> 25 <LOGS>\n-1.38\n");
    const TempFile file("ggconv_water_target.sdf", sdf);
    const auto graphs = parse_sdf(file.path.string(), "LOGS");
    REQUIRE(graphs.size() == 1);
    CHECK(graphs[0].target == Approx(-1.38));
}

TEST_CASE("parse_sdf detects counts mismatches and V3000") {
    const char* short_block =
        "broken\n\n\n"
        "  3  0  0  0  0  0  0  0  0  0999 V2000\n"
        "    0.0000    0.0000    0.0000 C   0  0\n"
        "    1.0000    0.0000    0.0000 C   0  0\n"
        "M  END\n"
        "$$$$\n";
    const TempFile bad("ggconv_counts.sdf", short_block);
    CHECK_THROWS_AS(parse_sdf(bad.path.string()), CountsMismatch);

    const char* v3000 =
        "modern\n\n\n"
        "  0  0  0     0  0            999 V3000\n"
        "M  V30 BEGIN CTAB\n"
        "M  END\n"
        "$$$$\n";
    const TempFile v3("ggconv_v3000.sdf", v3000);
    CHECK_THROWS_AS(parse_sdf(v3.path.string()), UnsupportedFormat);
}

TEST_CASE("split by counts and fractions") {
    Rng rng(81);
    std::vector<Graph3D> data;
    for (int i = 0; i < 10; ++i) {
        Graph3D g = test::random_connected_graph(rng, 2, 5);
        g.id = "g" + std::to_string(i);
        data.push_back(std::move(g));
    }

    SplitSpec frac;
    frac.fractions = {0.8, 0.1, 0.1};
    frac.seed = 4;
    const auto parts = split(data, frac);
    CHECK(parts.train.size() == 8);
    CHECK(parts.val.size() == 1);
    CHECK(parts.test.size() == 1);

    std::set<std::string> ids;
    for (const auto* p : {&parts.train, &parts.val, &parts.test})
        for (const auto& g : *p) ids.insert(g.id);
    CHECK(ids.size() == 10);  // disjoint and exhaustive

    const auto again = split(data, frac);
    for (size_t i = 0; i < parts.train.size(); ++i)
        CHECK(parts.train[i].id == again.train[i].id);

    SplitSpec counts;
    counts.counts = {7, 2, 1};
    const auto by_counts = split(data, counts);
    CHECK(by_counts.train.size() == 7);
    CHECK(by_counts.val.size() == 2);
    CHECK(by_counts.test.size() == 1);

    SplitSpec bad;
    bad.counts = {9, 9, 9};
    CHECK_THROWS_AS(split(data, bad), SizeMismatch);
    SplitSpec bad_frac;
    bad_frac.fractions = {0.5, 0.2, 0.2};
    CHECK_THROWS_AS(split(data, bad_frac), SizeMismatch);
}

TEST_CASE("split reproduces the benchmark sizes on a 1127-graph set") {
    Rng rng(82);
    std::vector<Graph3D> data;
    data.reserve(1127);
    for (int i = 0; i < 1127; ++i) {
        Graph3D g;
        g.id = "d" + std::to_string(i);
        g.node_features = Matrix::Ones(1, 1);
        g.positions = Matrix::Zero(1, 3);
        data.push_back(std::move(g));
    }
    SplitSpec spec;
    spec.counts = {901, 113, 113};
    const auto parts = split(data, spec);
    CHECK(parts.train.size() == 901);
    CHECK(parts.val.size() == 113);
    CHECK(parts.test.size() == 113);
}

TEST_CASE("split partition property over many seeds") {
    Rng rng(83);
    std::vector<Graph3D> data;
    for (int i = 0; i < 23; ++i) {
        Graph3D g;
        g.id = "p" + std::to_string(i);
        g.node_features = Matrix::Ones(1, 1);
        g.positions = Matrix::Zero(1, 3);
        data.push_back(std::move(g));
    }
    SplitSpec spec;
    spec.counts = {15, 5, 3};
    for (uint64_t seed = 0; seed < 100; ++seed) {
        spec.seed = seed;
        const auto parts = split(data, spec);
        std::set<std::string> ids;
        size_t total = 0;
        for (const auto* p : {&parts.train, &parts.val, &parts.test}) {
            total += p->size();
            for (const auto& g : *p) ids.insert(g.id);
        }
        CHECK(total == data.size());
        CHECK(ids.size() == data.size());
    }
}

TEST_CASE("JSONL round trip preserves the graph") {
    const TempFile file("ggconv_roundtrip.jsonl",
                        R"({"id":"rt","nodes":[{"element":"N","x":0.125,"y":-1.5,"z":2.25,)"
                        R"("extra":[0.5]},{"element":"C","x":1.0,"y":0.0,"z":0.0,"extra":[1.5]}],)"
                        R"("edges":[[0,1,2]],"target":3.75})"
                        "\n");
    const auto graphs = parse_jsonl(file.path.string());
    REQUIRE(graphs.size() == 1);

    const TempFile second("ggconv_roundtrip2.jsonl", to_jsonl_record(graphs[0]) + "\n");
    const auto again = parse_jsonl(second.path.string());
    REQUIRE(again.size() == 1);

    const auto& a = graphs[0];
    const auto& b = again[0];
    CHECK(a.id == b.id);
    CHECK(a.node_features == b.node_features);
    CHECK((a.positions - b.positions).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::set<std::pair<int, int>>(a.edge_index.begin(), a.edge_index.end()) ==
          std::set<std::pair<int, int>>(b.edge_index.begin(), b.edge_index.end()));
    CHECK(a.target == b.target);
    REQUIRE(b.edge_features.has_value());
    CHECK((*b.edge_features)(0, 0) == 2.0);
}

TEST_CASE("random graphs survive a serialize-parse cycle") {
    Rng rng(84);
    std::vector<Graph3D> data;
    for (int i = 0; i < 10; ++i) {
        Graph3D g = test::random_connected_graph(rng, 2, 8);
        // Rewrite features into the ingest layout so the cycle is exact.
        std::vector<std::string> elements;
        for (int a = 0; a < g.num_nodes(); ++a)
            elements.push_back(a % 2 == 0 ? "C" : "O");
        g.node_features = featurize_atoms(elements);
        g.id = "cycle" + std::to_string(i);
        g.target = rng.normal();
        data.push_back(std::move(g));
    }
    const auto path = fs::temp_directory_path() / "ggconv_cycle.jsonl";
    write_jsonl(data, path.string());
    const auto again = parse_jsonl(path.string());
    fs::remove(path);

    REQUIRE(again.size() == data.size());
    for (size_t i = 0; i < data.size(); ++i) {
        CHECK(data[i].node_features == again[i].node_features);
        CHECK((data[i].positions - again[i].positions).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(data[i].target.value() == Approx(again[i].target.value()));
    }
}
