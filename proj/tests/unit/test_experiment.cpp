#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "ggconv/errors.hpp"
#include "ggconv/experiment.hpp"
#include "ggconv/geometry.hpp"
#include "ggconv/synthetic.hpp"
#include "test_util.hpp"

using namespace ggconv;
using doctest::Approx;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

json read_json(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    json j;
    in >> j;
    return j;
}

}  // namespace

TEST_CASE("synthetic dataset: determinism, connectivity, geometry-driven targets") {
    const auto a = make_synthetic_dataset(12, 7);
    const auto b = make_synthetic_dataset(12, 7);
    REQUIRE(a.size() == 12);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].positions == b[i].positions);  // bitwise determinism
        CHECK(a[i].target.value() == b[i].target.value());
        CHECK(validate(a[i]).empty());
        CHECK(a[i].num_nodes() >= 6);
        CHECK(a[i].num_nodes() <= 14);
        CHECK(a[i].target.value() > 0.0);

        // Every edge respects the cutoff.
        for (const auto& [p, q] : a[i].edge_index) {
            const double d = edge_distance(a[i].positions.row(p).transpose(),
                                           a[i].positions.row(q).transpose());
            CHECK(d < 1.8);
        }
    }
    const auto c = make_synthetic_dataset(12, 8);
    CHECK(c[0].positions != a[0].positions);
}

TEST_CASE("load_dataset parses the synthetic spec") {
    ExperimentConfig cfg;
    cfg.dataset = "synthetic:5:3";
    CHECK(load_dataset(cfg).size() == 5);
    cfg.dataset = "synthetic:bogus";
    CHECK_THROWS_AS(load_dataset(cfg), Error);
    cfg.dataset = "synthetic:0:1";
    CHECK_THROWS_AS(load_dataset(cfg), Error);
}

TEST_CASE("config file values load and are overridable") {
    TempDir dir("ggconv_cfg_test");
    const fs::path cfg_path = dir.path / "config.json";
    {
        std::ofstream out(cfg_path);
        out << R"({"dataset":"synthetic:10:1","model":{"epochs":7,"hidden_dim":16,)"
               R"("neighbor_order":"second"},"seeds":[3,4],"trials":9,)"
               R"("split":{"fractions":[0.6,0.2,0.2],"seed":5},"mode":"geometric-ref",)"
               R"("params":{"r0":1.5}})";
    }
    ExperimentConfig cfg;
    apply_config_file(cfg, cfg_path.string());
    CHECK(cfg.dataset == "synthetic:10:1");
    CHECK(cfg.model.epochs == 7);
    CHECK(cfg.model.hidden_dim == 16);
    CHECK(cfg.model.neighbor_order == NeighborOrder::Second);
    CHECK(cfg.seeds == std::vector<uint64_t>{3, 4});
    CHECK(cfg.trials == 9);
    CHECK(cfg.mode == ExperimentMode::GeometricRef);
    CHECK(cfg.params.r0 == Approx(1.5));
    CHECK(cfg.params.n == Approx(1.0 / 0.22));  // untouched key keeps its default
    REQUIRE(cfg.split.fractions.has_value());
    CHECK((*cfg.split.fractions)[0] == Approx(0.6));

    // A later override (the CLI layer) wins.
    cfg.model.epochs = 2;
    CHECK(cfg.model.epochs == 2);
}

TEST_CASE("cmd_featurize writes statistics that match the geometry oracle") {
    TempDir dir("ggconv_featurize_test");
    ExperimentConfig cfg;
    cfg.dataset = "synthetic:6:11";
    cfg.out_dir = (dir.path / "out").string();
    REQUIRE(cmd_featurize(cfg) == kExitOk);

    const json stats = read_json(fs::path(cfg.out_dir) / "stats.json");
    CHECK(stats.at("num_graphs") == 6);
    const auto data = make_synthetic_dataset(6, 11);
    REQUIRE(stats.at("per_graph").size() == 6);
    for (size_t i = 0; i < 6; ++i) {
        const auto oracle = test::oracle_pair_classes(data[i]);
        const auto& row = stats.at("per_graph")[i];
        CHECK(row.at("num_edges") == oracle.edge.size());
        CHECK(row.at("num_angle_edges") == oracle.angle.size());
        CHECK(row.at("num_dihedral_edges") == oracle.dihedral.size());
    }

    // Histogram totals line up with the per-kind counts.
    size_t edge_total = 0;
    for (const auto& c : stats.at("histograms").at("edge").at("counts"))
        edge_total += c.get<size_t>();
    CHECK(edge_total == stats.at("totals").at("edges").get<size_t>());
}

TEST_CASE("cmd_featurize fails on an empty dataset") {
    TempDir dir("ggconv_featurize_empty");
    const fs::path empty = dir.path / "empty.jsonl";
    std::ofstream(empty).close();
    ExperimentConfig cfg;
    cfg.dataset = empty.string();
    cfg.out_dir = (dir.path / "out").string();
    CHECK_THROWS_AS(cmd_featurize(cfg), Error);
}

TEST_CASE("cmd_train writes metrics, checkpoints, and is deterministic") {
    TempDir dir("ggconv_train_test");
    ExperimentConfig cfg;
    cfg.dataset = "synthetic:30:2";
    cfg.split.fractions = {{0.7, 0.15, 0.15}};
    cfg.model.epochs = 8;
    cfg.model.hidden_dim = 8;
    cfg.seeds = {0, 1};
    cfg.mode = ExperimentMode::GeometricRef;
    cfg.out_dir = (dir.path / "run").string();
    REQUIRE(cmd_train(cfg) == kExitOk);

    const json metrics = read_json(fs::path(cfg.out_dir) / "metrics.json");
    CHECK(metrics.at("mode") == "geometric-ref");
    CHECK(metrics.at("per_seed").size() == 2);
    CHECK(metrics.at("params").at("r0") == Approx(1.39));
    CHECK(metrics.at("params").at("n") == Approx(1.0 / 0.22).epsilon(1e-6));
    CHECK(metrics.at("dataset_info").at("train") == 21);
    CHECK(fs::exists(fs::path(cfg.out_dir) / "model_seed0.json"));
    CHECK(fs::exists(fs::path(cfg.out_dir) / "model_seed1.json"));

    // Re-running the identical config reproduces the metrics byte for byte.
    TempDir dir2("ggconv_train_test2");
    ExperimentConfig cfg2 = cfg;
    cfg2.out_dir = (dir2.path / "run").string();
    REQUIRE(cmd_train(cfg2) == kExitOk);
    json metrics2 = read_json(fs::path(cfg2.out_dir) / "metrics.json");
    metrics2["config"] = metrics.at("config");  // out_dir differs by design
    json metrics_cmp = metrics;
    CHECK(metrics2.dump() == metrics_cmp.dump());
}

TEST_CASE("cmd_train in bho mode is a usage error") {
    ExperimentConfig cfg;
    cfg.dataset = "synthetic:10:1";
    cfg.mode = ExperimentMode::GeometricBho;
    CHECK_THROWS_AS(cmd_train(cfg), std::invalid_argument);
}

TEST_CASE("cmd_bho writes a trial log and resumes from it") {
    TempDir dir("ggconv_bho_test");
    ExperimentConfig cfg;
    cfg.dataset = "synthetic:24:3";
    cfg.split.fractions = {{0.5, 0.25, 0.25}};
    cfg.model.epochs = 4;
    cfg.model.hidden_dim = 4;
    cfg.seeds = {1};
    cfg.trials = 1;
    cfg.out_dir = (dir.path / "run").string();
    REQUIRE(cmd_bho(cfg) == kExitOk);

    const fs::path log = fs::path(cfg.out_dir) / "trials.jsonl";
    {
        std::ifstream in(log);
        std::string line;
        int lines = 0;
        while (std::getline(in, line))
            if (!line.empty()) ++lines;
        CHECK(lines == 1);
    }

    // Resume with a larger budget: the log keeps the old record and the
    // new trials continue from index 1.
    cfg.trials = 3;
    REQUIRE(cmd_bho(cfg) == kExitOk);
    std::vector<json> records;
    {
        std::ifstream in(log);
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) records.push_back(json::parse(line));
    }
    REQUIRE(records.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(records[static_cast<size_t>(i)].at("trial_index") == i);
    for (const auto& r : records) {
        CHECK(r.contains("r0"));
        CHECK(r.contains("n_phi"));
        CHECK(r.contains("status"));
        CHECK(r.contains("wall_time_sec"));
    }

    const json metrics = read_json(fs::path(cfg.out_dir) / "metrics.json");
    CHECK(metrics.at("bho").at("trials") == 3);
    CHECK(metrics.at("bho").at("best_objective").is_number());
}

TEST_CASE("cmd_report builds the comparison table and round-trips as CSV") {
    TempDir dir("ggconv_report_test");
    ExperimentConfig base;
    base.dataset = "synthetic:30:4";
    base.split.fractions = {{0.7, 0.15, 0.15}};
    base.model.epochs = 6;
    base.model.hidden_dim = 8;
    base.seeds = {0, 1, 2, 3, 4};

    ExperimentConfig std_cfg = base;
    std_cfg.mode = ExperimentMode::Standard;
    std_cfg.out_dir = (dir.path / "standard").string();
    REQUIRE(cmd_train(std_cfg) == kExitOk);

    ExperimentConfig geo_cfg = base;
    geo_cfg.mode = ExperimentMode::GeometricRef;
    geo_cfg.out_dir = (dir.path / "geometric").string();
    REQUIRE(cmd_train(geo_cfg) == kExitOk);

    const std::string report_dir = (dir.path / "report").string();
    REQUIRE(cmd_report({std_cfg.out_dir, geo_cfg.out_dir}, report_dir) == kExitOk);

    std::ifstream txt(fs::path(report_dir) / "report.txt");
    REQUIRE(txt.good());
    std::string text((std::istreambuf_iterator<char>(txt)), std::istreambuf_iterator<char>());
    CHECK(text.find("Standard GC") != std::string::npos);
    CHECK(text.find("Geometric GC (Ref) - 3rd Nbrs") != std::string::npos);
    CHECK(text.find("Directional comparison") != std::string::npos);

    // The standard row carries dashes for every parameter column.
    std::istringstream lines(text);
    std::string line;
    bool standard_row_ok = false;
    while (std::getline(lines, line)) {
        if (line.rfind("Standard GC", 0) == 0) {
            int dashes = 0;
            std::istringstream cells(line.substr(11));
            std::string cell;
            while (cells >> cell)
                if (cell == "-") ++dashes;
            standard_row_ok = dashes >= 6;
        }
    }
    CHECK(standard_row_ok);

    // CSV parses back to the same values.
    std::ifstream csv(fs::path(report_dir) / "report.csv");
    REQUIRE(csv.good());
    std::string header, row1, row2;
    std::getline(csv, header);
    std::getline(csv, row1);
    std::getline(csv, row2);
    CHECK(header.rfind("model,", 0) == 0);
    CHECK(row1.find("\"Standard GC\"") == 0);
    const json std_metrics = read_json(fs::path(std_cfg.out_dir) / "metrics.json");
    const double want = std_metrics.at("aggregate").at("val_rmse_mean").get<double>();
    // val_rmse is the 8th CSV column
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream row_stream(row1);
    while (std::getline(row_stream, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() >= 9);
    CHECK(std::stod(cells[7]) == Approx(want).epsilon(1e-4));

    // Missing metrics file is an error.
    CHECK_THROWS_AS(cmd_report({(dir.path / "nope").string()}, report_dir), Error);
}
