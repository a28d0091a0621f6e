#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ggconv/bho.hpp"
#include "ggconv/errors.hpp"
#include "ggconv/geometry.hpp"
#include "ggconv/graph.hpp"
#include "ggconv/ingest.hpp"
#include "ggconv/nn.hpp"
#include "ggconv/synthetic.hpp"
#include "ggconv/weighting.hpp"

namespace py = pybind11;
using namespace ggconv;

PYBIND11_MODULE(_core, m) {
    m.doc() = "distance-geometric graph convolutions: geometry, power-law edge "
              "weighting, GCN training, Bayesian hyperparameter optimization";

    py::register_exception<Error>(m, "GgconvError");

    // ---- core types ----
    py::class_<Graph3D>(m, "Graph3D")
        .def(py::init<>())
        .def_readwrite("node_features", &Graph3D::node_features)
        .def_readwrite("edge_index", &Graph3D::edge_index)
        .def_readwrite("edge_features", &Graph3D::edge_features)
        .def_readwrite("positions", &Graph3D::positions)
        .def_readwrite("target", &Graph3D::target)
        .def_readwrite("id", &Graph3D::id)
        .def_property_readonly("num_nodes", &Graph3D::num_nodes)
        .def("__repr__", [](const Graph3D& g) {
            return "<Graph3D '" + g.id + "', " + std::to_string(g.num_nodes()) + " nodes, " +
                   std::to_string(g.num_directed_edges()) + " directed edges>";
        });

    m.def("validate", &validate, py::arg("graph"), "List of invariant violations (empty = valid)");

    py::class_<DistanceEntry>(m, "DistanceEntry")
        .def_readonly("i", &DistanceEntry::i)
        .def_readonly("j", &DistanceEntry::j)
        .def_readonly("d", &DistanceEntry::d)
        .def("__repr__", [](const DistanceEntry& e) {
            return "({" + std::to_string(e.i) + ", " + std::to_string(e.j) + "}, " +
                   std::to_string(e.d) + ")";
        });

    py::class_<AngleEntry>(m, "AngleEntry")
        .def_readonly("i", &AngleEntry::i)
        .def_readonly("j", &AngleEntry::j)
        .def_readonly("k", &AngleEntry::k)
        .def_readonly("theta", &AngleEntry::theta);

    py::class_<DihedralEntry>(m, "DihedralEntry")
        .def_readonly("i", &DihedralEntry::i)
        .def_readonly("j", &DihedralEntry::j)
        .def_readonly("k", &DihedralEntry::k)
        .def_readonly("l", &DihedralEntry::l)
        .def_readonly("phi", &DihedralEntry::phi);

    py::class_<PositionalRepr>(m, "PositionalRepr").def_readonly("graph", &PositionalRepr::graph);

    py::class_<AngleGeometricRepr>(m, "AngleGeometricRepr")
        .def_readonly("edge_distances", &AngleGeometricRepr::edge_distances)
        .def_readonly("angles", &AngleGeometricRepr::angles)
        .def_readonly("dihedrals", &AngleGeometricRepr::dihedrals)
        .def_readonly("warnings", &AngleGeometricRepr::warnings);

    py::class_<DistanceGeometricRepr>(m, "DistanceGeometricRepr")
        .def_readonly("num_nodes", &DistanceGeometricRepr::num_nodes)
        .def_readonly("edge_distances", &DistanceGeometricRepr::edge_distances)
        .def_readonly("angle_edge_distances", &DistanceGeometricRepr::angle_edge_distances)
        .def_readonly("dihedral_edge_distances", &DistanceGeometricRepr::dihedral_edge_distances);

    // ---- geometry ----
    py::class_<RigidMotion>(m, "RigidMotion")
        .def_static("make", &RigidMotion::make, py::arg("rotation"), py::arg("translation"))
        .def("apply", py::overload_cast<const Graph3D&>(&RigidMotion::apply, py::const_),
             py::arg("graph"));

    m.def("edge_distance", &edge_distance, py::arg("p_i"), py::arg("p_j"));
    m.def("angle", &angle, py::arg("p_i"), py::arg("p_j"), py::arg("p_k"),
          "Angle at p_j in [0, pi]");
    m.def("dihedral", &dihedral, py::arg("p_i"), py::arg("p_j"), py::arg("p_k"), py::arg("p_l"),
          "Signed torsion in (-pi, pi]");
    m.def("enumerate_angle_triples", &enumerate_angle_triples, py::arg("graph"));
    m.def("enumerate_dihedral_chains", &enumerate_dihedral_chains, py::arg("graph"));
    m.def("build_positional", &build_positional, py::arg("graph"));
    m.def("build_angle_geometric", &build_angle_geometric, py::arg("graph"));
    m.def("build_distance_geometric", &build_distance_geometric, py::arg("graph"));

    // ---- weighting ----
    py::class_<PowerLawParams>(m, "PowerLawParams")
        .def(py::init<>())
        .def(py::init([](double r0, double n, double r0_theta, double n_theta, double r0_phi,
                         double n_phi) {
                 return PowerLawParams{r0, n, r0_theta, n_theta, r0_phi, n_phi};
             }),
             py::arg("r0"), py::arg("n"), py::arg("r0_theta"), py::arg("n_theta"),
             py::arg("r0_phi"), py::arg("n_phi"))
        .def_static("reference", &PowerLawParams::reference)
        .def_readwrite("r0", &PowerLawParams::r0)
        .def_readwrite("n", &PowerLawParams::n)
        .def_readwrite("r0_theta", &PowerLawParams::r0_theta)
        .def_readwrite("n_theta", &PowerLawParams::n_theta)
        .def_readwrite("r0_phi", &PowerLawParams::r0_phi)
        .def_readwrite("n_phi", &PowerLawParams::n_phi)
        .def("__repr__", [](const PowerLawParams& p) {
            return "PowerLawParams(r0=" + std::to_string(p.r0) + ", n=" + std::to_string(p.n) +
                   ", r0_theta=" + std::to_string(p.r0_theta) +
                   ", n_theta=" + std::to_string(p.n_theta) +
                   ", r0_phi=" + std::to_string(p.r0_phi) + ", n_phi=" + std::to_string(p.n_phi) +
                   ")";
        });

    py::enum_<NeighborOrder>(m, "NeighborOrder")
        .value("First", NeighborOrder::First)
        .value("Second", NeighborOrder::Second)
        .value("Third", NeighborOrder::Third);

    py::class_<WeightedAdjacency>(m, "WeightedAdjacency")
        .def_readonly("num_nodes", &WeightedAdjacency::num_nodes)
        .def_readonly("pairs", &WeightedAdjacency::pairs)
        .def_readonly("weights", &WeightedAdjacency::weights)
        .def_readonly("warnings", &WeightedAdjacency::warnings);

    m.def("power_law_weight", &power_law_weight, py::arg("d"), py::arg("r0"), py::arg("n"));
    m.def("assemble_weighted_adjacency", &assemble_weighted_adjacency, py::arg("repr"),
          py::arg("params"), py::arg("order"), py::arg("constant_weight_override") = std::nullopt);
    m.def("uniform_adjacency", &uniform_adjacency, py::arg("graph"));

    // ---- nn ----
    py::enum_<Activation>(m, "Activation")
        .value("Relu", Activation::Relu)
        .value("Tanh", Activation::Tanh)
        .value("Identity", Activation::Identity);
    py::enum_<Readout>(m, "Readout").value("Mean", Readout::Mean).value("Sum", Readout::Sum);

    py::class_<ModelConfig>(m, "ModelConfig")
        .def(py::init<>())
        .def_readwrite("num_layers", &ModelConfig::num_layers)
        .def_readwrite("hidden_dim", &ModelConfig::hidden_dim)
        .def_readwrite("activation", &ModelConfig::activation)
        .def_readwrite("readout", &ModelConfig::readout)
        .def_readwrite("learning_rate", &ModelConfig::learning_rate)
        .def_readwrite("epochs", &ModelConfig::epochs)
        .def_readwrite("seed", &ModelConfig::seed)
        .def_readwrite("neighbor_order", &ModelConfig::neighbor_order);

    py::class_<Model>(m, "Model");

    py::class_<TrainedModel>(m, "TrainedModel")
        .def_readonly("model", &TrainedModel::model)
        .def_readonly("config", &TrainedModel::config)
        .def_readonly("params", &TrainedModel::params)
        .def_readonly("target_mean", &TrainedModel::target_mean)
        .def_readonly("target_std", &TrainedModel::target_std)
        .def_readonly("train_loss", &TrainedModel::train_loss)
        .def_readonly("val_rmse", &TrainedModel::val_rmse);

    m.def("normalize", [](const WeightedAdjacency& adj) { return Matrix(normalize(adj)); },
          py::arg("adjacency"), "Dense copy of the normalized propagation operator");
    m.def("model_forward", &model_forward, py::arg("graph"), py::arg("adjacency"),
          py::arg("model"));
    m.def("train", &train, py::arg("train_set"), py::arg("val_set"), py::arg("config"),
          py::arg("params") = std::nullopt,
          "Full-batch training; params=None trains the uniform-weight baseline");
    m.def("evaluate", &evaluate, py::arg("trained"), py::arg("dataset"),
          "RMSE of the trained model on a dataset");
    m.def("save_model", &save_model, py::arg("trained"), py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));

    // ---- bho ----
    py::class_<Interval>(m, "Interval")
        .def(py::init([](double lo, double hi) { return Interval{lo, hi}; }), py::arg("lo"),
             py::arg("hi"))
        .def_readwrite("lo", &Interval::lo)
        .def_readwrite("hi", &Interval::hi);

    py::class_<HyperparamSpace>(m, "HyperparamSpace")
        .def(py::init<>())
        .def_readwrite("r0", &HyperparamSpace::r0)
        .def_readwrite("n", &HyperparamSpace::n)
        .def_readwrite("r0_theta", &HyperparamSpace::r0_theta)
        .def_readwrite("n_theta", &HyperparamSpace::n_theta)
        .def_readwrite("r0_phi", &HyperparamSpace::r0_phi)
        .def_readwrite("n_phi", &HyperparamSpace::n_phi)
        .def("contains", &HyperparamSpace::contains, py::arg("params"));

    py::class_<TrialRecord>(m, "TrialRecord")
        .def_readonly("trial_index", &TrialRecord::trial_index)
        .def_readonly("point", &TrialRecord::point)
        .def_readonly("objective", &TrialRecord::objective)
        .def_readonly("ok", &TrialRecord::ok)
        .def_readonly("wall_time_sec", &TrialRecord::wall_time_sec);

    py::class_<OptimizeResult>(m, "OptimizeResult")
        .def_readonly("best_point", &OptimizeResult::best_point)
        .def_readonly("best_objective", &OptimizeResult::best_objective)
        .def_readonly("trials", &OptimizeResult::trials);

    m.def(
        "optimize",
        [](const py::function& objective, const HyperparamSpace& space, int total_trials,
           uint64_t seed) {
            // Python exceptions become recorded trial failures, matching the
            // native objective contract.
            const ObjectiveFn wrapped = [&objective](const PowerLawParams& p) -> double {
                try {
                    return objective(p).cast<double>();
                } catch (py::error_already_set& e) {
                    throw Error(std::string("objective raised: ") + e.what());
                }
            };
            return optimize(wrapped, space, total_trials, seed);
        },
        py::arg("objective"), py::arg("space"), py::arg("total_trials"), py::arg("seed") = 0);

    m.def("train_evaluate", &train_evaluate, py::arg("params"), py::arg("train_set"),
          py::arg("val_set"), py::arg("config"));

    // ---- ingest / synthetic ----
    m.def("featurize_atoms",
          [](const std::vector<std::string>& elements) { return featurize_atoms(elements); },
          py::arg("elements"));
    m.def("parse_jsonl",
          [](const std::string& path) { return parse_jsonl(path); }, py::arg("path"));
    m.def("parse_sdf",
          [](const std::string& path, const std::string& target_field) {
              return parse_sdf(path, target_field);
          },
          py::arg("path"), py::arg("target_field") = "");

    py::class_<SplitSpec>(m, "SplitSpec")
        .def(py::init<>())
        .def_readwrite("fractions", &SplitSpec::fractions)
        .def_readwrite("counts", &SplitSpec::counts)
        .def_readwrite("seed", &SplitSpec::seed);

    py::class_<SplitResult>(m, "SplitResult")
        .def_readonly("train", &SplitResult::train)
        .def_readonly("val", &SplitResult::val)
        .def_readonly("test", &SplitResult::test);

    m.def("split", &split, py::arg("dataset"), py::arg("spec"));
    m.def("make_synthetic_dataset", &make_synthetic_dataset, py::arg("count"), py::arg("seed"));

#ifdef GGCONV_VERSION
    m.attr("__version__") = GGCONV_VERSION;
#else
    m.attr("__version__") = "dev";
#endif
}
