#include "ggconv/nn.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ggconv/errors.hpp"
#include "ggconv/geometry.hpp"
#include "ggconv/rng.hpp"

namespace ggconv {

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::Identity: return "identity";
    }
    return "relu";
}

Activation activation_from_string(std::string_view name) {
    if (name == "relu") return Activation::Relu;
    if (name == "tanh") return Activation::Tanh;
    if (name == "identity" || name == "none") return Activation::Identity;
    throw std::invalid_argument("unknown activation: " + std::string(name));
}

std::string_view to_string(Readout r) {
    return r == Readout::Mean ? "mean" : "sum";
}

Readout readout_from_string(std::string_view name) {
    if (name == "mean") return Readout::Mean;
    if (name == "sum") return Readout::Sum;
    throw std::invalid_argument("unknown readout: " + std::string(name));
}

SparseMatrix normalize(const WeightedAdjacency& adj) {
    const int n = adj.num_nodes;
    if (n < 1) throw std::invalid_argument("adjacency must cover at least one node");

    Vector degree = Vector::Ones(n);  // unit self loop per node
    for (size_t e = 0; e < adj.pairs.size(); ++e) degree[adj.pairs[e].first] += adj.weights[e];
    Vector inv_sqrt = degree.cwiseSqrt().cwiseInverse();

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(adj.pairs.size() + static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) triplets.emplace_back(i, i, inv_sqrt[i] * inv_sqrt[i]);
    for (size_t e = 0; e < adj.pairs.size(); ++e) {
        const auto& [i, j] = adj.pairs[e];
        triplets.emplace_back(i, j, adj.weights[e] * inv_sqrt[i] * inv_sqrt[j]);
    }

    SparseMatrix op(n, n);
    op.setFromTriplets(triplets.begin(), triplets.end());
    op.makeCompressed();
    return op;
}

namespace {

Matrix apply_activation(const Matrix& z, Activation act) {
    switch (act) {
        case Activation::Relu: return z.cwiseMax(0.0);
        case Activation::Tanh: return z.array().tanh().matrix();
        case Activation::Identity: return z;
    }
    return z;
}

Matrix activation_grad(const Matrix& z, Activation act) {
    switch (act) {
        case Activation::Relu: return (z.array() > 0.0).cast<double>().matrix();
        case Activation::Tanh: return (1.0 - z.array().tanh().square()).matrix();
        case Activation::Identity: return Matrix::Ones(z.rows(), z.cols());
    }
    return Matrix::Ones(z.rows(), z.cols());
}

struct ForwardCache {
    // Per layer: propagated = op * input, preact = propagated * omega.
    std::vector<Matrix> propagated;
    std::vector<Matrix> preact;
    Matrix output;  // final node states
    Vector pooled;
    double prediction = 0.0;
};

ForwardCache run_forward(const PreparedGraph& g, const Model& model) {
    ForwardCache cache;
    Matrix x = g.features;
    const size_t last = model.layers.size() - 1;
    for (size_t k = 0; k < model.layers.size(); ++k) {
        Matrix propagated = g.op * x;
        Matrix z = propagated * model.layers[k].omega;
        x = (k == last) ? z : apply_activation(z, model.activation);
        cache.propagated.push_back(std::move(propagated));
        cache.preact.push_back(std::move(z));
    }
    cache.output = x;
    cache.pooled = readout(x, model.readout);
    cache.prediction = model.head.weight.dot(cache.pooled) + model.head.bias;
    return cache;
}

}  // namespace

Matrix layer_forward(const Matrix& x, const SparseMatrix& op, const GcnLayerParams& params,
                     Activation activation, bool do_activation) {
    if (x.rows() != op.rows())
        throw std::invalid_argument("feature row count differs from operator size");
    if (x.cols() != params.omega.rows())
        throw std::invalid_argument("feature width differs from layer input dimension");
    Matrix z = (op * x) * params.omega;
    return do_activation ? apply_activation(z, activation) : z;
}

Vector readout(const Matrix& node_states, Readout kind) {
    if (node_states.rows() < 1) throw std::invalid_argument("readout needs at least one node");
    Vector summed = node_states.colwise().sum().transpose();
    if (kind == Readout::Mean) summed /= static_cast<double>(node_states.rows());
    return summed;
}

double forward_prepared(const PreparedGraph& g, const Model& model) {
    return run_forward(g, model).prediction;
}

double model_forward(const Graph3D& graph, const WeightedAdjacency& adj, const Model& model) {
    PreparedGraph g{graph.node_features, normalize(adj), graph.target.value_or(0.0)};
    return forward_prepared(g, model);
}

Gradients gradients(std::span<const PreparedGraph> batch, const Model& model, double* loss_out) {
    if (batch.empty()) throw std::invalid_argument("gradient batch must be non-empty");

    Gradients grads;
    grads.layer_grads.reserve(model.layers.size());
    for (const auto& layer : model.layers)
        grads.layer_grads.push_back(Matrix::Zero(layer.omega.rows(), layer.omega.cols()));
    grads.head_weight_grad = Vector::Zero(model.head.weight.size());

    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    const size_t last = model.layers.size() - 1;

    for (const auto& g : batch) {
        ForwardCache cache = run_forward(g, model);
        const double err = cache.prediction - g.target;
        loss += err * err * inv_batch;

        const double dpred = 2.0 * err * inv_batch;
        grads.head_weight_grad += dpred * cache.pooled;
        grads.head_bias_grad += dpred;

        // Pooling backward: every node row receives dh (scaled for mean).
        Vector dh = dpred * model.head.weight;
        const double pool_scale =
            model.readout == Readout::Mean ? 1.0 / static_cast<double>(cache.output.rows()) : 1.0;
        Matrix dx = pool_scale * (Vector::Ones(cache.output.rows()) * dh.transpose());

        for (size_t k = model.layers.size(); k-- > 0;) {
            Matrix dz = (k == last)
                            ? std::move(dx)
                            : Matrix(dx.cwiseProduct(activation_grad(cache.preact[k], model.activation)));
            grads.layer_grads[k] += cache.propagated[k].transpose() * dz;
            if (k > 0) dx = g.op * (dz * model.layers[k].omega.transpose());
        }
    }

    if (loss_out) *loss_out = loss;
    return grads;
}

Model init_model(int input_dim, const ModelConfig& config) {
    if (config.num_layers < 1) throw std::invalid_argument("num_layers must be >= 1");
    if (config.hidden_dim < 1) throw std::invalid_argument("hidden_dim must be >= 1");

    Model model;
    model.activation = config.activation;
    model.readout = config.readout;
    Rng rng(config.seed);

    auto glorot = [&rng](int rows, int cols) {
        const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
        Matrix m(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-limit, limit);
        return m;
    };

    int d_in = input_dim;
    for (int k = 0; k < config.num_layers; ++k) {
        model.layers.push_back({glorot(d_in, config.hidden_dim)});
        d_in = config.hidden_dim;
    }
    Matrix head = glorot(d_in, 1);
    model.head.weight = head.col(0);
    model.head.bias = 0.0;
    return model;
}

PreparedGraph prepare_graph(const Graph3D& graph, const std::optional<PowerLawParams>& params,
                            NeighborOrder order) {
    WeightedAdjacency adj =
        params ? assemble_weighted_adjacency(build_distance_geometric(graph), *params, order)
               : uniform_adjacency(graph);
    return PreparedGraph{graph.node_features, normalize(adj), graph.target.value_or(0.0)};
}

std::vector<PreparedGraph> prepare_dataset(const std::vector<Graph3D>& graphs,
                                           const std::optional<PowerLawParams>& params,
                                           NeighborOrder order) {
    std::vector<PreparedGraph> out;
    out.reserve(graphs.size());
    for (const auto& g : graphs) {
        if (!g.target)
            throw ValidationError(g.id, {"graph has no regression target"});
        out.push_back(prepare_graph(g, params, order));
    }
    return out;
}

TrainedModel train(const std::vector<Graph3D>& train_set, const std::vector<Graph3D>& val_set,
                   const ModelConfig& config, const std::optional<PowerLawParams>& params) {
    if (train_set.empty() || val_set.empty())
        throw std::invalid_argument("train and validation sets must be non-empty");
    if (config.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (!(config.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");

    auto prepared_train = prepare_dataset(train_set, params, config.neighbor_order);
    auto prepared_val = prepare_dataset(val_set, params, config.neighbor_order);

    // Z-score the targets on the training set so the optimizer works at
    // unit scale regardless of the target's physical range.
    double t_mean = 0.0;
    for (const auto& g : prepared_train) t_mean += g.target;
    t_mean /= static_cast<double>(prepared_train.size());
    double t_var = 0.0;
    for (const auto& g : prepared_train) t_var += (g.target - t_mean) * (g.target - t_mean);
    t_var /= static_cast<double>(prepared_train.size());
    const double t_std = t_var > 1e-24 ? std::sqrt(t_var) : 1.0;
    for (auto& g : prepared_train) g.target = (g.target - t_mean) / t_std;
    for (auto& g : prepared_val) g.target = (g.target - t_mean) / t_std;

    const int input_dim = static_cast<int>(prepared_train.front().features.cols());
    for (const auto& g : prepared_train)
        if (g.features.cols() != input_dim)
            throw std::invalid_argument("inconsistent node feature widths in training set");

    TrainedModel trained;
    trained.config = config;
    trained.params = params;
    trained.target_mean = t_mean;
    trained.target_std = t_std;
    trained.model = init_model(input_dim, config);
    Model& model = trained.model;

    // Adam state per tensor.
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::vector<Matrix> m_omega, v_omega;
    for (const auto& layer : model.layers) {
        m_omega.push_back(Matrix::Zero(layer.omega.rows(), layer.omega.cols()));
        v_omega.push_back(Matrix::Zero(layer.omega.rows(), layer.omega.cols()));
    }
    Vector m_head = Vector::Zero(model.head.weight.size());
    Vector v_head = Vector::Zero(model.head.weight.size());
    double m_bias = 0.0, v_bias = 0.0;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        double loss = 0.0;
        Gradients grads = gradients(prepared_train, model, &loss);
        if (!std::isfinite(loss)) {
            std::ostringstream os;
            os << "training loss became non-finite at epoch " << epoch << " (lr "
               << config.learning_rate << ", " << train_set.size() << " graphs)";
            throw NonFiniteLoss(os.str());
        }

        const double bc1 = 1.0 - std::pow(beta1, epoch);
        const double bc2 = 1.0 - std::pow(beta2, epoch);
        auto adam_step = [&](auto& param, auto& m, auto& v, const auto& g) {
            m = beta1 * m + (1.0 - beta1) * g;
            v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
            param -= (config.learning_rate * (m / bc1).array() /
                      ((v / bc2).array().sqrt() + eps))
                         .matrix();
        };
        for (size_t k = 0; k < model.layers.size(); ++k)
            adam_step(model.layers[k].omega, m_omega[k], v_omega[k], grads.layer_grads[k]);
        adam_step(model.head.weight, m_head, v_head, grads.head_weight_grad);
        {
            const double g = grads.head_bias_grad;
            m_bias = beta1 * m_bias + (1.0 - beta1) * g;
            v_bias = beta2 * v_bias + (1.0 - beta2) * g * g;
            model.head.bias -= config.learning_rate * (m_bias / bc1) /
                               (std::sqrt(v_bias / bc2) + eps);
        }

        trained.train_loss.push_back(loss);
        // Errors scale linearly with the target spread, so the original-unit
        // RMSE is the standardized one times target_std.
        trained.val_rmse.push_back(evaluate_prepared(model, prepared_val) * t_std);
    }

    return trained;
}

double evaluate_prepared(const Model& model, std::span<const PreparedGraph> dataset) {
    if (dataset.empty()) throw std::invalid_argument("evaluation set must be non-empty");
    double sum_sq = 0.0;
    for (const auto& g : dataset) {
        const double err = forward_prepared(g, model) - g.target;
        sum_sq += err * err;
    }
    return std::sqrt(sum_sq / static_cast<double>(dataset.size()));
}

double evaluate(const TrainedModel& trained, const std::vector<Graph3D>& dataset) {
    const auto prepared = prepare_dataset(dataset, trained.params, trained.config.neighbor_order);
    double sum_sq = 0.0;
    for (const auto& g : prepared) {
        const double pred =
            trained.target_mean + trained.target_std * forward_prepared(g, trained.model);
        const double err = pred - g.target;
        sum_sq += err * err;
    }
    return std::sqrt(sum_sq / static_cast<double>(prepared.size()));
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    std::vector<double> data;
    data.reserve(static_cast<size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    j["data"] = std::move(data);  // row-major
    return j;
}

Matrix matrix_from_json(const nlohmann::json& j) {
    const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols)
        throw ParseError(0, "tensor payload size does not match its shape header");
    Matrix m(rows, cols);
    size_t idx = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[idx++];
    return m;
}

nlohmann::json params_to_json(const PowerLawParams& p) {
    return {{"r0", p.r0},           {"n", p.n},           {"r0_theta", p.r0_theta},
            {"n_theta", p.n_theta}, {"r0_phi", p.r0_phi}, {"n_phi", p.n_phi}};
}

PowerLawParams params_from_json(const nlohmann::json& j) {
    PowerLawParams p;
    p.r0 = j.at("r0").get<double>();
    p.n = j.at("n").get<double>();
    p.r0_theta = j.at("r0_theta").get<double>();
    p.n_theta = j.at("n_theta").get<double>();
    p.r0_phi = j.at("r0_phi").get<double>();
    p.n_phi = j.at("n_phi").get<double>();
    return p;
}

}  // namespace

void save_model(const TrainedModel& trained, const std::string& path) {
    nlohmann::json j;
    j["format"] = "ggconv-model-v1";
    j["config"] = {{"num_layers", trained.config.num_layers},
                   {"hidden_dim", trained.config.hidden_dim},
                   {"activation", std::string(to_string(trained.config.activation))},
                   {"readout", std::string(to_string(trained.config.readout))},
                   {"learning_rate", trained.config.learning_rate},
                   {"epochs", trained.config.epochs},
                   {"seed", trained.config.seed},
                   {"neighbor_order", std::string(to_string(trained.config.neighbor_order))}};
    j["weighting"] = trained.params ? params_to_json(*trained.params) : nlohmann::json(nullptr);
    j["target_scaling"] = {{"mean", trained.target_mean}, {"std", trained.target_std}};
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : trained.model.layers) layers.push_back(matrix_to_json(layer.omega));
    j["layers"] = std::move(layers);
    j["head"] = {{"weight", std::vector<double>(trained.model.head.weight.begin(),
                                                trained.model.head.weight.end())},
                 {"bias", trained.model.head.bias}};
    j["history"] = {{"train_loss", trained.train_loss}, {"val_rmse", trained.val_rmse}};

    std::ofstream out(path);
    if (!out) throw Error("cannot open checkpoint path for writing: " + path);
    out << j.dump(2) << "\n";
}

TrainedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open checkpoint: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("checkpoint is not valid JSON: ") + e.what());
    }
    if (j.value("format", "") != "ggconv-model-v1")
        throw UnsupportedFormat("unknown checkpoint format tag");

    TrainedModel trained;
    const auto& cfg = j.at("config");
    trained.config.num_layers = cfg.at("num_layers").get<int>();
    trained.config.hidden_dim = cfg.at("hidden_dim").get<int>();
    trained.config.activation = activation_from_string(cfg.at("activation").get<std::string>());
    trained.config.readout = readout_from_string(cfg.at("readout").get<std::string>());
    trained.config.learning_rate = cfg.at("learning_rate").get<double>();
    trained.config.epochs = cfg.at("epochs").get<int>();
    trained.config.seed = cfg.at("seed").get<uint64_t>();
    trained.config.neighbor_order =
        neighbor_order_from_string(cfg.at("neighbor_order").get<std::string>());

    if (!j.at("weighting").is_null()) trained.params = params_from_json(j.at("weighting"));
    trained.target_mean = j.at("target_scaling").at("mean").get<double>();
    trained.target_std = j.at("target_scaling").at("std").get<double>();

    trained.model.activation = trained.config.activation;
    trained.model.readout = trained.config.readout;
    for (const auto& layer : j.at("layers")) trained.model.layers.push_back({matrix_from_json(layer)});
    const auto head_w = j.at("head").at("weight").get<std::vector<double>>();
    trained.model.head.weight = Eigen::Map<const Vector>(head_w.data(), head_w.size());
    trained.model.head.bias = j.at("head").at("bias").get<double>();

    trained.train_loss = j.at("history").at("train_loss").get<std::vector<double>>();
    trained.val_rmse = j.at("history").at("val_rmse").get<std::vector<double>>();
    return trained;
}

}  // namespace ggconv
