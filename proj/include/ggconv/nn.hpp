#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <span>

#include "ggconv/graph.hpp"
#include "ggconv/weighting.hpp"

namespace ggconv {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class Activation { Relu, Tanh, Identity };
enum class Readout { Mean, Sum };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);
std::string_view to_string(Readout r);
Readout readout_from_string(std::string_view name);

/// One graph-convolution layer: a d_in x d_out weight matrix, no bias.
struct GcnLayerParams {
    Matrix omega;
};

/// Linear regression head on the pooled graph vector.
struct HeadParams {
    Vector weight;
    double bias = 0.0;
};

/// The full parameter set plus the nonlinearity/pooling choices the
/// forward pass needs.
struct Model {
    std::vector<GcnLayerParams> layers;
    HeadParams head;
    Activation activation = Activation::Relu;
    Readout readout = Readout::Mean;
};

struct ModelConfig {
    int num_layers = 2;
    int hidden_dim = 64;
    Activation activation = Activation::Relu;
    Readout readout = Readout::Mean;
    double learning_rate = 1e-3;
    int epochs = 50;
    uint64_t seed = 0;
    NeighborOrder neighbor_order = NeighborOrder::Third;
};

/// Graph ready for the model: features, normalized propagation operator,
/// regression target.
struct PreparedGraph {
    Matrix features;
    SparseMatrix op;
    double target = 0.0;
};

struct Gradients {
    std::vector<Matrix> layer_grads;
    Vector head_weight_grad;
    double head_bias_grad = 0.0;
};

struct TrainedModel {
    Model model;
    ModelConfig config;
    std::optional<PowerLawParams> params;  // nullopt = uniform baseline
    // Targets are z-scored on the training set before fitting; predictions
    // map back through mean + std * raw_output.
    double target_mean = 0.0;
    double target_std = 1.0;
    std::vector<double> train_loss;  // per-epoch MSE on standardized targets
    std::vector<double> val_rmse;    // per-epoch RMSE in original units
};

/// Symmetric normalization with unit self loops:
/// A_hat = D^(-1/2) (A + I) D^(-1/2), D_ii = 1 + sum_j w_ij >= 1.
SparseMatrix normalize(const WeightedAdjacency& adj);

/// activation(op * x * omega); the activation is skipped when
/// apply_activation is false (the final layer).
Matrix layer_forward(const Matrix& x, const SparseMatrix& op, const GcnLayerParams& params,
                     Activation activation, bool apply_activation);

/// Per-feature pooling over node rows.
Vector readout(const Matrix& node_states, Readout kind);

/// Full forward pass: stacked convolutions, pooling, linear head.
double model_forward(const Graph3D& graph, const WeightedAdjacency& adj, const Model& model);

double forward_prepared(const PreparedGraph& g, const Model& model);

/// Exact reverse-mode gradients of the mean-squared-error loss over the
/// batch with respect to every layer and head parameter (mean reduction).
Gradients gradients(std::span<const PreparedGraph> batch, const Model& model,
                    double* loss_out = nullptr);

/// Glorot-uniform initialization, deterministic in config.seed.
Model init_model(int input_dim, const ModelConfig& config);

PreparedGraph prepare_graph(const Graph3D& graph, const std::optional<PowerLawParams>& params,
                            NeighborOrder order);
std::vector<PreparedGraph> prepare_dataset(const std::vector<Graph3D>& graphs,
                                           const std::optional<PowerLawParams>& params,
                                           NeighborOrder order);

/// Full-batch Adam training for config.epochs. params selects geometric
/// weighting; nullopt trains the uniform-weight baseline. Deterministic
/// given config.seed. Throws NonFiniteLoss if the loss leaves the reals.
TrainedModel train(const std::vector<Graph3D>& train_set, const std::vector<Graph3D>& val_set,
                   const ModelConfig& config, const std::optional<PowerLawParams>& params);

/// Root-mean-squared prediction error on a dataset.
double evaluate(const TrainedModel& trained, const std::vector<Graph3D>& dataset);
double evaluate_prepared(const Model& model, std::span<const PreparedGraph> dataset);

/// JSON checkpoint with shape headers; see README for the exact layout.
void save_model(const TrainedModel& trained, const std::string& path);
TrainedModel load_model(const std::string& path);

}  // namespace ggconv
