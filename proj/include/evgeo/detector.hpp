#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "evgeo/graph.hpp"
#include "evgeo/hyperbolic.hpp"

namespace evgeo {

// Weights of the two-layer hyperbolic encoder, the linear decoder back to
// Euclidean space, and the softmax classifier, plus the curvature they were
// trained with. class_names maps classifier columns to event ids.
struct ModelParams {
    std::vector<Eigen::MatrixXd> layer_weights;
    Eigen::MatrixXd decoder_weight;
    Eigen::VectorXd decoder_bias;
    Eigen::MatrixXd classifier_weight;
    Eigen::VectorXd classifier_bias;
    double curvature_c = 1.0;
    std::vector<std::string> class_names;

    int input_dim() const {
        return layer_weights.empty() ? 0 : static_cast<int>(layer_weights.front().rows());
    }
    int embedding_dim() const {
        return layer_weights.empty() ? 0 : static_cast<int>(layer_weights.back().cols());
    }
    int n_classes() const { return static_cast<int>(classifier_weight.cols()); }
};

struct TrainConfig {
    int epochs = 200;
    double learning_rate = 0.01;
    std::uint64_t seed = 0;
    double train_fraction = 0.7;  // stratified by label
    int hidden_dim = 64;
};

// A partition of the classified messages: event id -> member message ids.
struct EventClusterSet {
    std::map<std::string, std::vector<std::string>> clusters;

    std::size_t message_count() const {
        std::size_t n = 0;
        for (const auto& [id, members] : clusters) n += members.size();
        return n;
    }
};

// Glorot-uniform weights, zero biases, deterministic per seed.
ModelParams init_params(int input_dim, int hidden_dim, int n_classes, double curvature_c,
                        std::uint64_t seed);

// Two rounds of: linear map, exp to the ball, log back to the tangent space,
// neighbor aggregation with the row-normalized self-looped adjacency, ReLU
// (identity on the last round), exp to the ball. Every output row lies
// strictly inside the ball.
Eigen::MatrixXd encode(const MessageGraph& graph, const ModelParams& params,
                       const HyperbolicConfig& cfg);

// log map, linear decode, classify, softmax. Rows sum to 1.
Eigen::MatrixXd decode_classify(const Eigen::MatrixXd& embeddings, const ModelParams& params,
                                const HyperbolicConfig& cfg);

struct TrainResult {
    ModelParams params;               // weights at the best epoch
    std::vector<double> loss_history; // train loss per epoch, before that epoch's update
    int best_epoch = 0;
    double best_loss = 0.0;
};

// Full-batch gradient descent on cross-entropy over a stratified train split.
// Deterministic per config.seed. Throws for < 2 classes, labels missing from
// the graph, and non-finite loss.
TrainResult train(const MessageGraph& graph, const std::map<std::string, std::string>& labels,
                  const TrainConfig& tcfg, const HyperbolicConfig& hcfg);

// Argmax class per message, grouped into clusters keyed by class name.
EventClusterSet detect_events(const std::vector<Message>& messages, const MessageGraph& graph,
                              const ModelParams& params, const HyperbolicConfig& cfg);

// Gradients of the mean cross-entropy over the rows selected by train_mask,
// in ModelParams layout. Exposed for verification against finite differences.
struct ParamGrads {
    std::vector<Eigen::MatrixXd> layer_weights;
    Eigen::MatrixXd decoder_weight;
    Eigen::VectorXd decoder_bias;
    Eigen::MatrixXd classifier_weight;
    Eigen::VectorXd classifier_bias;
};

double loss_and_grads(const MessageGraph& graph, const ModelParams& params,
                      const HyperbolicConfig& cfg, const std::vector<int>& class_of_row,
                      const std::vector<char>& train_mask, ParamGrads* grads);

// Model checkpoint: JSON with shapes, row-major values, curvature, class
// names, and a config hash. Load rejects shape mismatches.
void save_checkpoint(const std::string& path, const ModelParams& params,
                     const HyperbolicConfig& cfg, std::uint64_t config_hash);
struct Checkpoint {
    ModelParams params;
    HyperbolicConfig cfg;
    std::uint64_t config_hash = 0;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace evgeo
