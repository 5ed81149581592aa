#include "evgeo/detector.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "evgeo/errors.hpp"
#include "evgeo/util.hpp"

namespace evgeo {

using nlohmann::json;

namespace {

// y = A_hat * m with A_hat = D^-1 (A + I); adjacency rows carry no self loops.
Eigen::MatrixXd aggregate(const std::vector<std::vector<int>>& adjacency,
                          const Eigen::MatrixXd& m) {
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Eigen::RowVectorXd acc = m.row(i);
        for (int j : adjacency[i]) acc += m.row(j);
        out.row(i) = acc / static_cast<double>(adjacency[i].size() + 1);
    }
    return out;
}

// y = A_hat^T * m (degrees normalize the source row, not the destination).
Eigen::MatrixXd aggregate_transpose(const std::vector<std::vector<int>>& adjacency,
                                    const Eigen::MatrixXd& m) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double inv_deg = 1.0 / static_cast<double>(adjacency[i].size() + 1);
        out.row(i) += inv_deg * m.row(i);
        for (int j : adjacency[i]) out.row(j) += inv_deg * m.row(i);
    }
    return out;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd p(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const Eigen::RowVectorXd shifted =
            logits.row(i).array() - logits.row(i).maxCoeff();
        const Eigen::RowVectorXd e = shifted.array().exp();
        p.row(i) = e / e.sum();
    }
    return p;
}

// Per-layer intermediates of one full forward pass, kept for backprop.
struct LayerTrace {
    Eigen::MatrixXd lin;        // X * W
    Eigen::MatrixXd ball_in;    // exp_map(lin)
    Eigen::MatrixXd tangent;    // log_map(ball_in)
    Eigen::MatrixXd aggregated; // A_hat * tangent
    Eigen::MatrixXd activated;  // relu(aggregated), identity on last layer
    Eigen::MatrixXd out;        // exp_map(activated)
};

struct ForwardTrace {
    std::vector<LayerTrace> layers;
    Eigen::MatrixXd embedding_tangent;  // log_map(H)
    Eigen::MatrixXd decoded;            // tangent * W_dec + b_dec
    Eigen::MatrixXd probs;
};

void check_shapes(const MessageGraph& graph, const ModelParams& params,
                  const HyperbolicConfig& cfg) {
    if (params.layer_weights.empty()) throw ShapeError("model has no encoder layers");
    if (graph.features.cols() != params.layer_weights.front().rows())
        throw ShapeError("feature dim " + std::to_string(graph.features.cols()) +
                         " does not match first layer rows " +
                         std::to_string(params.layer_weights.front().rows()));
    for (std::size_t l = 0; l + 1 < params.layer_weights.size(); ++l)
        if (params.layer_weights[l].cols() != params.layer_weights[l + 1].rows())
            throw ShapeError("encoder layer dims do not chain at layer " + std::to_string(l));
    if (params.layer_weights.back().cols() != params.decoder_weight.rows())
        throw ShapeError("decoder rows do not match embedding dim");
    if (params.decoder_weight.cols() != params.decoder_bias.size())
        throw ShapeError("decoder bias size mismatch");
    if (params.decoder_weight.cols() != params.classifier_weight.rows())
        throw ShapeError("classifier rows do not match decoder cols");
    if (params.classifier_weight.cols() != params.classifier_bias.size())
        throw ShapeError("classifier bias size mismatch");
    if (std::abs(params.curvature_c - cfg.curvature_c) > 1e-12)
        throw ValidationError("model curvature " + std::to_string(params.curvature_c) +
                              " does not match configured curvature " +
                              std::to_string(cfg.curvature_c));
    if (static_cast<std::size_t>(graph.features.rows()) != graph.adjacency.size())
        throw ShapeError("feature rows do not match adjacency size");
}

ForwardTrace forward(const MessageGraph& graph, const ModelParams& params,
                     const HyperbolicConfig& cfg) {
    check_shapes(graph, params, cfg);
    ForwardTrace t;
    const std::size_t n_layers = params.layer_weights.size();
    Eigen::MatrixXd x = graph.features;
    for (std::size_t l = 0; l < n_layers; ++l) {
        LayerTrace lt;
        lt.lin = x * params.layer_weights[l];
        lt.ball_in = exp_map_rows(lt.lin, cfg);
        lt.tangent = log_map_rows(lt.ball_in, cfg);
        lt.aggregated = aggregate(graph.adjacency, lt.tangent);
        lt.activated = (l + 1 < n_layers) ? lt.aggregated.cwiseMax(0.0) : lt.aggregated;
        lt.out = exp_map_rows(lt.activated, cfg);
        x = lt.out;
        t.layers.push_back(std::move(lt));
    }
    t.embedding_tangent = log_map_rows(t.layers.back().out, cfg);
    t.decoded = (t.embedding_tangent * params.decoder_weight).rowwise() +
                params.decoder_bias.transpose();
    t.probs = softmax_rows((t.decoded * params.classifier_weight).rowwise() +
                           params.classifier_bias.transpose());
    return t;
}

std::size_t stratified_train_count(std::size_t class_size, double fraction) {
    const auto want = static_cast<std::size_t>(std::llround(fraction * class_size));
    return std::min(class_size, std::max<std::size_t>(1, want));
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json values = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) values.push_back(m(i, j));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"values", std::move(values)}};
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& name) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("values"))
        throw ValidationError("checkpoint: malformed matrix " + name);
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& values = j.at("values");
    if (rows < 0 || cols < 0 ||
        values.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
        throw ShapeError("checkpoint: " + name + " claims " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " but holds " + std::to_string(values.size()) +
                         " values");
    Eigen::MatrixXd m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = values[k++].get<double>();
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json values = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) values.push_back(v(i));
    return {{"size", v.size()}, {"values", std::move(values)}};
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& name) {
    if (!j.is_object() || !j.contains("size") || !j.contains("values"))
        throw ValidationError("checkpoint: malformed vector " + name);
    const auto size = j.at("size").get<Eigen::Index>();
    const auto& values = j.at("values");
    if (size < 0 || values.size() != static_cast<std::size_t>(size))
        throw ShapeError("checkpoint: " + name + " claims size " + std::to_string(size) +
                         " but holds " + std::to_string(values.size()) + " values");
    Eigen::VectorXd v(size);
    for (Eigen::Index i = 0; i < size; ++i) v(i) = values[i].get<double>();
    return v;
}

}  // namespace

ModelParams init_params(int input_dim, int hidden_dim, int n_classes, double curvature_c,
                        std::uint64_t seed) {
    if (input_dim < 1 || hidden_dim < 1 || n_classes < 1)
        throw ValidationError("init_params: dimensions must be positive");
    std::mt19937_64 rng(seed);
    auto glorot = [&rng](Eigen::Index rows, Eigen::Index cols) {
        const double s = std::sqrt(6.0 / static_cast<double>(rows + cols));
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j)
                m(i, j) = (2.0 * uniform_unit(rng) - 1.0) * s;
        return m;
    };
    ModelParams p;
    p.layer_weights.push_back(glorot(input_dim, hidden_dim));
    p.layer_weights.push_back(glorot(hidden_dim, hidden_dim));
    p.decoder_weight = glorot(hidden_dim, hidden_dim);
    p.decoder_bias = Eigen::VectorXd::Zero(hidden_dim);
    p.classifier_weight = glorot(hidden_dim, n_classes);
    p.classifier_bias = Eigen::VectorXd::Zero(n_classes);
    p.curvature_c = curvature_c;
    return p;
}

Eigen::MatrixXd encode(const MessageGraph& graph, const ModelParams& params,
                       const HyperbolicConfig& cfg) {
    return forward(graph, params, cfg).layers.back().out;
}

Eigen::MatrixXd decode_classify(const Eigen::MatrixXd& embeddings, const ModelParams& params,
                                const HyperbolicConfig& cfg) {
    if (embeddings.cols() != params.decoder_weight.rows())
        throw ShapeError("decode_classify: embedding dim does not match decoder");
    const Eigen::MatrixXd tangent = log_map_rows(embeddings, cfg);
    const Eigen::MatrixXd decoded =
        (tangent * params.decoder_weight).rowwise() + params.decoder_bias.transpose();
    return softmax_rows((decoded * params.classifier_weight).rowwise() +
                        params.classifier_bias.transpose());
}

double loss_and_grads(const MessageGraph& graph, const ModelParams& params,
                      const HyperbolicConfig& cfg, const std::vector<int>& class_of_row,
                      const std::vector<char>& train_mask, ParamGrads* grads) {
    const auto n = static_cast<std::size_t>(graph.features.rows());
    if (class_of_row.size() != n || train_mask.size() != n)
        throw ShapeError("loss_and_grads: mask/label size mismatch");
    std::size_t n_train = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (train_mask[i]) {
            if (class_of_row[i] < 0 || class_of_row[i] >= params.n_classes())
                throw ValidationError("loss_and_grads: masked row " + std::to_string(i) +
                                      " has no valid class");
            ++n_train;
        }
    if (n_train == 0) throw ValidationError("loss_and_grads: empty train mask");

    const ForwardTrace t = forward(graph, params, cfg);

    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!train_mask[i]) continue;
        const double p = t.probs(static_cast<Eigen::Index>(i), class_of_row[i]);
        loss -= std::log(std::max(p, 1e-300));
    }
    loss /= static_cast<double>(n_train);
    if (grads == nullptr) return loss;

    // d(mean CE)/d(logits) = (P - onehot) / n_train on train rows, 0 elsewhere.
    Eigen::MatrixXd d_logits = Eigen::MatrixXd::Zero(t.probs.rows(), t.probs.cols());
    for (std::size_t i = 0; i < n; ++i) {
        if (!train_mask[i]) continue;
        const auto row = static_cast<Eigen::Index>(i);
        d_logits.row(row) = t.probs.row(row) / static_cast<double>(n_train);
        d_logits(row, class_of_row[i]) -= 1.0 / static_cast<double>(n_train);
    }

    grads->classifier_weight = t.decoded.transpose() * d_logits;
    grads->classifier_bias = d_logits.colwise().sum().transpose();
    Eigen::MatrixXd d_decoded = d_logits * params.classifier_weight.transpose();
    grads->decoder_weight = t.embedding_tangent.transpose() * d_decoded;
    grads->decoder_bias = d_decoded.colwise().sum().transpose();
    Eigen::MatrixXd d_tangent = d_decoded * params.decoder_weight.transpose();

    Eigen::MatrixXd d_out = log_map_rows_vjp(t.layers.back().out, d_tangent, cfg);
    grads->layer_weights.assign(params.layer_weights.size(), Eigen::MatrixXd());
    for (std::size_t l = params.layer_weights.size(); l-- > 0;) {
        const LayerTrace& lt = t.layers[l];
        Eigen::MatrixXd d_act = exp_map_rows_vjp(lt.activated, d_out, cfg);
        if (l + 1 < params.layer_weights.size())
            d_act = d_act.cwiseProduct(
                (lt.aggregated.array() > 0.0).cast<double>().matrix());
        const Eigen::MatrixXd d_tan = aggregate_transpose(graph.adjacency, d_act);
        const Eigen::MatrixXd d_ball = log_map_rows_vjp(lt.ball_in, d_tan, cfg);
        const Eigen::MatrixXd d_lin = exp_map_rows_vjp(lt.lin, d_ball, cfg);
        const Eigen::MatrixXd& layer_in = (l == 0) ? graph.features : t.layers[l - 1].out;
        grads->layer_weights[l] = layer_in.transpose() * d_lin;
        if (l > 0) d_out = d_lin * params.layer_weights[l].transpose();
    }
    return loss;
}

TrainResult train(const MessageGraph& graph, const std::map<std::string, std::string>& labels,
                  const TrainConfig& tcfg, const HyperbolicConfig& hcfg) {
    if (tcfg.epochs < 1) throw ValidationError("train: epochs must be positive");
    if (tcfg.learning_rate <= 0.0) throw ValidationError("train: learning rate must be positive");
    if (tcfg.train_fraction <= 0.0 || tcfg.train_fraction > 1.0)
        throw ValidationError("train: train_fraction must be in (0, 1]");

    std::map<std::string, int> row_of_id;
    for (std::size_t i = 0; i < graph.message_ids.size(); ++i)
        row_of_id[graph.message_ids[i]] = static_cast<int>(i);

    std::set<std::string> class_set;
    for (const auto& [id, label] : labels) {
        if (!row_of_id.count(id))
            throw ValidationError("train: labeled message " + id + " not in graph");
        class_set.insert(label);
    }
    if (class_set.size() < 2)
        throw ValidationError("train: need at least 2 distinct event labels, got " +
                              std::to_string(class_set.size()));

    std::vector<std::string> class_names(class_set.begin(), class_set.end());
    std::map<std::string, int> class_index;
    for (std::size_t c = 0; c < class_names.size(); ++c)
        class_index[class_names[c]] = static_cast<int>(c);

    const std::size_t n = graph.size();
    std::vector<int> class_of_row(n, -1);
    for (const auto& [id, label] : labels)
        class_of_row[row_of_id[id]] = class_index[label];

    // Stratified split: per class, shuffle the row list and take the first
    // train_fraction share (at least one row).
    std::mt19937_64 rng(tcfg.seed);
    std::vector<char> train_mask(n, 0);
    std::vector<std::vector<int>> rows_of_class(class_names.size());
    for (std::size_t i = 0; i < n; ++i)
        if (class_of_row[i] >= 0) rows_of_class[class_of_row[i]].push_back(static_cast<int>(i));
    for (auto& rows : rows_of_class) {
        for (std::size_t i = rows.size(); i-- > 1;) {
            const auto j = static_cast<std::size_t>(uniform_unit(rng) *
                                                    static_cast<double>(i + 1));
            std::swap(rows[i], rows[std::min(j, i)]);
        }
        const std::size_t take = stratified_train_count(rows.size(), tcfg.train_fraction);
        for (std::size_t i = 0; i < take; ++i) train_mask[rows[i]] = 1;
    }

    ModelParams params =
        init_params(static_cast<int>(graph.features.cols()), tcfg.hidden_dim,
                    static_cast<int>(class_names.size()), hcfg.curvature_c, tcfg.seed);
    params.class_names = class_names;

    TrainResult result;
    result.best_loss = std::numeric_limits<double>::infinity();
    ParamGrads grads;
    for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
        const double loss = loss_and_grads(graph, params, hcfg, class_of_row, train_mask, &grads);
        if (!std::isfinite(loss)) throw TrainingError(epoch, "non-finite training loss");
        result.loss_history.push_back(loss);
        if (loss < result.best_loss) {
            result.best_loss = loss;
            result.best_epoch = epoch;
            result.params = params;
        }
        for (std::size_t l = 0; l < params.layer_weights.size(); ++l)
            params.layer_weights[l] -= tcfg.learning_rate * grads.layer_weights[l];
        params.decoder_weight -= tcfg.learning_rate * grads.decoder_weight;
        params.decoder_bias -= tcfg.learning_rate * grads.decoder_bias;
        params.classifier_weight -= tcfg.learning_rate * grads.classifier_weight;
        params.classifier_bias -= tcfg.learning_rate * grads.classifier_bias;
    }
    return result;
}

EventClusterSet detect_events(const std::vector<Message>& messages, const MessageGraph& graph,
                              const ModelParams& params, const HyperbolicConfig& cfg) {
    EventClusterSet out;
    if (messages.empty() || graph.size() == 0) return out;
    if (messages.size() != graph.size())
        throw ShapeError("detect_events: messages do not match graph rows");
    if (params.class_names.size() != static_cast<std::size_t>(params.n_classes()))
        throw ShapeError("detect_events: class names do not match classifier width");
    const Eigen::MatrixXd probs = decode_classify(encode(graph, params, cfg), params, cfg);
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        Eigen::Index best = 0;
        probs.row(i).maxCoeff(&best);
        out.clusters[params.class_names[static_cast<std::size_t>(best)]].push_back(
            graph.message_ids[static_cast<std::size_t>(i)]);
    }
    return out;
}

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const HyperbolicConfig& cfg, std::uint64_t config_hash) {
    json j;
    j["format"] = "evgeo-checkpoint";
    j["version"] = 1;
    j["curvature_c"] = params.curvature_c;
    j["max_tangent_norm"] = cfg.max_tangent_norm;
    j["ball_margin"] = cfg.ball_margin;
    j["config_hash"] = config_hash;
    j["class_names"] = params.class_names;
    json layers = json::array();
    for (const auto& w : params.layer_weights) layers.push_back(matrix_to_json(w));
    j["layer_weights"] = std::move(layers);
    j["decoder_weight"] = matrix_to_json(params.decoder_weight);
    j["decoder_bias"] = vector_to_json(params.decoder_bias);
    j["classifier_weight"] = matrix_to_json(params.classifier_weight);
    j["classifier_bias"] = vector_to_json(params.classifier_bias);
    atomic_write_file(path, j.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError(path, 0, std::string("not a checkpoint: ") + e.what());
    }
    if (!j.is_object() || j.value("format", "") != "evgeo-checkpoint")
        throw ValidationError(path + ": not a checkpoint file");
    if (j.value("version", 0) != 1)
        throw ValidationError(path + ": unsupported checkpoint version");

    Checkpoint ckpt;
    ckpt.params.curvature_c = j.at("curvature_c").get<double>();
    ckpt.cfg.curvature_c = ckpt.params.curvature_c;
    ckpt.cfg.max_tangent_norm = j.at("max_tangent_norm").get<double>();
    ckpt.cfg.ball_margin = j.at("ball_margin").get<double>();
    ckpt.config_hash = j.at("config_hash").get<std::uint64_t>();
    ckpt.params.class_names = j.at("class_names").get<std::vector<std::string>>();
    for (std::size_t l = 0; l < j.at("layer_weights").size(); ++l)
        ckpt.params.layer_weights.push_back(
            matrix_from_json(j.at("layer_weights")[l], "layer " + std::to_string(l)));
    ckpt.params.decoder_weight = matrix_from_json(j.at("decoder_weight"), "decoder_weight");
    ckpt.params.decoder_bias = vector_from_json(j.at("decoder_bias"), "decoder_bias");
    ckpt.params.classifier_weight =
        matrix_from_json(j.at("classifier_weight"), "classifier_weight");
    ckpt.params.classifier_bias = vector_from_json(j.at("classifier_bias"), "classifier_bias");

    if (ckpt.params.layer_weights.empty())
        throw ShapeError(path + ": checkpoint has no encoder layers");
    for (std::size_t l = 0; l + 1 < ckpt.params.layer_weights.size(); ++l)
        if (ckpt.params.layer_weights[l].cols() != ckpt.params.layer_weights[l + 1].rows())
            throw ShapeError(path + ": encoder layer dims do not chain");
    if (ckpt.params.layer_weights.back().cols() != ckpt.params.decoder_weight.rows())
        throw ShapeError(path + ": decoder rows do not match embedding dim");
    if (ckpt.params.decoder_weight.cols() != ckpt.params.decoder_bias.size())
        throw ShapeError(path + ": decoder bias size mismatch");
    if (ckpt.params.decoder_weight.cols() != ckpt.params.classifier_weight.rows())
        throw ShapeError(path + ": classifier rows do not match decoder cols");
    if (ckpt.params.classifier_weight.cols() != ckpt.params.classifier_bias.size())
        throw ShapeError(path + ": classifier bias size mismatch");
    if (static_cast<Eigen::Index>(ckpt.params.class_names.size()) !=
        ckpt.params.classifier_weight.cols())
        throw ShapeError(path + ": class names do not match classifier width");
    return ckpt;
}

}  // namespace evgeo
