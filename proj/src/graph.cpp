#include "evgeo/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>

#include "evgeo/errors.hpp"
#include "evgeo/util.hpp"

namespace evgeo {

namespace {

void sort_unique(std::vector<std::pair<int, int>>& edges) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

}  // namespace

HeteroGraph build_hetero_graph(const std::vector<Message>& messages,
                               const std::vector<std::vector<std::string>>& tokens,
                               const FeatureConfig& config, const Gazetteer& gazetteer) {
    if (messages.empty()) throw ValidationError("build_hetero_graph: empty message list");
    if (tokens.size() != messages.size())
        throw ShapeError("build_hetero_graph: tokens/messages length mismatch");

    std::unordered_map<std::string, int> freq;
    for (const auto& toks : tokens)
        for (const auto& t : toks) ++freq[t];

    HeteroGraph g;
    g.message_ids.reserve(messages.size());
    for (const auto& m : messages) g.message_ids.push_back(m.id);

    // Collect qualifying words and all users first so indices follow sorted
    // key order (std::map) and stay stable across runs.
    for (std::size_t i = 0; i < messages.size(); ++i) {
        for (const auto& t : tokens[i]) {
            if (g.word_index.count(t)) continue;
            if (freq[t] >= config.word_min_freq || gazetteer.resolve(t) != nullptr)
                g.word_index.emplace(t, 0);
        }
        g.user_index.emplace(messages[i].user_id, 0);
        for (const auto& u : messages[i].mentioned_user_ids) g.user_index.emplace(u, 0);
    }
    int next = 0;
    for (auto& [word, idx] : g.word_index) idx = next++;
    next = 0;
    for (auto& [user, idx] : g.user_index) idx = next++;

    for (std::size_t i = 0; i < messages.size(); ++i) {
        const int mi = static_cast<int>(i);
        for (const auto& t : tokens[i]) {
            const auto it = g.word_index.find(t);
            if (it != g.word_index.end()) g.contain_edges.emplace_back(mi, it->second);
        }
        g.publish_edges.emplace_back(g.user_index.at(messages[i].user_id), mi);
        for (const auto& u : messages[i].mentioned_user_ids)
            g.interact_edges.emplace_back(g.user_index.at(u), mi);
    }
    sort_unique(g.contain_edges);
    sort_unique(g.publish_edges);
    sort_unique(g.interact_edges);
    return g;
}

std::vector<std::vector<int>> project_homogeneous(const HeteroGraph& g) {
    const int n = static_cast<int>(g.message_count());

    // Message neighborhood of each non-message node.
    std::vector<std::vector<int>> word_msgs(g.word_index.size());
    for (const auto& [m, w] : g.contain_edges) word_msgs[w].push_back(m);
    std::vector<std::vector<int>> user_msgs(g.user_index.size());
    for (const auto& [u, m] : g.publish_edges) user_msgs[u].push_back(m);
    for (const auto& [u, m] : g.interact_edges) user_msgs[u].push_back(m);

    std::vector<std::vector<int>> adj(n);
    auto connect_clique = [&](std::vector<int>& ms) {
        std::sort(ms.begin(), ms.end());
        ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
        for (std::size_t a = 0; a < ms.size(); ++a)
            for (std::size_t b = a + 1; b < ms.size(); ++b) {
                adj[ms[a]].push_back(ms[b]);
                adj[ms[b]].push_back(ms[a]);
            }
    };
    for (auto& ms : word_msgs) connect_clique(ms);
    for (auto& ms : user_msgs) connect_clique(ms);

    for (auto& row : adj) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    return adj;
}

Eigen::VectorXd embed_text(const std::vector<std::string>& tokens, int dim) {
    if (dim < 2) throw ValidationError("embed_text: dim must be >= 2");
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    for (const auto& t : tokens) {
        const int bucket = static_cast<int>(fnv1a64(t) % static_cast<std::uint64_t>(dim));
        const double sign = (fnv1a64(t, 1) & 1u) ? 1.0 : -1.0;
        v[bucket] += sign;
    }
    const double norm = v.norm();
    if (norm > 0.0) v /= norm;
    return v;
}

Eigen::MatrixXd initial_features(const std::vector<Message>& messages,
                                 const std::vector<std::vector<std::string>>& tokens,
                                 const FeatureConfig& config) {
    if (tokens.size() != messages.size())
        throw ShapeError("initial_features: tokens/messages length mismatch");
    const auto n = static_cast<Eigen::Index>(messages.size());
    const int d = config.semantic_dim;
    Eigen::MatrixXd x(n, d + 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        x.row(i).head(d) = embed_text(tokens[i], d).transpose();
        const TimeFeature tf = ole_date(messages[i].timestamp);
        x(i, d) = static_cast<double>(tf.integer_days);
        x(i, d + 1) = tf.day_fraction;
    }
    if (config.standardize && n > 0) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            auto col = x.col(j);
            const bool constant = (col.array() == col(0)).all();
            if (constant) {
                col.setZero();
                continue;
            }
            const double mean = col.mean();
            const double sd = std::sqrt((col.array() - mean).square().sum() /
                                        static_cast<double>(n));
            col = (col.array() - mean) / sd;
        }
    }
    return x;
}

MessageGraph build_message_graph(const std::vector<Message>& messages,
                                 const FeatureConfig& config, const Gazetteer& gazetteer) {
    const auto tokens = tokenize_all(messages, gazetteer);
    const auto hetero = build_hetero_graph(messages, tokens, config, gazetteer);
    MessageGraph mg;
    mg.message_ids = hetero.message_ids;
    mg.adjacency = project_homogeneous(hetero);
    mg.features = initial_features(messages, tokens, config);
    return mg;
}

void dump_hetero_graph(const HeteroGraph& g, const std::string& path) {
    std::vector<std::string> words(g.word_index.size());
    for (const auto& [w, i] : g.word_index) words[i] = w;
    std::vector<std::string> users(g.user_index.size());
    for (const auto& [u, i] : g.user_index) users[i] = u;

    std::ostringstream out;
    for (const auto& [m, w] : g.contain_edges)
        out << "contain\t" << g.message_ids[m] << '\t' << words[w] << '\n';
    for (const auto& [u, m] : g.publish_edges)
        out << "publish\t" << users[u] << '\t' << g.message_ids[m] << '\n';
    for (const auto& [u, m] : g.interact_edges)
        out << "interact\t" << users[u] << '\t' << g.message_ids[m] << '\n';
    atomic_write_file(path, out.str());
}

void dump_adjacency(const std::vector<std::vector<int>>& adjacency, const std::string& path) {
    std::ostringstream out;
    for (std::size_t i = 0; i < adjacency.size(); ++i)
        for (int j : adjacency[i])
            if (static_cast<int>(i) < j) out << i << '\t' << j << '\n';
    atomic_write_file(path, out.str());
}

}  // namespace evgeo
