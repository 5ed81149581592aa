#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

#include "evgeo/ingest.hpp"

namespace evgeo {

struct FeatureConfig {
    int semantic_dim = 128;
    int word_min_freq = 2;
    bool standardize = true;
};

// Message/word/user network. Messages are indexed by position in message_ids;
// words and users by their position in the (sorted) index maps. Edges are
// deduplicated sets.
struct HeteroGraph {
    std::vector<std::string> message_ids;
    std::map<std::string, int> word_index;
    std::map<std::string, int> user_index;

    // (message, word) and (user, message) pairs, unique and sorted.
    std::vector<std::pair<int, int>> contain_edges;
    std::vector<std::pair<int, int>> publish_edges;
    std::vector<std::pair<int, int>> interact_edges;

    std::size_t message_count() const { return message_ids.size(); }
};

// Message-only projection. adjacency[i] holds the sorted neighbors of message
// i (no self loops); an edge means "shares at least one word or user".
struct MessageGraph {
    std::vector<std::string> message_ids;
    std::vector<std::vector<int>> adjacency;
    Eigen::MatrixXd features;  // one row per message

    std::size_t size() const { return message_ids.size(); }
};

// A token becomes a word node when its corpus frequency reaches
// config.word_min_freq or it resolves in the gazetteer.
HeteroGraph build_hetero_graph(const std::vector<Message>& messages,
                               const std::vector<std::vector<std::string>>& tokens,
                               const FeatureConfig& config, const Gazetteer& gazetteer);

// A[i][j] = 1 iff messages i and j share >= 1 word or user neighbor. Computed
// per non-message node over its message neighborhood; no dense products.
std::vector<std::vector<int>> project_homogeneous(const HeteroGraph& g);

// Deterministic sign-hash bag of words, L2-normalized (zero vector for an
// empty bag).
Eigen::VectorXd embed_text(const std::vector<std::string>& tokens, int dim);

// Rows are embed_text(tokens_i) ++ [ole integer days, day fraction]. With
// standardize, every column is z-scored over the dataset (constant columns
// map to zero).
Eigen::MatrixXd initial_features(const std::vector<Message>& messages,
                                 const std::vector<std::vector<std::string>>& tokens,
                                 const FeatureConfig& config);

// Convenience: tokenize + hetero graph + projection + features.
MessageGraph build_message_graph(const std::vector<Message>& messages,
                                 const FeatureConfig& config, const Gazetteer& gazetteer);

// Edge-list dumps ("type\tsrc\tdst" for hetero, "i\tj" with i<j for adjacency).
void dump_hetero_graph(const HeteroGraph& g, const std::string& path);
void dump_adjacency(const std::vector<std::vector<int>>& adjacency, const std::string& path);

}  // namespace evgeo
