#include <doctest.h>

#include <Eigen/Core>
#include <algorithm>
#include <random>
#include <set>

#include "evgeo/gazetteer.hpp"
#include "evgeo/graph.hpp"
#include "test_util.hpp"

using namespace evgeo;
using test::msg;

namespace {

std::string padded(const char* prefix, int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%s%03d", prefix, i);
    return buf;
}

// Random bipartite structure small enough for the dense reference product.
HeteroGraph random_hetero(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nm(2, 50), naux(0, 200);
    const int n_msg = nm(rng), n_word = naux(rng), n_user = naux(rng);

    HeteroGraph g;
    for (int i = 0; i < n_msg; ++i) g.message_ids.push_back(padded("m", i));
    for (int i = 0; i < n_word; ++i) g.word_index[padded("w", i)] = i;
    for (int i = 0; i < n_user; ++i) g.user_index[padded("u", i)] = i;

    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const double p = 2.0 / n_msg;
    for (int m = 0; m < n_msg; ++m) {
        for (int w = 0; w < n_word; ++w)
            if (coin(rng) < p) g.contain_edges.emplace_back(m, w);
        for (int u = 0; u < n_user; ++u) {
            if (coin(rng) < p * 0.3) g.publish_edges.emplace_back(u, m);
            if (coin(rng) < p * 0.3) g.interact_edges.emplace_back(u, m);
        }
    }
    for (auto* edges : {&g.contain_edges, &g.publish_edges, &g.interact_edges}) {
        std::sort(edges->begin(), edges->end());
        edges->erase(std::unique(edges->begin(), edges->end()), edges->end());
    }
    return g;
}

// Dense reference for the projection: clamp(Ww Ww^T + Wu Wu^T), zero diagonal.
Eigen::MatrixXd dense_projection(const HeteroGraph& g) {
    const int n = static_cast<int>(g.message_count());
    Eigen::MatrixXd ww = Eigen::MatrixXd::Zero(n, std::max<int>(1, g.word_index.size()));
    Eigen::MatrixXd wu = Eigen::MatrixXd::Zero(n, std::max<int>(1, g.user_index.size()));
    for (const auto& [m, w] : g.contain_edges) ww(m, w) = 1.0;
    for (const auto& [u, m] : g.publish_edges) wu(m, u) = 1.0;
    for (const auto& [u, m] : g.interact_edges) wu(m, u) = 1.0;
    Eigen::MatrixXd prod = ww * ww.transpose() + wu * wu.transpose();
    Eigen::MatrixXd a = (prod.array() > 0.0).cast<double>();
    a.diagonal().setZero();
    return a;
}

Eigen::MatrixXd adjacency_dense(const std::vector<std::vector<int>>& adj) {
    const int n = static_cast<int>(adj.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j : adj[i]) a(i, j) = 1.0;
    return a;
}

GazetteerEntry entry(std::string name, double lat, double lon) {
    GazetteerEntry e;
    e.canonical_name = std::move(name);
    e.coord = {lat, lon};
    return e;
}

}  // namespace

TEST_CASE("build_hetero_graph node and edge rules") {
    Gazetteer empty_gaz;
    FeatureConfig cfg;
    cfg.word_min_freq = 1;

    SUBCASE("single message") {
        auto m = msg("m1", "", "u1", {"u3"});
        m.tokens = std::vector<std::string>{"南昌", "货车", "大雾"};
        const auto g = build_hetero_graph({m}, {*m.tokens}, cfg, empty_gaz);
        CHECK(g.message_ids == std::vector<std::string>{"m1"});
        CHECK(g.word_index.size() == 3);
        CHECK(g.user_index.size() == 2);  // author u1 + mentioned u3
        CHECK(g.publish_edges.size() == 1);
        CHECK(g.interact_edges.size() == 1);
        CHECK(g.contain_edges.size() == 3);
    }

    SUBCASE("shared mention collapses to one user node") {
        auto a = msg("a", "", "u1", {"u3"});
        auto b = msg("b", "", "u2", {"u3"});
        a.tokens = std::vector<std::string>{"x"};
        b.tokens = std::vector<std::string>{"y"};
        const auto g = build_hetero_graph({a, b}, {*a.tokens, *b.tokens}, cfg, empty_gaz);
        CHECK(g.user_index.size() == 3);  // u1, u2, u3 exactly once
        const int u3 = g.user_index.at("u3");
        int u3_edges = 0;
        for (const auto& [u, m] : g.interact_edges) u3_edges += (u == u3);
        CHECK(u3_edges == 2);
    }

    SUBCASE("message with no qualifying tokens keeps its publish edge") {
        FeatureConfig strict;
        strict.word_min_freq = 5;
        auto m = msg("m1", "", "u1");
        m.tokens = std::vector<std::string>{"once"};
        const auto g = build_hetero_graph({m}, {*m.tokens}, strict, empty_gaz);
        CHECK(g.word_index.empty());
        CHECK(g.contain_edges.empty());
        CHECK(g.publish_edges.size() == 1);
    }

    SUBCASE("word filter: frequency or gazetteer") {
        Gazetteer gaz(std::vector<GazetteerEntry>{entry("南昌", 28.68, 115.86)});
        FeatureConfig f2;
        f2.word_min_freq = 2;
        auto a = msg("a", "", "u1");
        auto b = msg("b", "", "u2");
        a.tokens = std::vector<std::string>{"common", "rare", "南昌"};
        b.tokens = std::vector<std::string>{"common"};
        const auto g = build_hetero_graph({a, b}, {*a.tokens, *b.tokens}, f2, gaz);
        CHECK(g.word_index.count("common") == 1);
        CHECK(g.word_index.count("南昌") == 1);
        CHECK(g.word_index.count("rare") == 0);
    }

    SUBCASE("repeated token yields one contain edge") {
        auto m = msg("m1", "", "u1");
        m.tokens = std::vector<std::string>{"dup", "dup", "dup"};
        const auto g = build_hetero_graph({m}, {*m.tokens}, cfg, empty_gaz);
        CHECK(g.contain_edges.size() == 1);
    }
}

TEST_CASE("project_homogeneous on hand-built graphs") {
    HeteroGraph g;
    g.message_ids = {"m0", "m1", "m2"};
    g.word_index = {{"shared", 0}, {"solo", 1}};
    g.user_index = {{"u0", 0}};
    g.contain_edges = {{0, 0}, {1, 0}, {2, 1}};  // m0,m1 share a word; m2 alone
    g.publish_edges = {{0, 2}};                  // u0 publishes m2 only

    const auto adj = project_homogeneous(g);
    REQUIRE(adj.size() == 3);
    CHECK(adj[0] == std::vector<int>{1});
    CHECK(adj[1] == std::vector<int>{0});
    CHECK(adj[2].empty());

    SUBCASE("three shared neighbors still one edge") {
        g.word_index["extra1"] = 2;
        g.word_index["extra2"] = 3;
        g.contain_edges = {{0, 0}, {0, 2}, {0, 3}, {1, 0}, {1, 2}, {1, 3}, {2, 1}};
        const auto multi = project_homogeneous(g);
        CHECK(multi[0] == std::vector<int>{1});  // clamped, not tripled
    }

    SUBCASE("user neighbor connects too") {
        g.interact_edges = {{0, 0}};  // u0 now touches m0 and m2
        const auto with_user = project_homogeneous(g);
        CHECK(with_user[0] == std::vector<int>{1, 2});
        CHECK(with_user[2] == std::vector<int>{0});
    }
}

TEST_CASE("projection equals the dense clamped product") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 25; ++trial) {
        const auto g = random_hetero(rng);
        const auto sparse = adjacency_dense(project_homogeneous(g));
        const auto dense = dense_projection(g);
        CHECK((sparse - dense).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("projection is symmetric with sorted unique rows") {
    std::mt19937_64 rng(99);
    const auto g = random_hetero(rng);
    const auto adj = project_homogeneous(g);
    for (std::size_t i = 0; i < adj.size(); ++i) {
        CHECK(std::is_sorted(adj[i].begin(), adj[i].end()));
        CHECK(std::adjacent_find(adj[i].begin(), adj[i].end()) == adj[i].end());
        for (int j : adj[i]) {
            CHECK(j != static_cast<int>(i));
            CHECK(std::binary_search(adj[j].begin(), adj[j].end(), static_cast<int>(i)));
        }
    }
}

TEST_CASE("adding a contain edge never deletes an adjacency bit") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        auto g = random_hetero(rng);
        if (g.word_index.empty()) continue;
        const auto before = project_homogeneous(g);

        std::uniform_int_distribution<int> pick_m(0, static_cast<int>(g.message_count()) - 1);
        std::uniform_int_distribution<int> pick_w(0, static_cast<int>(g.word_index.size()) - 1);
        g.contain_edges.emplace_back(pick_m(rng), pick_w(rng));
        std::sort(g.contain_edges.begin(), g.contain_edges.end());
        g.contain_edges.erase(std::unique(g.contain_edges.begin(), g.contain_edges.end()),
                              g.contain_edges.end());

        const auto after = project_homogeneous(g);
        for (std::size_t i = 0; i < before.size(); ++i)
            for (int j : before[i])
                CHECK(std::binary_search(after[i].begin(), after[i].end(), j));
    }
}

TEST_CASE("embed_text") {
    SUBCASE("empty bag is the zero vector") {
        CHECK(embed_text({}, 16).norm() == 0.0);
    }

    SUBCASE("unit norm") {
        for (int dim : {2, 16, 128}) {
            const auto v = embed_text({"heavy", "fog", "highway"}, dim);
            CHECK(v.size() == dim);
            CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-9));
        }
    }

    SUBCASE("order invariance") {
        const auto a = embed_text({"one", "two", "three"}, 32);
        const auto b = embed_text({"three", "one", "two"}, 32);
        CHECK((a - b).norm() == 0.0);
    }

    SUBCASE("deterministic across calls") {
        const auto a = embed_text({"南昌", "大雾"}, 64);
        const auto b = embed_text({"南昌", "大雾"}, 64);
        CHECK((a - b).norm() == 0.0);
    }

    SUBCASE("different bags differ") {
        const auto a = embed_text({"flood"}, 64);
        const auto b = embed_text({"typhoon"}, 64);
        CHECK((a - b).norm() > 0.0);
    }
}

TEST_CASE("initial_features") {
    FeatureConfig cfg;
    cfg.semantic_dim = 128;

    SUBCASE("column count is semantic_dim + 2") {
        auto m = msg("m1", "");
        m.tokens = std::vector<std::string>{"a"};
        const auto x = initial_features({m}, {*m.tokens}, cfg);
        CHECK(x.rows() == 1);
        CHECK(x.cols() == 130);
    }

    SUBCASE("raw rows are embedding then time feature") {
        FeatureConfig raw;
        raw.semantic_dim = 8;
        raw.standardize = false;
        auto m = msg("m1", "", "u1", {}, 1719792000 + 21600);  // 06:00 UTC
        m.tokens = std::vector<std::string>{"fog", "alert"};
        const auto x = initial_features({m}, {*m.tokens}, raw);
        const auto emb = embed_text(*m.tokens, 8);
        CHECK((x.row(0).head(8).transpose() - emb).norm() == 0.0);
        const auto tf = ole_date(m.timestamp);
        CHECK(x(0, 8) == double(tf.integer_days));
        CHECK(x(0, 9) == doctest::Approx(0.25).epsilon(1e-12));
    }

    SUBCASE("identical inputs give identical rows") {
        auto a = msg("a", "", "u1", {}, 1719792000);
        auto b = msg("b", "", "u2", {}, 1719792000);
        a.tokens = std::vector<std::string>{"same", "words"};
        b.tokens = std::vector<std::string>{"same", "words"};
        const auto x = initial_features({a, b}, {*a.tokens, *b.tokens}, cfg);
        CHECK((x.row(0) - x.row(1)).norm() == 0.0);
    }

    SUBCASE("standardized columns have zero mean and unit sd") {
        FeatureConfig small;
        small.semantic_dim = 4;
        std::vector<Message> msgs;
        std::vector<std::vector<std::string>> tokens;
        const char* words[] = {"alpha", "beta", "gamma", "delta", "epsilon"};
        for (int i = 0; i < 5; ++i) {
            msgs.push_back(msg(padded("m", i), "", "u1", {}, 1719792000 + i * 9000));
            tokens.push_back({words[i], words[(i + 1) % 5]});
        }
        const auto x = initial_features(msgs, tokens, small);
        const double n = double(x.rows());
        for (int c = 0; c < x.cols(); ++c) {
            const double mean = x.col(c).mean();
            const double sd = std::sqrt((x.col(c).array() - mean).square().sum() / n);
            const bool constant = (x.col(c).array() == x(0, c)).all();
            if (constant) {
                CHECK(x.col(c).cwiseAbs().maxCoeff() == 0.0);
            } else {
                CHECK(std::abs(mean) < 1e-9);
                CHECK(std::abs(sd - 1.0) < 1e-9);
            }
        }
    }

    SUBCASE("constant column maps to zero") {
        FeatureConfig small;
        small.semantic_dim = 4;
        // Same timestamp everywhere: both time columns are constant.
        auto a = msg("a", "", "u1", {}, 1719792000);
        auto b = msg("b", "", "u2", {}, 1719792000);
        const auto x = initial_features({a, b}, {{"p"}, {"q"}}, small);
        CHECK(x.col(4).cwiseAbs().maxCoeff() == 0.0);
        CHECK(x.col(5).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("build_message_graph end to end shape") {
    Gazetteer gaz(std::vector<GazetteerEntry>{entry("南昌", 28.68, 115.86)});
    FeatureConfig cfg;
    cfg.semantic_dim = 16;
    cfg.word_min_freq = 1;
    std::vector<Message> msgs = {
        msg("a", "大雾 南昌 封闭", "u1"),
        msg("b", "南昌 大雾", "u2"),
        msg("c", "unrelated words entirely", "u3"),
    };
    const auto g = build_message_graph(msgs, cfg, gaz);
    CHECK(g.size() == 3);
    CHECK(g.features.rows() == 3);
    CHECK(g.features.cols() == 18);
    // a and b share 南昌 and 大雾; c shares nothing.
    CHECK(g.adjacency[0] == std::vector<int>{1});
    CHECK(g.adjacency[2].empty());
}

TEST_CASE("graph dumps") {
    test::TempDir dir;
    HeteroGraph g;
    g.message_ids = {"m0", "m1"};
    g.word_index = {{"w", 0}};
    g.contain_edges = {{0, 0}, {1, 0}};
    const auto hetero_path = dir.file("hetero.tsv");
    dump_hetero_graph(g, hetero_path);
    const auto text = test::slurp(hetero_path);
    CHECK(text.find("contain\tm0\tw") != std::string::npos);

    const auto adj_path = dir.file("adj.tsv");
    dump_adjacency(project_homogeneous(g), adj_path);
    CHECK(test::slurp(adj_path) == "0\t1\n");
}
