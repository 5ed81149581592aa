// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// the exit code is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "evgeo/config.hpp"
#include "evgeo/detector.hpp"
#include "evgeo/eval.hpp"
#include "evgeo/gazetteer.hpp"
#include "evgeo/geoloc.hpp"
#include "evgeo/graph.hpp"
#include "evgeo/hyperbolic.hpp"
#include "evgeo/pipeline.hpp"
#include "fixture.hpp"
#include "test_util.hpp"

namespace {

using namespace evgeo;
using Clock = std::chrono::steady_clock;

// Shared artifacts: the detection criterion trains once and the end-to-end
// criterion reuses its clusters.
struct Context {
    std::vector<Message> messages;
    Gazetteer gazetteer;
    std::optional<EventClusterSet> clusters;
};

std::string fmt(double v, int prec = 2) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
    return buf;
}

// ---- criterion 1: tangent/ball maps invert each other --------------------

std::optional<std::string> check_bijection() {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> radius(1e-6, 3.0);
    const int dim = 8;
    for (const double c : {0.5, 1.0, 2.0}) {
        HyperbolicConfig cfg;
        cfg.curvature_c = c;
        const double ball = 1.0 / std::sqrt(c);
        double worst = 0.0;
        for (int i = 0; i < 10000; ++i) {
            Eigen::VectorXd alpha(dim);
            for (int d = 0; d < dim; ++d) alpha(d) = normal(rng);
            alpha *= radius(rng) / alpha.norm();

            const Eigen::VectorXd beta = exp_map(alpha, cfg);
            if (beta.norm() >= ball)
                return "mapped point ‖β‖=" + fmt(beta.norm(), 9) + " escapes the c=" + fmt(c, 1) +
                       " ball";
            const Eigen::VectorXd back = log_map(beta, cfg);
            worst = std::max(worst, (back - alpha).norm() / alpha.norm());
        }
        if (worst >= 1e-9)
            return "c=" + fmt(c, 1) + " worst relative round-trip error " + fmt(worst, 12);
    }
    return std::nullopt;
}

// ---- criterion 2: sparse projection equals the dense incidence product ---

HeteroGraph random_hetero(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nm(2, 50), naux(0, 200);
    const int n_msg = nm(rng), n_word = naux(rng), n_user = naux(rng);

    HeteroGraph g;
    for (int i = 0; i < n_msg; ++i) g.message_ids.push_back("m" + std::to_string(i));
    for (int i = 0; i < n_word; ++i) g.word_index["w" + std::to_string(i)] = i;
    for (int i = 0; i < n_user; ++i) g.user_index["u" + std::to_string(i)] = i;

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

std::optional<std::string> check_projection() {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const HeteroGraph g = random_hetero(rng);
        const int n = static_cast<int>(g.message_count());

        Eigen::MatrixXd ww = Eigen::MatrixXd::Zero(n, std::max<int>(1, g.word_index.size()));
        Eigen::MatrixXd wu = Eigen::MatrixXd::Zero(n, std::max<int>(1, g.user_index.size()));
        for (const auto& [m, w] : g.contain_edges) ww(m, w) = 1.0;
        for (const auto& [u, m] : g.publish_edges) wu(m, u) = 1.0;
        for (const auto& [u, m] : g.interact_edges) wu(m, u) = 1.0;
        Eigen::MatrixXd prod = ww * ww.transpose() + wu * wu.transpose();
        Eigen::MatrixXd dense = (prod.array() > 0.0).cast<double>();
        dense.diagonal().setZero();

        const auto adjacency = project_homogeneous(g);
        Eigen::MatrixXd sparse = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j : adjacency[i]) sparse(i, j) = 1.0;

        if ((sparse - dense).cwiseAbs().maxCoeff() != 0.0)
            return "projection disagrees with the dense reference on trial " +
                   std::to_string(trial);
    }
    return std::nullopt;
}

// ---- criterion 3: analytic gradients match finite differences ------------

double max_grad_mismatch(const MessageGraph& graph, ModelParams params,
                         const HyperbolicConfig& cfg, const std::vector<int>& class_of_row,
                         const std::vector<char>& mask) {
    ParamGrads grads;
    loss_and_grads(graph, params, cfg, class_of_row, mask, &grads);

    std::vector<std::pair<double*, double>> entries;
    auto add_mat = [&](Eigen::MatrixXd& p, const Eigen::MatrixXd& g) {
        for (int i = 0; i < p.size(); ++i) entries.emplace_back(p.data() + i, g.data()[i]);
    };
    auto add_vec = [&](Eigen::VectorXd& p, const Eigen::VectorXd& g) {
        for (int i = 0; i < p.size(); ++i) entries.emplace_back(p.data() + i, g.data()[i]);
    };
    for (std::size_t l = 0; l < params.layer_weights.size(); ++l)
        add_mat(params.layer_weights[l], grads.layer_weights[l]);
    add_mat(params.decoder_weight, grads.decoder_weight);
    add_vec(params.decoder_bias, grads.decoder_bias);
    add_mat(params.classifier_weight, grads.classifier_weight);
    add_vec(params.classifier_bias, grads.classifier_bias);

    const double eps = 1e-5;
    double worst = 0.0;
    for (auto& [ptr, analytic] : entries) {
        const double saved = *ptr;
        *ptr = saved + eps;
        const double up = loss_and_grads(graph, params, cfg, class_of_row, mask, nullptr);
        *ptr = saved - eps;
        const double down = loss_and_grads(graph, params, cfg, class_of_row, mask, nullptr);
        *ptr = saved;
        const double fd = (up - down) / (2.0 * eps);
        // Floor the denominator at the tolerance itself: entries below it are
        // effectively compared absolutely (atol 1e-8), since central-difference
        // roundoff (~1e-10) swamps a relative comparison near zero.
        const double denom = std::max({std::abs(fd), std::abs(analytic), 1e-4});
        worst = std::max(worst, std::abs(fd - analytic) / denom);
    }
    return worst;
}

std::optional<std::string> check_gradients() {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const int n = 6, dim = 5;
    HyperbolicConfig cfg;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd x(n, dim);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < dim; ++j) x(i, j) = normal(rng);
        MessageGraph graph;
        for (int i = 0; i < n; ++i) graph.message_ids.push_back("m" + std::to_string(i));
        graph.adjacency.assign(n, {});
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (coin(rng) < 0.4) {
                    graph.adjacency[i].push_back(j);
                    graph.adjacency[j].push_back(i);
                }
        graph.features = x;

        std::vector<int> class_of_row(n);
        for (int i = 0; i < n; ++i) class_of_row[i] = i % 2;  // both classes present
        const std::vector<char> mask(n, 1);
        const auto params =
            init_params(dim, 4, 2, cfg.curvature_c, 100 + static_cast<unsigned>(trial));
        worst = std::max(worst, max_grad_mismatch(graph, params, cfg, class_of_row, mask));
    }
    if (worst >= 1e-4) return "worst relative gradient mismatch " + fmt(worst, 8);
    return std::nullopt;
}

// ---- criterion 4: planted events are recovered ----------------------------

std::optional<std::string> check_detection(Context& ctx) {
    ctx.messages = fixture::make_fixture();
    ctx.gazetteer = Gazetteer(fixture::fixture_gazetteer());

    std::map<std::string, std::string> labels;
    for (const auto& m : ctx.messages) labels[m.id] = *m.event_label;

    const MessageGraph graph = build_message_graph(ctx.messages, FeatureConfig{}, ctx.gazetteer);
    TrainConfig tcfg;
    tcfg.epochs = 200;
    tcfg.learning_rate = 0.1;
    tcfg.seed = 42;
    const TrainResult trained = train(graph, labels, tcfg, HyperbolicConfig{});
    ctx.clusters = detect_events(ctx.messages, graph, trained.params, HyperbolicConfig{});

    int correct = 0;
    for (const auto& [event_id, members] : ctx.clusters->clusters)
        for (const auto& id : members) correct += (labels.at(id) == event_id);
    const double accuracy = double(correct) / double(ctx.messages.size());
    if (accuracy < 0.90)
        return "detection accuracy " + fmt(accuracy, 4) + " < 0.90 (best training loss " +
               fmt(trained.best_loss, 4) + ")";
    return std::nullopt;
}

// ---- criterion 5: the chain filter removes exactly the planted noise -----

std::optional<std::string> check_noise_filter(Context& ctx) {
    if (ctx.messages.empty()) ctx.messages = fixture::make_fixture();
    if (ctx.gazetteer.size() == 0) ctx.gazetteer = Gazetteer(fixture::fixture_gazetteer());

    int total_noise = 0;
    for (const auto& spec : fixture::fixture_events()) {
        std::vector<Message> cluster;
        for (const auto& m : ctx.messages)
            if (*m.event_label == spec.event_id) cluster.push_back(m);

        const auto mentions = extract_toponyms(cluster, ctx.gazetteer);
        int in_province = 0, noise = 0;
        for (const auto& m : mentions) {
            if (m.entry == nullptr) return spec.event_id + ": unresolved mention " + m.surface;
            const auto& prov = m.entry->chain.at(Level::province);
            if (prov && *prov == spec.province)
                ++in_province;
            else
                ++noise;
        }

        GeolocationConfig cfg;
        const auto chain = build_chain(mentions, cfg);
        const auto kept = hist_filter(mentions, chain, cfg);

        if (static_cast<int>(kept.size()) != in_province)
            return spec.event_id + ": kept " + std::to_string(kept.size()) + " of " +
                   std::to_string(in_province) + " in-province mentions";
        for (const auto& m : kept) {
            const auto& prov = m.entry->chain.at(Level::province);
            if (!prov || *prov != spec.province)
                return spec.event_id + ": out-of-province mention \"" + m.surface +
                       "\" survived the filter";
        }
        total_noise += noise;
    }
    if (total_noise == 0) return "fixture planted no noise mentions; criterion is vacuous";
    return std::nullopt;
}

// ---- criterion 6: end-to-end error bound and ablation ordering -----------

std::optional<std::string> check_end_to_end(Context& ctx) {
    if (!ctx.clusters) return "detection criterion did not produce clusters";

    std::map<std::string, const Message*> by_id;
    for (const auto& m : ctx.messages) by_id[m.id] = &m;
    std::map<std::string, GeoPoint> truths;
    for (const auto& spec : fixture::fixture_events()) truths[spec.event_id] = spec.center;

    auto locate_all = [&](const GeolocationConfig& cfg) {
        std::map<std::string, GeoPoint> estimates;
        for (const auto& [event_id, members] : ctx.clusters->clusters) {
            std::vector<Message> cluster;
            for (const auto& id : members) cluster.push_back(*by_id.at(id));
            estimates[event_id] = geolocate_event(event_id, cluster, ctx.gazetteer, cfg).point;
        }
        return estimates;
    };

    const auto full = locate_all(GeolocationConfig{});
    if (full.size() != truths.size())
        return "located " + std::to_string(full.size()) + " of " +
               std::to_string(truths.size()) + " events";
    const auto report = evaluate(full, truths, {100.0, 200.0, 300.0, 400.0});
    for (const auto& [event_id, err] : report.per_event)
        if (err > 30.0) return event_id + " error " + fmt(err) + " km > 30 km";

    GeolocationConfig ablated;
    ablated.enable_fit = false;
    ablated.enable_hist = false;
    const auto degraded = evaluate(locate_all(ablated), truths, {100.0});
    if (!(degraded.mean_km > report.mean_km))
        return "ablated mean " + fmt(degraded.mean_km) + " km is not worse than full " +
               fmt(report.mean_km) + " km";
    return std::nullopt;
}

// ---- criterion 7: metric oracles ------------------------------------------

std::optional<std::string> check_metrics() {
    const double half = std::numbers::pi * kEarthRadiusKm;
    if (std::abs(haversine({0.0, 0.0}, {0.0, 180.0}) - half) > 1e-6)
        return "antipodal distance is not pi*r";

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> lat(-80.0, 80.0), lon(-180.0, 180.0);
    const double deg = std::numbers::pi / 180.0;
    int checked = 0;
    while (checked < 100) {
        const GeoPoint a{lat(rng), lon(rng)}, b{lat(rng), lon(rng)};
        const double d = haversine(a, b);
        if (d < 50.0) continue;
        ++checked;
        const double inner =
            std::sin(a.lat * deg) * std::sin(b.lat * deg) +
            std::cos(a.lat * deg) * std::cos(b.lat * deg) * std::cos((b.lon - a.lon) * deg);
        const double oracle = kEarthRadiusKm * std::acos(std::clamp(inner, -1.0, 1.0));
        if (std::abs(d - oracle) > 0.005 * oracle)
            return "haversine " + fmt(d, 4) + " vs oracle " + fmt(oracle, 4);
    }

    // 37 truth events, 32 located at staged errors, 5 unlocated.
    std::map<std::string, GeoPoint> truths, estimates;
    std::vector<double> planted;
    planted.insert(planted.end(), 9, 50.0);
    planted.insert(planted.end(), 9, 150.0);
    planted.insert(planted.end(), 11, 250.0);
    planted.insert(planted.end(), 3, 350.0);
    for (std::size_t i = 0; i < planted.size(); ++i) {
        const GeoPoint t{0.0, -170.0 + 9.0 * double(i)};
        const std::string id = "e" + std::to_string(i);
        truths[id] = t;
        estimates[id] = {t.lat + planted[i] / kEarthRadiusKm * 180.0 / std::numbers::pi, t.lon};
    }
    for (int i = 32; i < 37; ++i) truths["e" + std::to_string(i)] = {40.0, 40.0};

    const std::vector<std::pair<double, double>> expected = {
        {100.0, 24.32}, {200.0, 48.65}, {300.0, 78.38}, {400.0, 86.49}};
    for (const auto& [threshold, pct] : expected) {
        const double got = std::round(acc_at(estimates, truths, threshold) * 10000.0) / 100.0;
        if (got != pct)
            return "ACC@" + fmt(threshold, 0) + " = " + fmt(got) + "%, expected " + fmt(pct) + "%";
    }
    return std::nullopt;
}

// ---- criterion 8: identical runs produce identical bytes ------------------

std::optional<std::string> check_determinism() {
    const auto data = test::source_dir() / "data";
    test::TempDir dir;

    auto run = [&](const std::string& out_name) {
        PipelineConfig cfg;
        cfg.dataset_path = (data / "messages.jsonl").string();
        cfg.gazetteer_path = (data / "gazetteer.jsonl").string();
        cfg.truth_path = (data / "truth.jsonl").string();
        cfg.output_dir = dir.file(out_name);
        cfg.train.epochs = 200;
        cfg.train.learning_rate = 0.1;
        cfg.seed = 42;
        cfg.train.seed = cfg.seed;
        run_pipeline(cfg);
        return cfg.output_dir;
    };

    const auto a = run("a"), b = run("b");
    for (const char* name :
         {"clusters.jsonl", "locations.jsonl", "locations.geojson", "report.json"}) {
        const auto file_a = test::slurp(a + "/" + name);
        if (file_a.empty()) return std::string(name) + " is missing or empty";
        if (file_a != test::slurp(b + "/" + name))
            return std::string(name) + " differs between identical runs";
    }
    return std::nullopt;
}

}  // namespace

int main() {
    Context ctx;
    struct Criterion {
        const char* name;
        double budget_s;
        std::function<std::optional<std::string>()> body;
    };
    const std::vector<Criterion> criteria = {
        {"tangent-ball bijection", 5.0, [] { return check_bijection(); }},
        {"graph projection equals dense reference", 10.0, [] { return check_projection(); }},
        {"analytic gradients match finite differences", 30.0, [] { return check_gradients(); }},
        {"planted events recovered (accuracy >= 0.90)", 60.0,
         [&] { return check_detection(ctx); }},
        {"chain filter removes exactly the planted noise", 60.0,
         [&] { return check_noise_filter(ctx); }},
        {"end-to-end error <= 30 km and ablation degrades", 60.0,
         [&] { return check_end_to_end(ctx); }},
        {"distance and accuracy oracles", 10.0, [] { return check_metrics(); }},
        {"byte-identical outputs across reruns", 120.0, [] { return check_determinism(); }},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& c = criteria[i];
        const auto start = Clock::now();
        std::optional<std::string> failure;
        try {
            failure = c.body();
        } catch (const std::exception& e) {
            failure = std::string("exception: ") + e.what();
        }
        const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
        if (!failure && elapsed > c.budget_s)
            failure = "exceeded " + fmt(c.budget_s, 0) + " s budget";
        if (failure) {
            ++failures;
            std::printf("[%zu/8] FAIL  %s: %s (%.2f s)\n", i + 1, c.name, failure->c_str(),
                        elapsed);
        } else {
            std::printf("[%zu/8] PASS  %s (%.2f s)\n", i + 1, c.name, elapsed);
        }
        std::fflush(stdout);
    }
    std::printf("acceptance: %d/8 criteria passed\n", 8 - failures);
    return failures;
}
