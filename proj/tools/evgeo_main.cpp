#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "evgeo/errors.hpp"
#include "evgeo/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

int run(int argc, char** argv) {
    CLI::App app{"event detection in hyperbolic space + toponym-chain geolocation"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<int> match_depth;
    std::optional<std::string> output_dir;
    bool no_fit = false;
    bool no_hist = false;
    std::string ablation;

    app.add_option("--config", config_path, "pipeline config (JSON)")->required();
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--jobs", jobs, "parallel workers for per-event geolocation");
    app.add_flag("--no-fit", no_fit, "skip pseudo-toponym generation");
    app.add_flag("--no-hist", no_hist, "skip toponym-chain noise filtering");
    app.add_option("--ablation", ablation, "gtop (full) or gtop-- (no filter, no pseudo-toponyms)")
        ->check(CLI::IsMember({"gtop", "gtop--"}));
    app.add_option("--match-depth", match_depth, "chain levels that must agree (1-6)");
    app.add_option("--output", output_dir, "override the output directory");

    auto* cmd_detect =
        app.add_subcommand("detect", "train the detector and write event clusters");
    cmd_detect->fallthrough();

    auto* cmd_geolocate = app.add_subcommand("geolocate", "locate events from a clusters file");
    cmd_geolocate->fallthrough();
    std::string clusters_path;
    cmd_geolocate->add_option("--clusters", clusters_path,
                              "clusters JSONL (default: <output>/clusters.jsonl)");

    auto* cmd_eval = app.add_subcommand("eval", "score locations against ground truth");
    cmd_eval->fallthrough();
    std::string locations_path;
    cmd_eval->add_option("--locations", locations_path,
                         "locations JSONL (default: <output>/locations.jsonl)");

    auto* cmd_pipeline = app.add_subcommand("pipeline", "detect, geolocate, then evaluate");
    cmd_pipeline->fallthrough();

    auto* cmd_gazetteer =
        app.add_subcommand("gazetteer-validate", "load the gazetteer and report problems");
    cmd_gazetteer->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    evgeo::PipelineConfig cfg = evgeo::load_config(config_path);
    if (seed) {
        cfg.seed = *seed;
        cfg.train.seed = *seed;
    }
    if (jobs) cfg.jobs = *jobs;
    if (output_dir) cfg.output_dir = *output_dir;
    if (match_depth) cfg.geoloc.match_depth = *match_depth;
    if (ablation == "gtop--") {
        cfg.geoloc.enable_fit = false;
        cfg.geoloc.enable_hist = false;
    }
    if (no_fit) cfg.geoloc.enable_fit = false;
    if (no_hist) cfg.geoloc.enable_hist = false;

    if (cmd_gazetteer->parsed()) {
        if (cfg.gazetteer_path.empty())
            throw evgeo::ValidationError("config: gazetteer_path is required");
        if (!fs::exists(cfg.gazetteer_path))
            throw evgeo::ValidationError("gazetteer: not found: " + cfg.gazetteer_path);
        const auto g = evgeo::Gazetteer::load(cfg.gazetteer_path);
        std::cout << "entries: " << g.size() << "\n";
        for (const auto& w : g.warnings()) std::cout << "warning: " << w << "\n";
        return 0;
    }
    if (cmd_detect->parsed()) {
        const auto out = evgeo::run_detect(cfg);
        std::cerr << "detect: wrote " << out.clusters_path << " (" << out.clusters.clusters.size()
                  << " events)\n";
        return 0;
    }
    if (cmd_geolocate->parsed()) {
        if (clusters_path.empty())
            clusters_path = (fs::path(cfg.output_dir) / "clusters.jsonl").string();
        if (!fs::exists(clusters_path))
            throw evgeo::ValidationError("clusters: not found: " + clusters_path);
        const auto clusters = evgeo::load_clusters(clusters_path);
        const auto out = evgeo::run_geolocate(cfg, clusters);
        std::cerr << "geolocate: wrote " << out.geojson_path << " (" << out.located.size()
                  << " located, " << out.unlocatable.size() << " unlocatable)\n";
        return 0;
    }
    if (cmd_eval->parsed()) {
        if (locations_path.empty())
            locations_path = (fs::path(cfg.output_dir) / "locations.jsonl").string();
        if (!fs::exists(locations_path))
            throw evgeo::ValidationError("locations: not found: " + locations_path);
        const auto out = evgeo::run_eval(cfg, locations_path, cfg.truth_path);
        std::cout << evgeo::format_report(out.report);
        return 0;
    }
    const auto out = evgeo::run_pipeline(cfg);
    if (out.eval) std::cout << evgeo::format_report(out.eval->report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const evgeo::EvalError& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const evgeo::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const evgeo::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const fs::filesystem_error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
}
