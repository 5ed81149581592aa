#include "evgeo/config.hpp"

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "evgeo/errors.hpp"
#include "evgeo/util.hpp"

namespace evgeo {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items())
        if (!known.count(key))
            throw ValidationError("config: unknown key \"" + key + "\" in " + where);
}

template <typename T>
void maybe(const json& obj, const char* key, T* out) {
    if (obj.contains(key)) *out = obj.at(key).get<T>();
}

}  // namespace

PipelineConfig load_config(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError(path, 0, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(path, 0, "config root must be an object");

    reject_unknown_keys(j, {"dataset_path", "dataset_format", "gazetteer_path", "output_dir",
                            "truth_path", "geocode_cache_path", "feature", "hyperbolic", "train",
                            "geoloc", "eval_thresholds_km", "remote_geocoder", "seed", "jobs"},
                        "top level");

    PipelineConfig cfg;
    maybe(j, "dataset_path", &cfg.dataset_path);
    if (j.contains("dataset_format")) {
        const auto fmt = j.at("dataset_format").get<std::string>();
        if (fmt == "jsonl")
            cfg.dataset_format = DatasetFormat::jsonl;
        else if (fmt == "tsv")
            cfg.dataset_format = DatasetFormat::tsv;
        else
            throw ValidationError("config: dataset_format must be \"jsonl\" or \"tsv\", got \"" +
                                  fmt + "\"");
    }
    maybe(j, "gazetteer_path", &cfg.gazetteer_path);
    maybe(j, "output_dir", &cfg.output_dir);
    maybe(j, "truth_path", &cfg.truth_path);
    maybe(j, "geocode_cache_path", &cfg.geocode_cache_path);

    if (j.contains("feature")) {
        const auto& f = j.at("feature");
        reject_unknown_keys(f, {"semantic_dim", "word_min_freq", "standardize"}, "feature");
        maybe(f, "semantic_dim", &cfg.feature.semantic_dim);
        maybe(f, "word_min_freq", &cfg.feature.word_min_freq);
        maybe(f, "standardize", &cfg.feature.standardize);
    }
    if (j.contains("hyperbolic")) {
        const auto& h = j.at("hyperbolic");
        reject_unknown_keys(h, {"curvature_c", "max_tangent_norm", "ball_margin"}, "hyperbolic");
        maybe(h, "curvature_c", &cfg.hyperbolic.curvature_c);
        maybe(h, "max_tangent_norm", &cfg.hyperbolic.max_tangent_norm);
        maybe(h, "ball_margin", &cfg.hyperbolic.ball_margin);
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        reject_unknown_keys(
            t, {"epochs", "learning_rate", "train_fraction", "hidden_dim"}, "train");
        maybe(t, "epochs", &cfg.train.epochs);
        maybe(t, "learning_rate", &cfg.train.learning_rate);
        maybe(t, "train_fraction", &cfg.train.train_fraction);
        maybe(t, "hidden_dim", &cfg.train.hidden_dim);
    }
    if (j.contains("geoloc")) {
        const auto& g = j.at("geoloc");
        reject_unknown_keys(
            g, {"match_depth", "enable_fit", "enable_hist", "min_resolved_mentions"}, "geoloc");
        maybe(g, "match_depth", &cfg.geoloc.match_depth);
        maybe(g, "enable_fit", &cfg.geoloc.enable_fit);
        maybe(g, "enable_hist", &cfg.geoloc.enable_hist);
        maybe(g, "min_resolved_mentions", &cfg.geoloc.min_resolved_mentions);
    }
    maybe(j, "eval_thresholds_km", &cfg.eval_thresholds_km);
    if (j.contains("remote_geocoder")) {
        const auto& r = j.at("remote_geocoder");
        reject_unknown_keys(r,
                            {"endpoint_template", "api_key_env", "api_key_param", "lat_path",
                             "lon_path", "chain_path", "rate_limit_per_s", "max_retries",
                             "backoff_base_ms"},
                            "remote_geocoder");
        RemoteGeocoderConfig rc;
        maybe(r, "endpoint_template", &rc.endpoint_template);
        maybe(r, "api_key_env", &rc.api_key_env);
        maybe(r, "api_key_param", &rc.api_key_param);
        maybe(r, "lat_path", &rc.lat_path);
        maybe(r, "lon_path", &rc.lon_path);
        maybe(r, "chain_path", &rc.chain_path);
        maybe(r, "rate_limit_per_s", &rc.rate_limit_per_s);
        maybe(r, "max_retries", &rc.max_retries);
        maybe(r, "backoff_base_ms", &rc.backoff_base_ms);
        if (rc.endpoint_template.empty())
            throw ValidationError("config: remote_geocoder.endpoint_template is required");
        cfg.remote_geocoder = std::move(rc);
    }
    maybe(j, "seed", &cfg.seed);
    maybe(j, "jobs", &cfg.jobs);
    cfg.train.seed = cfg.seed;
    return cfg;
}

std::uint64_t config_hash(const PipelineConfig& cfg) {
    // Canonical serialization of everything that shapes the outputs.
    std::ostringstream s;
    s.precision(17);
    s << cfg.dataset_path << '\x1f' << (cfg.dataset_format == DatasetFormat::jsonl ? "jsonl" : "tsv")
      << '\x1f' << cfg.gazetteer_path << '\x1f' << cfg.truth_path << '\x1f'
      << cfg.feature.semantic_dim << '\x1f' << cfg.feature.word_min_freq << '\x1f'
      << cfg.feature.standardize << '\x1f' << cfg.hyperbolic.curvature_c << '\x1f'
      << cfg.hyperbolic.max_tangent_norm << '\x1f' << cfg.hyperbolic.ball_margin << '\x1f'
      << cfg.train.epochs << '\x1f' << cfg.train.learning_rate << '\x1f'
      << cfg.train.train_fraction << '\x1f' << cfg.train.hidden_dim << '\x1f'
      << cfg.geoloc.match_depth << '\x1f' << cfg.geoloc.enable_fit << '\x1f'
      << cfg.geoloc.enable_hist << '\x1f' << cfg.geoloc.min_resolved_mentions << '\x1f'
      << cfg.seed;
    for (double t : cfg.eval_thresholds_km) s << '\x1f' << t;
    return fnv1a64(s.str());
}

void validate_config(const PipelineConfig& cfg) {
    namespace fs = std::filesystem;
    if (cfg.dataset_path.empty()) throw ValidationError("config: dataset_path is required");
    if (!fs::exists(cfg.dataset_path))
        throw ValidationError("dataset: not found: " + cfg.dataset_path);
    if (cfg.gazetteer_path.empty()) throw ValidationError("config: gazetteer_path is required");
    if (!fs::exists(cfg.gazetteer_path))
        throw ValidationError("gazetteer: not found: " + cfg.gazetteer_path);
    if (!cfg.truth_path.empty() && !fs::exists(cfg.truth_path))
        throw ValidationError("truth: not found: " + cfg.truth_path);

    if (cfg.feature.semantic_dim < 2)
        throw ValidationError("config: feature.semantic_dim must be >= 2");
    if (cfg.feature.word_min_freq < 0)
        throw ValidationError("config: feature.word_min_freq must be >= 0");
    if (cfg.hyperbolic.curvature_c <= 0.0)
        throw ValidationError("config: hyperbolic.curvature_c must be positive");
    if (cfg.hyperbolic.max_tangent_norm <= 0.0)
        throw ValidationError("config: hyperbolic.max_tangent_norm must be positive");
    if (cfg.hyperbolic.ball_margin <= 0.0 || cfg.hyperbolic.ball_margin >= 1.0)
        throw ValidationError("config: hyperbolic.ball_margin must be in (0, 1)");
    if (cfg.train.epochs < 1) throw ValidationError("config: train.epochs must be positive");
    if (cfg.train.learning_rate <= 0.0)
        throw ValidationError("config: train.learning_rate must be positive");
    if (cfg.train.train_fraction <= 0.0 || cfg.train.train_fraction > 1.0)
        throw ValidationError("config: train.train_fraction must be in (0, 1]");
    if (cfg.train.hidden_dim < 1)
        throw ValidationError("config: train.hidden_dim must be positive");
    if (cfg.geoloc.match_depth < 1 || cfg.geoloc.match_depth > kLevelCount)
        throw ValidationError("config: geoloc.match_depth must be in [1, " +
                              std::to_string(kLevelCount) + "]");
    if (cfg.geoloc.min_resolved_mentions < 1)
        throw ValidationError("config: geoloc.min_resolved_mentions must be >= 1");
    if (cfg.eval_thresholds_km.empty())
        throw ValidationError("config: eval_thresholds_km must be non-empty");
    for (double t : cfg.eval_thresholds_km)
        if (t <= 0.0) throw ValidationError("config: eval thresholds must be positive");
    if (!std::is_sorted(cfg.eval_thresholds_km.begin(), cfg.eval_thresholds_km.end()))
        throw ValidationError("config: eval thresholds must be sorted ascending");
    if (cfg.jobs < 1) throw ValidationError("config: jobs must be >= 1");
}

}  // namespace evgeo
