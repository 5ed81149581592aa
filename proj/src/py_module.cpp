#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "evgeo/config.hpp"
#include "evgeo/errors.hpp"
#include "evgeo/eval.hpp"
#include "evgeo/geoloc.hpp"
#include "evgeo/hyperbolic.hpp"
#include "evgeo/pipeline.hpp"

namespace py = pybind11;

namespace {

py::dict chain_dict(const evgeo::HierarchyChain& chain) {
    py::dict d;
    for (int l = 0; l < evgeo::kLevelCount; ++l)
        if (chain.levels[l]) d[evgeo::kLevelNames[l]] = *chain.levels[l];
    return d;
}

py::dict toponym_chain_dict(const evgeo::ToponymChain& chain) {
    py::dict d;
    for (int l = 0; l < evgeo::kLevelCount; ++l)
        if (chain.levels[l])
            d[evgeo::kLevelNames[l]] =
                py::make_tuple(chain.levels[l]->name, chain.levels[l]->count);
    return d;
}

py::dict report_dict(const evgeo::EvalReport& r) {
    py::dict d;
    d["n_events"] = r.n_events;
    d["n_unlocatable"] = r.n_unlocatable;
    d["mean_km"] = r.mean_km;
    d["median_km"] = r.median_km;
    py::dict acc;
    for (const auto& [threshold, fraction] : r.acc) acc[py::float_(threshold)] = fraction;
    d["acc"] = acc;
    py::list per_event;
    for (const auto& [id, err] : r.per_event) per_event.append(py::make_tuple(id, err));
    d["per_event"] = per_event;
    return d;
}

py::dict location_dict(const evgeo::EventLocation& loc) {
    py::dict d;
    d["event_id"] = loc.event_id;
    d["lat"] = loc.point.lat;
    d["lon"] = loc.point.lon;
    d["n_mentions"] = loc.n_mentions;
    d["n_filtered"] = loc.n_filtered;
    if (loc.pseudo_toponym)
        d["pseudo_toponym"] = *loc.pseudo_toponym;
    else
        d["pseudo_toponym"] = py::none();
    d["chain"] = toponym_chain_dict(loc.chain);
    return d;
}

evgeo::PipelineConfig config_with_overrides(const std::string& config_path,
                                            std::optional<std::uint64_t> seed,
                                            std::optional<std::string> output_dir) {
    evgeo::PipelineConfig cfg = evgeo::load_config(config_path);
    if (seed) {
        cfg.seed = *seed;
        cfg.train.seed = *seed;
    }
    if (output_dir) cfg.output_dir = *output_dir;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "social event detection in hyperbolic space + toponym-chain geolocation";

    auto base = py::register_exception<evgeo::Error>(m, "Error");
    py::register_exception<evgeo::ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<evgeo::ParseError>(m, "ParseError", base.ptr());
    py::register_exception<evgeo::UnlocatableError>(m, "UnlocatableError", base.ptr());
    py::register_exception<evgeo::EvalError>(m, "EvalError", base.ptr());

    py::class_<evgeo::GeoPoint>(m, "GeoPoint")
        .def(py::init<>())
        .def(py::init<double, double>(), py::arg("lat"), py::arg("lon"))
        .def_readwrite("lat", &evgeo::GeoPoint::lat)
        .def_readwrite("lon", &evgeo::GeoPoint::lon)
        .def("__repr__", [](const evgeo::GeoPoint& p) {
            return "GeoPoint(lat=" + std::to_string(p.lat) + ", lon=" + std::to_string(p.lon) +
                   ")";
        });

    py::class_<evgeo::Message>(m, "Message")
        .def(py::init<>())
        .def_readwrite("id", &evgeo::Message::id)
        .def_readwrite("text", &evgeo::Message::text)
        .def_readwrite("user_id", &evgeo::Message::user_id)
        .def_readwrite("mentioned_user_ids", &evgeo::Message::mentioned_user_ids)
        .def_readwrite("timestamp", &evgeo::Message::timestamp)
        .def_readwrite("tokens", &evgeo::Message::tokens)
        .def_readwrite("event_label", &evgeo::Message::event_label)
        .def_readwrite("truth_coord", &evgeo::Message::truth_coord);

    py::class_<evgeo::GazetteerEntry>(m, "GazetteerEntry")
        .def_readonly("name", &evgeo::GazetteerEntry::canonical_name)
        .def_readonly("aliases", &evgeo::GazetteerEntry::aliases)
        .def_readonly("coord", &evgeo::GazetteerEntry::coord)
        .def_property_readonly(
            "chain", [](const evgeo::GazetteerEntry& e) { return chain_dict(e.chain); });

    py::class_<evgeo::Gazetteer>(m, "Gazetteer")
        .def_static("load", &evgeo::Gazetteer::load, py::arg("path"))
        .def("__len__", &evgeo::Gazetteer::size)
        .def("warnings", &evgeo::Gazetteer::warnings)
        .def(
            "resolve",
            [](const evgeo::Gazetteer& g, const std::string& name)
                -> std::optional<evgeo::GazetteerEntry> {
                const auto* e = g.resolve(name);
                if (e == nullptr) return std::nullopt;
                return *e;
            },
            py::arg("name"));

    m.def(
        "ole_date",
        [](std::int64_t unix_seconds) {
            const auto tf = evgeo::ole_date(unix_seconds);
            return py::make_tuple(tf.integer_days, tf.day_fraction);
        },
        py::arg("unix_seconds"),
        "Unix seconds -> (whole days since the OLE epoch, fraction of day).");
    m.def("parse_rfc3339", &evgeo::parse_rfc3339, py::arg("text"));
    m.def("format_rfc3339", &evgeo::format_rfc3339, py::arg("unix_seconds"));

    m.def("load_dataset",
          [](const std::string& path, const std::string& format) {
              if (format != "jsonl" && format != "tsv")
                  throw evgeo::ValidationError("format must be \"jsonl\" or \"tsv\"");
              return evgeo::load_dataset(path, format == "jsonl" ? evgeo::DatasetFormat::jsonl
                                                                 : evgeo::DatasetFormat::tsv);
          },
          py::arg("path"), py::arg("format") = "jsonl");
    m.def("tokenize", &evgeo::tokenize, py::arg("message"), py::arg("gazetteer"));

    m.def("embed_text", &evgeo::embed_text, py::arg("tokens"), py::arg("dim"),
          "Sign-hash bag of words, L2-normalized.");

    m.def(
        "exp_map",
        [](const Eigen::VectorXd& alpha, double c, double max_tangent_norm, double ball_margin) {
            return evgeo::exp_map(alpha, {c, max_tangent_norm, ball_margin});
        },
        py::arg("alpha"), py::arg("c") = 1.0, py::arg("max_tangent_norm") = 10.0,
        py::arg("ball_margin") = 1e-5, "Tangent vector -> ball point (origin exp map).");
    m.def(
        "log_map",
        [](const Eigen::VectorXd& beta, double c, double max_tangent_norm, double ball_margin) {
            return evgeo::log_map(beta, {c, max_tangent_norm, ball_margin});
        },
        py::arg("beta"), py::arg("c") = 1.0, py::arg("max_tangent_norm") = 10.0,
        py::arg("ball_margin") = 1e-5, "Ball point -> tangent vector (origin log map).");

    m.def("haversine", &evgeo::haversine, py::arg("a"), py::arg("b"),
          py::arg("radius_km") = evgeo::kEarthRadiusKm);
    m.def("centroid", &evgeo::centroid, py::arg("points"));

    m.def("acc_at", &evgeo::acc_at, py::arg("estimates"), py::arg("truths"),
          py::arg("threshold_km"));
    m.def(
        "evaluate",
        [](const std::map<std::string, evgeo::GeoPoint>& estimates,
           const std::map<std::string, evgeo::GeoPoint>& truths,
           const std::vector<double>& thresholds_km) {
            return report_dict(evgeo::evaluate(estimates, truths, thresholds_km));
        },
        py::arg("estimates"), py::arg("truths"),
        py::arg("thresholds_km") = std::vector<double>{100.0, 200.0, 300.0, 400.0});

    m.def(
        "geolocate_cluster",
        [](const std::string& event_id, const std::vector<evgeo::Message>& messages,
           const evgeo::Gazetteer& gazetteer, int match_depth, bool enable_fit, bool enable_hist,
           int min_resolved_mentions) {
            evgeo::GeolocationConfig cfg;
            cfg.match_depth = match_depth;
            cfg.enable_fit = enable_fit;
            cfg.enable_hist = enable_hist;
            cfg.min_resolved_mentions = min_resolved_mentions;
            return location_dict(evgeo::geolocate_event(event_id, messages, gazetteer, cfg));
        },
        py::arg("event_id"), py::arg("messages"), py::arg("gazetteer"),
        py::arg("match_depth") = 2, py::arg("enable_fit") = true, py::arg("enable_hist") = true,
        py::arg("min_resolved_mentions") = 1,
        "Locate one event cluster offline (gazetteer-only geocoding).");

    m.def(
        "detect_clusters",
        [](const std::string& config_path, std::optional<std::uint64_t> seed,
           std::optional<std::string> output_dir) {
            const auto out =
                evgeo::run_detect(config_with_overrides(config_path, seed, output_dir));
            return out.clusters.clusters;
        },
        py::arg("config_path"), py::arg("seed") = py::none(), py::arg("output_dir") = py::none(),
        "Train the detector per the config; returns {event_id: [message ids]}.");

    m.def(
        "run_pipeline",
        [](const std::string& config_path, std::optional<std::uint64_t> seed,
           std::optional<std::string> output_dir) {
            const auto out =
                evgeo::run_pipeline(config_with_overrides(config_path, seed, output_dir));
            py::dict d;
            d["clusters"] = out.detect.clusters.clusters;
            py::list located;
            for (const auto& loc : out.geolocate.located) located.append(location_dict(loc));
            d["located"] = located;
            py::list unlocatable;
            for (const auto& [id, reason] : out.geolocate.unlocatable)
                unlocatable.append(py::make_tuple(id, reason));
            d["unlocatable"] = unlocatable;
            d["report"] = out.eval ? py::object(report_dict(out.eval->report)) : py::none();
            d["locations_path"] = out.geolocate.locations_jsonl_path;
            d["geojson_path"] = out.geolocate.geojson_path;
            d["checkpoint_path"] = out.detect.checkpoint_path;
            return d;
        },
        py::arg("config_path"), py::arg("seed") = py::none(), py::arg("output_dir") = py::none(),
        "Detect, geolocate, and (with ground truth) evaluate; returns a run summary.");
}
