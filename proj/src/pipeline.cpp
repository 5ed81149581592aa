#include "evgeo/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "evgeo/errors.hpp"
#include "evgeo/util.hpp"

namespace evgeo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json chain_names_json(const ToponymChain& chain) {
    json out = json::object();
    for (int l = 0; l < kLevelCount; ++l)
        if (chain.levels[l]) out[kLevelNames[l]] = chain.levels[l]->name;
    return out;
}

json location_record(const EventLocation& loc) {
    json rec;
    rec["event_id"] = loc.event_id;
    rec["lat"] = loc.point.lat;
    rec["lon"] = loc.point.lon;
    rec["n_mentions"] = loc.n_mentions;
    rec["n_filtered"] = loc.n_filtered;
    if (loc.pseudo_toponym) rec["pseudo_toponym"] = *loc.pseudo_toponym;
    rec["chain"] = chain_names_json(loc.chain);
    return rec;
}

std::vector<Message> load_and_check(const PipelineConfig& cfg) {
    validate_config(cfg);
    return load_dataset(cfg.dataset_path, cfg.dataset_format);
}

}  // namespace

DetectOutput run_detect(const PipelineConfig& cfg) {
    const std::vector<Message> messages = load_and_check(cfg);
    const Gazetteer gazetteer = Gazetteer::load(cfg.gazetteer_path);
    for (const auto& w : gazetteer.warnings()) std::cerr << "gazetteer: " << w << "\n";

    std::map<std::string, std::string> labels;
    for (const auto& m : messages)
        if (m.event_label) labels[m.id] = *m.event_label;
    if (labels.empty())
        throw ValidationError("dataset: no event labels; the detector needs supervision");

    std::cerr << "detect: building graph over " << messages.size() << " messages\n";
    const MessageGraph graph = build_message_graph(messages, cfg.feature, gazetteer);

    std::cerr << "detect: training (" << cfg.train.epochs << " epochs)\n";
    const TrainResult trained = train(graph, labels, cfg.train, cfg.hyperbolic);
    std::cerr << "detect: best epoch " << trained.best_epoch << ", train loss "
              << trained.best_loss << "\n";

    DetectOutput out;
    out.clusters = detect_events(messages, graph, trained.params, cfg.hyperbolic);

    const fs::path dir(cfg.output_dir);
    out.clusters_path = (dir / "clusters.jsonl").string();
    out.checkpoint_path = (dir / "model.json").string();
    out.loss_csv_path = (dir / "loss.csv").string();

    std::ostringstream clusters;
    for (const auto& [event_id, members] : out.clusters.clusters) {
        json rec;
        rec["event_id"] = event_id;
        rec["message_ids"] = members;
        clusters << rec.dump() << "\n";
    }
    atomic_write_file(out.clusters_path, clusters.str());
    save_checkpoint(out.checkpoint_path, trained.params, cfg.hyperbolic, config_hash(cfg));

    std::ostringstream csv;
    csv << "epoch,loss\n";
    csv.precision(17);
    for (std::size_t e = 0; e < trained.loss_history.size(); ++e)
        csv << e << ',' << trained.loss_history[e] << "\n";
    atomic_write_file(out.loss_csv_path, csv.str());
    return out;
}

GeolocateOutput run_geolocate(const PipelineConfig& cfg, const EventClusterSet& clusters) {
    const std::vector<Message> messages = load_and_check(cfg);
    const Gazetteer gazetteer = Gazetteer::load(cfg.gazetteer_path);

    std::map<std::string, const Message*> by_id;
    for (const auto& m : messages) by_id[m.id] = &m;

    struct Item {
        std::string event_id;
        std::vector<Message> members;
    };
    std::vector<Item> items;
    for (const auto& [event_id, member_ids] : clusters.clusters) {
        Item item;
        item.event_id = event_id;
        for (const auto& id : member_ids) {
            const auto it = by_id.find(id);
            if (it == by_id.end())
                throw ValidationError("clusters: message " + id + " not in dataset");
            item.members.push_back(*it->second);
        }
        items.push_back(std::move(item));
    }

    GeocodeCache cache(cfg.geocode_cache_path);
    std::unique_ptr<RemoteGeocoder> remote;
    if (cfg.remote_geocoder) remote = std::make_unique<RemoteGeocoder>(*cfg.remote_geocoder);

    std::vector<std::optional<EventLocation>> located_slots(items.size());
    std::vector<std::string> unlocatable_reasons(items.size());
    std::vector<std::exception_ptr> failures(items.size());
    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
        for (std::size_t i; (i = cursor.fetch_add(1)) < items.size();) {
            try {
                located_slots[i] = geolocate_event(items[i].event_id, items[i].members,
                                                   gazetteer, cfg.geoloc, remote.get(), &cache);
            } catch (const UnlocatableError& e) {
                unlocatable_reasons[i] = e.what();
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    const auto n_threads = std::min<std::size_t>(std::max(1, cfg.jobs), items.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    for (const auto& failure : failures)
        if (failure) std::rethrow_exception(failure);

    GeolocateOutput out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (located_slots[i])
            out.located.push_back(std::move(*located_slots[i]));
        else
            out.unlocatable.emplace_back(items[i].event_id, unlocatable_reasons[i]);
    }
    for (const auto& [event_id, reason] : out.unlocatable)
        std::cerr << "geolocate: " << reason << "\n";

    const fs::path dir(cfg.output_dir);
    out.locations_jsonl_path = (dir / "locations.jsonl").string();
    out.geojson_path = (dir / "locations.geojson").string();
    out.sidecar_path = (dir / "unlocatable.jsonl").string();

    std::ostringstream jsonl;
    for (const auto& loc : out.located) jsonl << location_record(loc).dump() << "\n";
    atomic_write_file(out.locations_jsonl_path, jsonl.str());

    json features = json::array();
    for (const auto& loc : out.located) {
        json feature;
        feature["type"] = "Feature";
        feature["geometry"] = {{"type", "Point"},
                               {"coordinates", {loc.point.lon, loc.point.lat}}};
        feature["properties"] = location_record(loc);
        features.push_back(std::move(feature));
    }
    json collection = {{"type", "FeatureCollection"}, {"features", std::move(features)}};
    atomic_write_file(out.geojson_path, collection.dump(2) + "\n");

    std::ostringstream sidecar;
    for (const auto& [event_id, reason] : out.unlocatable) {
        json rec = {{"event_id", event_id}, {"reason", reason}};
        sidecar << rec.dump() << "\n";
    }
    atomic_write_file(out.sidecar_path, sidecar.str());
    return out;
}

EventClusterSet load_clusters(const std::string& path) {
    EventClusterSet set;
    std::set<std::string> seen_messages;
    for_each_line(path, [&](long lineno, const std::string& line) {
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(path, lineno, std::string("invalid JSON: ") + e.what());
        }
        if (!rec.is_object() || !rec.contains("event_id") || !rec.contains("message_ids"))
            throw ParseError(path, lineno, "expected {\"event_id\", \"message_ids\"}");
        const auto event_id = rec.at("event_id").get<std::string>();
        if (set.clusters.count(event_id))
            throw ParseError(path, lineno, "duplicate event id " + event_id);
        auto members = rec.at("message_ids").get<std::vector<std::string>>();
        for (const auto& id : members)
            if (!seen_messages.insert(id).second)
                throw ParseError(path, lineno,
                                 "message " + id + " appears in more than one cluster");
        set.clusters[event_id] = std::move(members);
    });
    if (set.clusters.empty()) throw ParseError(path, 0, "no clusters");
    return set;
}

std::map<std::string, GeoPoint> load_truth(const std::string& path) {
    std::map<std::string, GeoPoint> truth;
    for_each_line(path, [&](long lineno, const std::string& line) {
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(path, lineno, std::string("invalid JSON: ") + e.what());
        }
        if (!rec.is_object() || !rec.contains("event_id") || !rec.contains("lat") ||
            !rec.contains("lon"))
            throw ParseError(path, lineno, "expected {\"event_id\", \"lat\", \"lon\"}");
        const auto event_id = rec.at("event_id").get<std::string>();
        if (truth.count(event_id))
            throw ParseError(path, lineno, "duplicate event id " + event_id);
        const GeoPoint p{rec.at("lat").get<double>(), rec.at("lon").get<double>()};
        if (!p.valid()) throw ParseError(path, lineno, "coordinate out of range");
        truth[event_id] = p;
    });
    return truth;
}

std::map<std::string, GeoPoint> load_locations(const std::string& path) {
    return load_truth(path);  // same shape; extra fields are ignored
}

std::map<std::string, GeoPoint> truth_from_messages(const std::vector<Message>& messages) {
    std::map<std::string, std::vector<GeoPoint>> coords;
    for (const auto& m : messages)
        if (m.event_label && m.truth_coord) coords[*m.event_label].push_back(*m.truth_coord);
    std::map<std::string, GeoPoint> truth;
    for (const auto& [event_id, points] : coords) truth[event_id] = centroid(points);
    return truth;
}

EvalOutput run_eval(const PipelineConfig& cfg, const std::string& locations_path,
                    const std::string& truth_path) {
    const auto estimates = load_locations(locations_path);
    std::map<std::string, GeoPoint> truths;
    if (!truth_path.empty()) {
        truths = load_truth(truth_path);
    } else {
        truths = truth_from_messages(load_and_check(cfg));
        std::cerr << "eval: truth derived from dataset labels (" << truths.size()
                  << " events)\n";
    }
    if (truths.empty()) throw EvalError("no truth events to evaluate against");

    EvalOutput out;
    out.report = evaluate(estimates, truths, cfg.eval_thresholds_km);

    json j;
    j["n_events"] = out.report.n_events;
    j["n_unlocatable"] = out.report.n_unlocatable;
    j["mean_km"] = out.report.mean_km;
    j["median_km"] = out.report.median_km;
    json acc = json::array();
    for (const auto& [d, frac] : out.report.acc)
        acc.push_back({{"threshold_km", d}, {"fraction", frac}});
    j["acc"] = std::move(acc);
    json per_event = json::array();
    for (const auto& [id, err] : out.report.per_event)
        per_event.push_back({{"event_id", id}, {"error_km", err}});
    j["per_event"] = std::move(per_event);

    out.report_path = (fs::path(cfg.output_dir) / "report.json").string();
    atomic_write_file(out.report_path, j.dump(2) + "\n");
    return out;
}

PipelineOutput run_pipeline(const PipelineConfig& cfg) {
    PipelineOutput out;
    out.detect = run_detect(cfg);
    out.geolocate = run_geolocate(cfg, out.detect.clusters);

    bool have_truth = !cfg.truth_path.empty();
    if (!have_truth) {
        const auto messages = load_dataset(cfg.dataset_path, cfg.dataset_format);
        have_truth = !truth_from_messages(messages).empty();
    }
    if (have_truth)
        out.eval = run_eval(cfg, out.geolocate.locations_jsonl_path, cfg.truth_path);
    else
        std::cerr << "pipeline: no ground-truth coordinates; skipping evaluation\n";
    return out;
}

std::string format_report(const EvalReport& report) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(2);
    s << "events:       " << report.n_events << " (" << report.n_unlocatable
      << " unlocatable)\n";
    s << "mean error:   " << report.mean_km << " km\n";
    s << "median error: " << report.median_km << " km\n";
    for (const auto& [d, frac] : report.acc)
        s << "ACC@" << d << " km: " << 100.0 * frac << "%\n";
    return s.str();
}

}  // namespace evgeo
