#pragma once

#include <map>
#include <string>
#include <vector>

#include "evgeo/config.hpp"
#include "evgeo/detector.hpp"
#include "evgeo/eval.hpp"
#include "evgeo/geoloc.hpp"

namespace evgeo {

// Batch stages behind the CLI subcommands. Each stage persists its outputs
// with write-to-temp-then-rename, so an interrupted run never leaves a
// half-written final file.

struct DetectOutput {
    EventClusterSet clusters;
    std::string clusters_path;
    std::string checkpoint_path;
    std::string loss_csv_path;
};

DetectOutput run_detect(const PipelineConfig& cfg);

struct GeolocateOutput {
    std::vector<EventLocation> located;
    std::vector<std::pair<std::string, std::string>> unlocatable;  // (event id, reason)
    std::string locations_jsonl_path;
    std::string geojson_path;
    std::string sidecar_path;
};

GeolocateOutput run_geolocate(const PipelineConfig& cfg, const EventClusterSet& clusters);

// Reads a clusters JSONL produced by run_detect.
EventClusterSet load_clusters(const std::string& path);

// Truth: JSONL of {"event_id", "lat", "lon"}.
std::map<std::string, GeoPoint> load_truth(const std::string& path);
std::map<std::string, GeoPoint> load_locations(const std::string& path);

// Per-event truth derived from labeled messages (mean of member coordinates).
std::map<std::string, GeoPoint> truth_from_messages(const std::vector<Message>& messages);

struct EvalOutput {
    EvalReport report;
    std::string report_path;
};

EvalOutput run_eval(const PipelineConfig& cfg, const std::string& locations_path,
                    const std::string& truth_path);

// detect, geolocate, then eval when truth is available.
struct PipelineOutput {
    DetectOutput detect;
    GeolocateOutput geolocate;
    std::optional<EvalOutput> eval;
};

PipelineOutput run_pipeline(const PipelineConfig& cfg);

// Formats the report the way cmd_eval prints it.
std::string format_report(const EvalReport& report);

}  // namespace evgeo
