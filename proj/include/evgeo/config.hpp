#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evgeo/detector.hpp"
#include "evgeo/gazetteer.hpp"
#include "evgeo/geoloc.hpp"
#include "evgeo/graph.hpp"
#include "evgeo/hyperbolic.hpp"
#include "evgeo/ingest.hpp"

namespace evgeo {

struct PipelineConfig {
    std::string dataset_path;
    DatasetFormat dataset_format = DatasetFormat::jsonl;
    std::string gazetteer_path;
    std::string output_dir = "out";
    std::string truth_path;          // optional; derived from the dataset when empty
    std::string geocode_cache_path;  // optional

    FeatureConfig feature;
    HyperbolicConfig hyperbolic;
    TrainConfig train;
    GeolocationConfig geoloc;
    std::vector<double> eval_thresholds_km = {100.0, 200.0, 300.0, 400.0};
    std::optional<RemoteGeocoderConfig> remote_geocoder;
    std::uint64_t seed = 42;  // feeds train.seed; the run's single entropy source
    int jobs = 1;
};

// JSON config document. Unknown keys are rejected; flags override these
// values at the CLI layer.
PipelineConfig load_config(const std::string& path);

// Stable hash of everything that affects outputs; embedded in checkpoints.
std::uint64_t config_hash(const PipelineConfig& cfg);

// Contract checks that need the filesystem (paths exist, thresholds sorted).
void validate_config(const PipelineConfig& cfg);

}  // namespace evgeo
