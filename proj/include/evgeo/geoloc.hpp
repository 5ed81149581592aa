#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "evgeo/gazetteer.hpp"
#include "evgeo/geo.hpp"
#include "evgeo/ingest.hpp"

namespace evgeo {

// Per-level representative toponym components of one event cluster: the
// level-wise most frequent name over the resolved mentions' chains, ties to
// the lexicographically smallest.
struct ToponymChain {
    struct Representative {
        std::string name;
        int count = 0;
    };
    std::array<std::optional<Representative>, kLevelCount> levels;

    const std::optional<Representative>& at(Level l) const {
        return levels[static_cast<int>(l)];
    }
};

struct GeolocationConfig {
    int match_depth = 2;  // province+city
    bool enable_fit = true;
    bool enable_hist = true;
    int min_resolved_mentions = 1;
};

// Tally every level component of every resolved mention's chain. Throws
// UnlocatableError when fewer than cfg.min_resolved_mentions resolve.
ToponymChain build_chain(const std::vector<ToponymMention>& mentions,
                         const GeolocationConfig& cfg = {});

// A resolved mention survives iff its chain agrees with the cluster chain on
// every level, among the first match_depth, present in both. Unresolved
// mentions are dropped. Order and multiplicity are preserved.
std::vector<ToponymMention> hist_filter(const std::vector<ToponymMention>& mentions,
                                        const ToponymChain& chain, const GeolocationConfig& cfg);

struct PseudoToponym {
    std::string name;
    GeocodeResult geo;
};

// Joins the chain's fine-level representatives (district and below), prefixed
// by province+city, into one candidate, then geocodes it and keeps it only if
// the resolved hierarchy matches the chain at the first match_depth levels.
// Empty when no level finer than city exists or validation fails.
std::vector<PseudoToponym> fit_generate(const ToponymChain& chain, const Gazetteer& g,
                                        const GeolocationConfig& cfg,
                                        RemoteGeocoder* remote = nullptr,
                                        GeocodeCache* cache = nullptr);

// Arithmetic mean in degrees; a k-means with k=1 converges to exactly this.
GeoPoint centroid(const std::vector<GeoPoint>& points);

struct EventLocation {
    std::string event_id;
    GeoPoint point;
    int n_mentions = 0;   // extracted occurrences, before filtering
    int n_filtered = 0;   // occurrences removed (noise + unresolvable)
    std::optional<std::string> pseudo_toponym;
    ToponymChain chain;
};

// extract -> chain -> pseudo-toponym (appended once) -> noise filter ->
// geocode each surviving occurrence -> centroid. Throws UnlocatableError when
// nothing survives.
EventLocation geolocate_event(const std::string& event_id,
                              const std::vector<Message>& cluster_messages, const Gazetteer& g,
                              const GeolocationConfig& cfg, RemoteGeocoder* remote = nullptr,
                              GeocodeCache* cache = nullptr);

}  // namespace evgeo
