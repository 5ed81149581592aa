#include "evgeo/geoloc.hpp"

#include <deque>
#include <map>

#include "evgeo/errors.hpp"
#include "evgeo/unicode.hpp"

namespace evgeo {

namespace {

bool all_han(const std::string& s) {
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t len = 0;
        if (script_class(utf8_decode(s, pos, &len)) != ScriptClass::han) return false;
        pos += len;
    }
    return !s.empty();
}

// Chain agreement on the levels present in both, restricted to the first
// match_depth levels.
bool agrees_at_depth(const HierarchyChain& mention, const ToponymChain& cluster, int depth) {
    for (int l = 0; l < depth && l < kLevelCount; ++l) {
        const auto& mine = mention.levels[l];
        const auto& rep = cluster.levels[l];
        if (mine && rep && *mine != rep->name) return false;
    }
    return true;
}

}  // namespace

ToponymChain build_chain(const std::vector<ToponymMention>& mentions,
                         const GeolocationConfig& cfg) {
    std::array<std::map<std::string, int>, kLevelCount> tallies;
    int n_resolved = 0;
    for (const auto& m : mentions) {
        if (m.entry == nullptr) continue;
        ++n_resolved;
        for (int l = 0; l < kLevelCount; ++l)
            if (m.entry->chain.levels[l]) ++tallies[l][*m.entry->chain.levels[l]];
    }
    if (n_resolved < cfg.min_resolved_mentions)
        throw UnlocatableError("unlocatable cluster: " + std::to_string(n_resolved) +
                               " resolved toponym mentions (need " +
                               std::to_string(cfg.min_resolved_mentions) + ")");
    ToponymChain chain;
    for (int l = 0; l < kLevelCount; ++l) {
        for (const auto& [name, count] : tallies[l]) {
            // Map order is lexicographic, so a strict > keeps the smallest
            // name among equals.
            if (!chain.levels[l] || count > chain.levels[l]->count)
                chain.levels[l] = ToponymChain::Representative{name, count};
        }
    }
    return chain;
}

std::vector<ToponymMention> hist_filter(const std::vector<ToponymMention>& mentions,
                                        const ToponymChain& chain,
                                        const GeolocationConfig& cfg) {
    std::vector<ToponymMention> kept;
    kept.reserve(mentions.size());
    for (const auto& m : mentions) {
        if (m.entry == nullptr) continue;
        if (agrees_at_depth(m.entry->chain, chain, cfg.match_depth)) kept.push_back(m);
    }
    return kept;
}

std::vector<PseudoToponym> fit_generate(const ToponymChain& chain, const Gazetteer& g,
                                        const GeolocationConfig& cfg, RemoteGeocoder* remote,
                                        GeocodeCache* cache) {
    std::vector<std::string> components;
    for (int l = 0; l < static_cast<int>(Level::district); ++l)
        if (chain.levels[l]) components.push_back(chain.levels[l]->name);
    bool has_fine = false;
    for (int l = static_cast<int>(Level::district); l < kLevelCount; ++l) {
        if (!chain.levels[l]) continue;
        components.push_back(chain.levels[l]->name);
        has_fine = true;
    }
    if (!has_fine) return {};

    bool han = true;
    for (const auto& c : components) han = han && all_han(c);
    std::string candidate;
    for (std::size_t i = 0; i < components.size(); ++i) {
        if (i > 0 && !han) candidate += ' ';
        candidate += components[i];
    }

    const auto result = geocode(candidate, g, remote, cache);
    if (!result) return {};
    // Validation gate: every cluster-chain level within match_depth must come
    // back identical from the geocoder.
    for (int l = 0; l < cfg.match_depth && l < kLevelCount; ++l) {
        if (!chain.levels[l]) continue;
        const auto& resolved = result->chain.levels[l];
        if (!resolved || *resolved != chain.levels[l]->name) return {};
    }
    return {PseudoToponym{candidate, *result}};
}

GeoPoint centroid(const std::vector<GeoPoint>& points) {
    if (points.empty()) throw ValidationError("centroid: empty point list");
    double lat = 0.0, lon = 0.0;
    for (const auto& p : points) {
        lat += p.lat;
        lon += p.lon;
    }
    const auto n = static_cast<double>(points.size());
    return {lat / n, lon / n};
}

EventLocation geolocate_event(const std::string& event_id,
                              const std::vector<Message>& cluster_messages, const Gazetteer& g,
                              const GeolocationConfig& cfg, RemoteGeocoder* remote,
                              GeocodeCache* cache) {
    if (cluster_messages.empty())
        throw ValidationError("geolocate_event: empty cluster " + event_id);

    EventLocation out;
    out.event_id = event_id;

    std::vector<ToponymMention> mentions = extract_toponyms(cluster_messages, g);
    out.n_mentions = static_cast<int>(mentions.size());
    out.chain = build_chain(mentions, cfg);

    std::deque<GazetteerEntry> pseudo_entries;  // stable addresses for synthetic mentions
    if (cfg.enable_fit) {
        for (auto& p : fit_generate(out.chain, g, cfg, remote, cache)) {
            pseudo_entries.push_back(
                GazetteerEntry{p.name, {}, p.geo.chain, p.geo.point});
            mentions.push_back(ToponymMention{p.name, "", &pseudo_entries.back()});
            out.pseudo_toponym = p.name;
        }
    }

    const std::vector<ToponymMention> survivors =
        cfg.enable_hist ? hist_filter(mentions, out.chain, cfg) : [&] {
            std::vector<ToponymMention> resolved;
            for (const auto& m : mentions)
                if (m.entry != nullptr) resolved.push_back(m);
            return resolved;
        }();
    out.n_filtered = static_cast<int>(mentions.size() - survivors.size());

    std::vector<GeoPoint> points;
    points.reserve(survivors.size());
    for (const auto& m : survivors) points.push_back(m.entry->coord);
    if (points.empty())
        throw UnlocatableError("unlocatable cluster " + event_id +
                               ": no toponym mentions survive filtering");
    out.point = centroid(points);
    return out;
}

}  // namespace evgeo
