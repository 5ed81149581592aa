#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "evgeo/geo.hpp"
#include "evgeo/stringmatch.hpp"

namespace evgeo {

struct Message;

// Administrative levels, coarse to fine. The numeric order is load-bearing:
// chain matching and representative voting iterate by it.
enum class Level : int { province = 0, city, district, township, village, road };
inline constexpr int kLevelCount = 6;
inline constexpr std::array<const char*, kLevelCount> kLevelNames = {
    "province", "city", "district", "township", "village", "road"};

// A toponym's administrative chain. Levels may be absent; present names are
// non-empty.
struct HierarchyChain {
    std::array<std::optional<std::string>, kLevelCount> levels;

    const std::optional<std::string>& at(Level l) const {
        return levels[static_cast<int>(l)];
    }
    void set(Level l, std::string name) { levels[static_cast<int>(l)] = std::move(name); }
    bool empty() const {
        for (const auto& v : levels)
            if (v) return false;
        return true;
    }
};

struct GazetteerEntry {
    std::string canonical_name;
    std::vector<std::string> aliases;
    HierarchyChain chain;
    GeoPoint coord;
};

// Immutable after load; lookups are exact (canonical or alias), no fuzzing.
// Duplicate names resolve to the entry listed first and are reported via
// warnings().
class Gazetteer {
   public:
    Gazetteer() = default;
    explicit Gazetteer(std::vector<GazetteerEntry> entries);

    static Gazetteer load(const std::string& path);

    const GazetteerEntry* resolve(std::string_view name) const;

    // Longest gazetteer name (canonical or alias) starting at text[pos].
    struct TextMatch {
        std::size_t length = 0;
        const GazetteerEntry* entry = nullptr;
    };
    TextMatch longest_match(std::string_view text, std::size_t pos) const;

    std::size_t size() const { return entries_.size(); }
    const std::vector<GazetteerEntry>& entries() const { return entries_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

   private:
    void index_name(std::string_view name, std::int32_t entry_idx);

    std::vector<GazetteerEntry> entries_;
    std::unordered_map<std::string, std::int32_t> by_name_;
    ByteTrie trie_;
    std::vector<std::string> warnings_;
};

// One toponym occurrence in a message. entry is null when the surface cannot
// be resolved (possible with a pluggable extractor; never with the built-in
// gazetteer scan).
struct ToponymMention {
    std::string surface;
    std::string message_id;
    const GazetteerEntry* entry = nullptr;
};

// Every occurrence is kept: frequency weights both chain voting and the
// centroid downstream.
std::vector<ToponymMention> extract_toponyms(const std::vector<Message>& cluster_messages,
                                             const Gazetteer& g);

struct GeocodeResult {
    GeoPoint point;
    HierarchyChain chain;
};

// Append-only JSONL log with an in-memory index. Construct with an empty path
// for a memory-only cache. One writer at a time.
class GeocodeCache {
   public:
    GeocodeCache() = default;
    explicit GeocodeCache(std::string path);

    std::optional<GeocodeResult> lookup(const std::string& name) const;
    void store(const std::string& name, const GeocodeResult& result);

    std::size_t size() const;

   private:
    mutable std::mutex mu_;
    std::string path_;
    std::unordered_map<std::string, GeocodeResult> map_;
};

// Generic HTTP geocoder: one GET per name, URL built from a template with a
// {name} placeholder, lat/lon/chain pulled out of the JSON response by
// pointer paths. Stands in for whatever commercial service a deployment uses.
struct RemoteGeocoderConfig {
    std::string endpoint_template;           // e.g. "http://host:port/geo?q={name}"
    std::string api_key_env;                 // env var holding the key; empty = none
    std::string api_key_param = "key";       // query parameter the key is sent as
    std::string lat_path = "/lat";           // JSON pointers into the response body
    std::string lon_path = "/lon";
    std::string chain_path = "/chain";       // object keyed by level name; optional
    double rate_limit_per_s = 5.0;
    int max_retries = 3;
    int backoff_base_ms = 500;
};

class RemoteGeocoder {
   public:
    explicit RemoteGeocoder(RemoteGeocoderConfig cfg);
    ~RemoteGeocoder();

    // Transport or parse failures log to stderr and return nullopt.
    std::optional<GeocodeResult> query(const std::string& name);

    std::size_t request_count() const { return requests_; }

   private:
    struct Impl;
    RemoteGeocoderConfig cfg_;
    std::unique_ptr<Impl> impl_;
    std::size_t requests_ = 0;
};

// Lookup order: gazetteer, then cache, then remote (result persisted to the
// cache). Absent if all three miss. remote and cache may be null.
std::optional<GeocodeResult> geocode(const std::string& name, const Gazetteer& g,
                                     RemoteGeocoder* remote = nullptr,
                                     GeocodeCache* cache = nullptr);

}  // namespace evgeo
