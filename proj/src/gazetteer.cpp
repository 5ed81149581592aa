#include "evgeo/gazetteer.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "evgeo/errors.hpp"
#include "evgeo/ingest.hpp"
#include "evgeo/util.hpp"

// IWYU pragma: no_include <httplib.h> -- pulled in by remote_geocoder.cpp only

namespace evgeo {

using nlohmann::json;

Gazetteer::Gazetteer(std::vector<GazetteerEntry> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto idx = static_cast<std::int32_t>(i);
        index_name(entries_[i].canonical_name, idx);
        for (const auto& alias : entries_[i].aliases) index_name(alias, idx);
    }
}

void Gazetteer::index_name(std::string_view name, std::int32_t entry_idx) {
    if (name.empty()) return;
    auto [it, inserted] = by_name_.emplace(std::string(name), entry_idx);
    if (!inserted) {
        warnings_.push_back("duplicate name \"" + std::string(name) + "\": keeping entry \"" +
                            entries_[it->second].canonical_name + "\"");
        return;
    }
    trie_.insert(name, entry_idx);
}

namespace {

HierarchyChain chain_from_json(const json& j) {
    HierarchyChain chain;
    for (int l = 0; l < kLevelCount; ++l) {
        const char* key = kLevelNames[l];
        if (j.contains(key) && !j[key].is_null()) {
            auto name = j[key].get<std::string>();
            if (name.empty()) throw ValidationError(std::string("empty chain level ") + key);
            chain.levels[l] = std::move(name);
        }
    }
    return chain;
}

json chain_to_json(const HierarchyChain& chain) {
    json j = json::object();
    for (int l = 0; l < kLevelCount; ++l)
        if (chain.levels[l]) j[kLevelNames[l]] = *chain.levels[l];
    return j;
}

}  // namespace

Gazetteer Gazetteer::load(const std::string& path) {
    std::vector<GazetteerEntry> entries;
    for_each_line(path, [&](long lineno, const std::string& line) {
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(path, lineno, e.what());
        }
        try {
            GazetteerEntry e;
            e.canonical_name = j.at("name").get<std::string>();
            if (e.canonical_name.empty()) throw ValidationError("empty name");
            if (j.contains("aliases") && !j["aliases"].is_null())
                e.aliases = j["aliases"].get<std::vector<std::string>>();
            for (const auto& a : e.aliases)
                if (a == e.canonical_name)
                    throw ValidationError("alias duplicates canonical name \"" + a + "\"");
            if (j.contains("chain") && !j["chain"].is_null())
                e.chain = chain_from_json(j["chain"]);
            e.coord.lat = j.at("lat").get<double>();
            e.coord.lon = j.at("lon").get<double>();
            check_geo_point(e.coord, e.canonical_name.c_str());
            entries.push_back(std::move(e));
        } catch (const json::exception& e) {
            throw ParseError(path, lineno, e.what());
        } catch (const ValidationError& e) {
            throw ParseError(path, lineno, e.what());
        }
    });
    return Gazetteer(std::move(entries));
}

const GazetteerEntry* Gazetteer::resolve(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    return it == by_name_.end() ? nullptr : &entries_[it->second];
}

Gazetteer::TextMatch Gazetteer::longest_match(std::string_view text, std::size_t pos) const {
    const auto m = trie_.longest_match(text, pos);
    if (m.length == 0) return {};
    return {m.length, &entries_[m.value]};
}

std::vector<ToponymMention> extract_toponyms(const std::vector<Message>& cluster_messages,
                                             const Gazetteer& g) {
    std::vector<ToponymMention> mentions;
    for (const auto& msg : cluster_messages) {
        std::size_t i = 0;
        while (i < msg.text.size()) {
            const auto match = g.longest_match(msg.text, i);
            if (match.length > 0) {
                mentions.push_back(
                    {msg.text.substr(i, match.length), msg.id, match.entry});
                i += match.length;
            } else {
                ++i;
            }
        }
    }
    return mentions;
}

GeocodeCache::GeocodeCache(std::string path) : path_(std::move(path)) {
    if (path_.empty()) return;
    std::ifstream probe(path_);
    if (!probe) return;  // fresh cache file; created on first store
    probe.close();
    for_each_line(path_, [&](long lineno, const std::string& line) {
        json j;
        try {
            j = json::parse(line);
            GeocodeResult r;
            r.point.lat = j.at("lat").get<double>();
            r.point.lon = j.at("lon").get<double>();
            if (j.contains("chain") && !j["chain"].is_null()) r.chain = chain_from_json(j["chain"]);
            map_[j.at("name").get<std::string>()] = std::move(r);
        } catch (const std::exception& e) {
            throw ParseError(path_, lineno, e.what());
        }
    });
}

std::optional<GeocodeResult> GeocodeCache::lookup(const std::string& name) const {
    std::lock_guard lock(mu_);
    auto it = map_.find(name);
    if (it == map_.end()) return std::nullopt;
    return it->second;
}

void GeocodeCache::store(const std::string& name, const GeocodeResult& result) {
    std::lock_guard lock(mu_);
    if (!map_.emplace(name, result).second) return;  // already logged
    if (path_.empty()) return;
    json j;
    j["name"] = name;
    j["lat"] = result.point.lat;
    j["lon"] = result.point.lon;
    j["chain"] = chain_to_json(result.chain);
    const auto now = std::chrono::system_clock::now();
    j["ts"] = format_rfc3339(std::chrono::duration_cast<std::chrono::seconds>(
                                 now.time_since_epoch())
                                 .count());
    std::ofstream out(path_, std::ios::app);
    if (!out) throw Error("cannot append to geocode cache " + path_);
    out << j.dump() << "\n";
}

std::size_t GeocodeCache::size() const {
    std::lock_guard lock(mu_);
    return map_.size();
}

std::optional<GeocodeResult> geocode(const std::string& name, const Gazetteer& g,
                                     RemoteGeocoder* remote, GeocodeCache* cache) {
    if (const auto* entry = g.resolve(name)) {
        return GeocodeResult{entry->coord, entry->chain};
    }
    if (cache) {
        if (auto hit = cache->lookup(name)) return hit;
    }
    if (remote) {
        auto result = remote->query(name);
        if (result && cache) cache->store(name, *result);
        return result;
    }
    return std::nullopt;
}

}  // namespace evgeo
