#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evgeo/gazetteer.hpp"
#include "evgeo/ingest.hpp"

namespace evgeo::fixture {

// One planted event: a home city, its administrative neighborhood, a
// distinctive vocabulary, and a far-away noise city from a different province.
struct EventSpec {
    std::string event_id;
    std::string province;
    std::string city;
    std::string city_alias_cjk;
    GeoPoint center;
    std::vector<std::string> districts;  // first one is the township's parent
    std::string township;
    std::string road;
    std::string noise_city;
    std::vector<std::string> vocabulary;
};

struct FixtureOptions {
    int messages_per_event = 40;
    double word_noise = 0.05;      // chance a word comes from another event
    double toponym_noise = 0.10;   // chance a message carries the noise city
    double cjk_alias_rate = 0.2;   // chance a city mention uses its CJK alias
    std::uint64_t seed = 7;
};

const std::vector<EventSpec>& fixture_events();

// The curated gazetteer shipped with the repo: provinces at their capitals,
// fixture cities with districts/townships/roads, composite aliases so
// chain-assembled candidate strings resolve offline, and noise cities.
std::vector<GazetteerEntry> fixture_gazetteer();

// Deterministic planted-partition corpus: distinctive vocabularies, light
// cross-event word noise, 1-3 toponym mentions per message, per-event time
// windows and user pools. Every message is labeled and carries its event
// center as ground truth.
std::vector<Message> make_fixture(const FixtureOptions& opt = {});

}  // namespace evgeo::fixture
