#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evgeo/gazetteer.hpp"
#include "evgeo/geo.hpp"

namespace evgeo {

// One social post. timestamp is Unix seconds, UTC.
struct Message {
    std::string id;
    std::string text;
    std::string user_id;
    std::vector<std::string> mentioned_user_ids;
    std::int64_t timestamp = 0;
    std::optional<std::vector<std::string>> tokens;  // pre-computed tokens, if any
    std::optional<std::string> event_label;          // ground truth
    std::optional<GeoPoint> truth_coord;
};

// Timestamp decomposed into whole days since the OLE automation epoch
// (1899-12-30T00:00:00Z) and the fraction of day elapsed.
struct TimeFeature {
    std::int64_t integer_days = 0;
    double day_fraction = 0.0;  // in [0, 1)
};

inline constexpr std::int64_t kOleEpochUnixSeconds = -2209161600;  // 1899-12-30T00:00:00Z

// Valid for timestamps in [1800-01-01, 2200-01-01); throws ValidationError outside.
TimeFeature ole_date(std::int64_t unix_seconds);

// Inverse of ole_date up to sub-second rounding.
std::int64_t ole_to_unix(const TimeFeature& tf);

// RFC-3339 / ISO-8601 timestamp with optional fractional seconds and offset.
// A missing offset means UTC. Fractional seconds are truncated.
std::int64_t parse_rfc3339(const std::string& text);
std::string format_rfc3339(std::int64_t unix_seconds);

enum class DatasetFormat { jsonl, tsv };

// Loads one Message per record, in file order. Duplicate ids and out-of-range
// coordinates are rejected with the offending line number.
std::vector<Message> load_dataset(const std::string& path, DatasetFormat format);

// Pre-supplied tokens are returned verbatim. Otherwise the text is segmented
// at whitespace/script boundaries, with maximal gazetteer-name substrings
// emitted as single tokens (longest match, left to right).
std::vector<std::string> tokenize(const Message& message, const Gazetteer& gazetteer);

// tokenize() for every message, aligned by index.
std::vector<std::vector<std::string>> tokenize_all(const std::vector<Message>& messages,
                                                   const Gazetteer& gazetteer);

}  // namespace evgeo
