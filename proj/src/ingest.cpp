#include "evgeo/ingest.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "evgeo/errors.hpp"
#include "evgeo/unicode.hpp"
#include "evgeo/util.hpp"

namespace evgeo {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;
// [1800-01-01, 2200-01-01) in Unix seconds.
constexpr std::int64_t kMinTimestamp = -5364662400;
constexpr std::int64_t kMaxTimestamp = 7258118400;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if (a % b != 0 && (a < 0) != (b < 0)) --q;
    return q;
}

}  // namespace

TimeFeature ole_date(std::int64_t unix_seconds) {
    if (unix_seconds < kMinTimestamp || unix_seconds >= kMaxTimestamp) {
        throw ValidationError("timestamp outside supported range [1800-01-01, 2200-01-01): " +
                              std::to_string(unix_seconds));
    }
    const std::int64_t delta = unix_seconds - kOleEpochUnixSeconds;
    TimeFeature tf;
    tf.integer_days = floor_div(delta, kSecondsPerDay);
    tf.day_fraction =
        static_cast<double>(delta - tf.integer_days * kSecondsPerDay) / kSecondsPerDay;
    return tf;
}

std::int64_t ole_to_unix(const TimeFeature& tf) {
    const double seconds = tf.day_fraction * kSecondsPerDay;
    return kOleEpochUnixSeconds + tf.integer_days * kSecondsPerDay +
           static_cast<std::int64_t>(std::llround(seconds));
}

namespace {

bool parse_int_field(std::string_view s, int& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

std::int64_t parse_rfc3339(const std::string& text) {
    // YYYY-MM-DD('T'|' ')HH:MM:SS[.frac][Z|±HH:MM|±HHMM]
    auto fail = [&](const char* why) -> std::int64_t {
        throw ValidationError("bad timestamp \"" + text + "\": " + why);
    };
    if (text.size() < 19) fail("too short");
    if (text[4] != '-' || text[7] != '-') fail("expected YYYY-MM-DD");
    const char sep = text[10];
    if (sep != 'T' && sep != 't' && sep != ' ') fail("expected 'T' date/time separator");
    if (text[13] != ':' || text[16] != ':') fail("expected HH:MM:SS");

    int y, mo, d, h, mi, s;
    std::string_view sv(text);
    if (!parse_int_field(sv.substr(0, 4), y) || !parse_int_field(sv.substr(5, 2), mo) ||
        !parse_int_field(sv.substr(8, 2), d) || !parse_int_field(sv.substr(11, 2), h) ||
        !parse_int_field(sv.substr(14, 2), mi) || !parse_int_field(sv.substr(17, 2), s)) {
        fail("non-numeric component");
    }

    std::size_t pos = 19;
    if (pos < text.size() && text[pos] == '.') {  // fractional seconds: parsed, truncated
        ++pos;
        const std::size_t start = pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
        if (pos == start) fail("empty fractional seconds");
    }

    int offset_sign = 0, oh = 0, om = 0;
    if (pos < text.size()) {
        const char c = text[pos];
        if (c == 'Z' || c == 'z') {
            ++pos;
        } else if (c == '+' || c == '-') {
            offset_sign = (c == '+') ? 1 : -1;
            ++pos;
            if (pos + 2 > text.size() || !parse_int_field(sv.substr(pos, 2), oh))
                fail("bad offset hours");
            pos += 2;
            if (pos < text.size() && text[pos] == ':') ++pos;
            if (pos + 2 <= text.size()) {
                if (!parse_int_field(sv.substr(pos, 2), om)) fail("bad offset minutes");
                pos += 2;
            }
        }
    }
    if (pos != text.size()) fail("trailing characters");
    if (mo < 1 || mo > 12) fail("month out of range");
    if (h > 23 || mi > 59 || s > 60) fail("time out of range");
    if (s == 60) s = 59;  // leap second, clamped

    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                             day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) fail("invalid calendar date");
    const auto days_count = sys_days(ymd).time_since_epoch().count();
    std::int64_t ts = static_cast<std::int64_t>(days_count) * kSecondsPerDay + h * 3600 +
                      mi * 60 + s;
    ts -= offset_sign * (oh * 3600 + om * 60);
    return ts;
}

std::string format_rfc3339(std::int64_t unix_seconds) {
    using namespace std::chrono;
    const std::int64_t days = floor_div(unix_seconds, kSecondsPerDay);
    std::int64_t rem = unix_seconds - days * kSecondsPerDay;
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ",
                  static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()), static_cast<int>(rem / 3600),
                  static_cast<int>((rem / 60) % 60), static_cast<int>(rem % 60));
    return buf;
}

namespace {

using nlohmann::json;

GeoPoint parse_truth_coord(double lat, double lon, const std::string& path, long lineno) {
    GeoPoint p{lat, lon};
    if (!p.valid()) {
        throw ParseError(path, lineno,
                         "coordinate out of range (lat=" + std::to_string(lat) +
                             ", lon=" + std::to_string(lon) + ")");
    }
    return p;
}

Message message_from_json(const json& j, const std::string& path, long lineno) {
    Message m;
    try {
        m.id = j.at("id").get<std::string>();
        m.text = j.at("text").get<std::string>();
        m.user_id = j.at("user_id").get<std::string>();
        m.mentioned_user_ids = j.at("mentions").get<std::vector<std::string>>();
        m.timestamp = parse_rfc3339(j.at("timestamp").get<std::string>());
        if (j.contains("tokens") && !j["tokens"].is_null())
            m.tokens = j["tokens"].get<std::vector<std::string>>();
        if (j.contains("event_label") && !j["event_label"].is_null())
            m.event_label = j["event_label"].get<std::string>();
        const bool has_lat = j.contains("lat") && !j["lat"].is_null();
        const bool has_lon = j.contains("lon") && !j["lon"].is_null();
        if (has_lat != has_lon) throw ValidationError("lat and lon must appear together");
        if (has_lat)
            m.truth_coord = parse_truth_coord(j["lat"].get<double>(), j["lon"].get<double>(),
                                              path, lineno);
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(path, lineno, e.what());
    }
    if (m.id.empty()) throw ParseError(path, lineno, "empty id");
    return m;
}

std::vector<std::string> split_tab(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        if (tab == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return out;
}

std::vector<std::string> split_comma(const std::string& s) {
    std::vector<std::string> out;
    if (s.empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto c = s.find(',', start);
        if (c == std::string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, c - start));
        start = c + 1;
    }
    return out;
}

std::vector<Message> load_tsv(const std::string& path) {
    std::vector<Message> messages;
    std::vector<std::string> header;
    for_each_line(path, [&](long lineno, const std::string& line) {
        auto fields = split_tab(line);
        if (header.empty()) {
            header = fields;
            return;
        }
        if (fields.size() != header.size())
            throw ParseError(path, lineno, "expected " + std::to_string(header.size()) +
                                               " columns, got " + std::to_string(fields.size()));
        Message m;
        bool has_lat = false, has_lon = false;
        double lat = 0, lon = 0;
        bool saw_id = false, saw_text = false, saw_user = false, saw_mentions = false,
             saw_ts = false;
        for (std::size_t i = 0; i < header.size(); ++i) {
            const std::string& col = header[i];
            const std::string& v = fields[i];
            try {
                if (col == "id") {
                    m.id = v;
                    saw_id = true;
                } else if (col == "text") {
                    m.text = v;
                    saw_text = true;
                } else if (col == "user_id") {
                    m.user_id = v;
                    saw_user = true;
                } else if (col == "mentions") {
                    m.mentioned_user_ids = split_comma(v);
                    saw_mentions = true;
                } else if (col == "timestamp") {
                    m.timestamp = parse_rfc3339(v);
                    saw_ts = true;
                } else if (col == "tokens") {
                    if (!v.empty()) m.tokens = split_comma(v);
                } else if (col == "event_label") {
                    if (!v.empty()) m.event_label = v;
                } else if (col == "lat") {
                    if (!v.empty()) {
                        lat = std::stod(v);
                        has_lat = true;
                    }
                } else if (col == "lon") {
                    if (!v.empty()) {
                        lon = std::stod(v);
                        has_lon = true;
                    }
                } else {
                    throw ValidationError("unknown column \"" + col + "\"");
                }
            } catch (const ParseError&) {
                throw;
            } catch (const std::exception& e) {
                throw ParseError(path, lineno, std::string(e.what()) + " in column " + col);
            }
        }
        if (!saw_id || !saw_text || !saw_user || !saw_mentions || !saw_ts)
            throw ParseError(path, lineno, "missing required column(s)");
        if (has_lat != has_lon) throw ParseError(path, lineno, "lat and lon must appear together");
        if (has_lat) m.truth_coord = parse_truth_coord(lat, lon, path, lineno);
        if (m.id.empty()) throw ParseError(path, lineno, "empty id");
        messages.push_back(std::move(m));
    });
    return messages;
}

}  // namespace

std::vector<Message> load_dataset(const std::string& path, DatasetFormat format) {
    std::vector<Message> messages;
    if (format == DatasetFormat::jsonl) {
        for_each_line(path, [&](long lineno, const std::string& line) {
            json j;
            try {
                j = json::parse(line);
            } catch (const json::parse_error& e) {
                throw ParseError(path, lineno, e.what());
            }
            messages.push_back(message_from_json(j, path, lineno));
        });
    } else {
        messages = load_tsv(path);
    }
    std::set<std::string> seen;
    for (std::size_t i = 0; i < messages.size(); ++i) {
        if (!seen.insert(messages[i].id).second)
            throw ValidationError("duplicate message id \"" + messages[i].id + "\" in " + path);
    }
    return messages;
}

std::vector<std::string> tokenize(const Message& message, const Gazetteer& gazetteer) {
    if (message.tokens) return *message.tokens;

    std::vector<std::string> out;
    const std::string& text = message.text;
    std::string pending;                      // current plain-text token
    auto script = ScriptClass::separator;     // script of `pending`
    auto flush = [&] {
        if (!pending.empty()) {
            out.push_back(std::move(pending));
            pending.clear();
        }
        script = ScriptClass::separator;
    };

    std::size_t i = 0;
    while (i < text.size()) {
        const auto match = gazetteer.longest_match(text, i);
        if (match.length > 0) {
            flush();
            out.push_back(text.substr(i, match.length));
            i += match.length;
            continue;
        }
        std::size_t len = 0;
        const char32_t cp = utf8_decode(text, i, &len);
        const auto cls = script_class(cp);
        if (cls == ScriptClass::separator) {
            flush();
        } else {
            if (cls != script) flush();
            pending.append(text, i, len);
            script = cls;
        }
        i += len;
    }
    flush();
    return out;
}

std::vector<std::vector<std::string>> tokenize_all(const std::vector<Message>& messages,
                                                   const Gazetteer& gazetteer) {
    std::vector<std::vector<std::string>> out;
    out.reserve(messages.size());
    for (const auto& m : messages) out.push_back(tokenize(m, gazetteer));
    return out;
}

}  // namespace evgeo
