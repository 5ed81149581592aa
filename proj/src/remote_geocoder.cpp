#include <chrono>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "evgeo/errors.hpp"
#include "evgeo/gazetteer.hpp"

namespace evgeo {

using nlohmann::json;

namespace {

std::string percent_encode(const std::string& s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    out.reserve(s.size() * 3);
    for (unsigned char c : s) {
        const bool unreserved = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                                (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.' ||
                                c == '~';
        if (unreserved) {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xF]);
        }
    }
    return out;
}

// "http://host:port/path?q={name}" -> (base "http://host:port", rest "/path?q={name}")
bool split_url(const std::string& url, std::string* base, std::string* rest) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) return false;
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        *base = url;
        *rest = "/";
    } else {
        *base = url.substr(0, path_start);
        *rest = url.substr(path_start);
    }
    return true;
}

std::optional<double> json_number_at(const json& body, const std::string& pointer) {
    try {
        const json& v = body.at(json::json_pointer(pointer));
        if (v.is_number()) return v.get<double>();
        if (v.is_string()) return std::stod(v.get<std::string>());
    } catch (const std::exception&) {
    }
    return std::nullopt;
}

}  // namespace

struct RemoteGeocoder::Impl {
    explicit Impl(const std::string& base) : client(base) {
        client.set_connection_timeout(5, 0);
        client.set_read_timeout(5, 0);
    }
    httplib::Client client;
    std::mutex mu;  // serializes calls; the rate limit caps throughput anyway
    std::chrono::steady_clock::time_point next_allowed = std::chrono::steady_clock::now();
};

RemoteGeocoder::RemoteGeocoder(RemoteGeocoderConfig cfg) : cfg_(std::move(cfg)) {
    std::string base, rest;
    if (!split_url(cfg_.endpoint_template, &base, &rest))
        throw ValidationError("remote geocoder endpoint must be an absolute URL: " +
                              cfg_.endpoint_template);
    impl_ = std::make_unique<Impl>(base);
}

RemoteGeocoder::~RemoteGeocoder() = default;

std::optional<GeocodeResult> RemoteGeocoder::query(const std::string& name) {
    std::lock_guard<std::mutex> lock(impl_->mu);
    std::string base, rest;
    split_url(cfg_.endpoint_template, &base, &rest);

    const std::string placeholder = "{name}";
    std::string path = rest;
    if (const auto at = path.find(placeholder); at != std::string::npos)
        path.replace(at, placeholder.size(), percent_encode(name));
    if (!cfg_.api_key_env.empty()) {
        if (const char* key = std::getenv(cfg_.api_key_env.c_str())) {
            path += (path.find('?') == std::string::npos ? '?' : '&');
            path += cfg_.api_key_param + "=" + percent_encode(key);
        }
    }

    const auto interval = std::chrono::duration<double>(1.0 / cfg_.rate_limit_per_s);
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        if (attempt > 0) {
            const int backoff = cfg_.backoff_base_ms << (attempt - 1);
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
        }
        std::this_thread::sleep_until(impl_->next_allowed);
        impl_->next_allowed = std::chrono::steady_clock::now() +
                              std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                  interval);
        ++requests_;
        auto res = impl_->client.Get(path);
        if (!res) {
            std::cerr << "geocoder: transport error for \"" << name << "\" (attempt "
                      << attempt + 1 << ")\n";
            continue;
        }
        if (res->status >= 500) {
            std::cerr << "geocoder: HTTP " << res->status << " for \"" << name << "\" (attempt "
                      << attempt + 1 << ")\n";
            continue;
        }
        if (res->status != 200) {
            std::cerr << "geocoder: HTTP " << res->status << " for \"" << name << "\"\n";
            return std::nullopt;
        }
        json body;
        try {
            body = json::parse(res->body);
        } catch (const json::parse_error& e) {
            std::cerr << "geocoder: bad JSON for \"" << name << "\": " << e.what() << "\n";
            return std::nullopt;
        }
        const auto lat = json_number_at(body, cfg_.lat_path);
        const auto lon = json_number_at(body, cfg_.lon_path);
        if (!lat || !lon) {
            std::cerr << "geocoder: no coordinates in response for \"" << name << "\"\n";
            return std::nullopt;
        }
        GeocodeResult result;
        result.point = {*lat, *lon};
        if (!result.point.valid()) {
            std::cerr << "geocoder: out-of-range coordinates for \"" << name << "\"\n";
            return std::nullopt;
        }
        if (!cfg_.chain_path.empty()) {
            try {
                const json& c = body.at(json::json_pointer(cfg_.chain_path));
                for (int l = 0; l < kLevelCount; ++l) {
                    const char* key = kLevelNames[l];
                    if (c.contains(key) && c[key].is_string() &&
                        !c[key].get<std::string>().empty())
                        result.chain.levels[l] = c[key].get<std::string>();
                }
            } catch (const std::exception&) {
                // chain is optional
            }
        }
        return result;
    }
    std::cerr << "geocoder: giving up on \"" << name << "\" after "
              << cfg_.max_retries + 1 << " attempts\n";
    return std::nullopt;
}

}  // namespace evgeo
