#include <doctest.h>

#include <atomic>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "evgeo/errors.hpp"
#include "evgeo/gazetteer.hpp"
#include "test_util.hpp"

using namespace evgeo;
using test::msg;

namespace {

GazetteerEntry entry(std::string name, double lat, double lon,
                     std::vector<std::string> aliases = {}, HierarchyChain chain = {}) {
    GazetteerEntry e;
    e.canonical_name = std::move(name);
    e.aliases = std::move(aliases);
    e.chain = std::move(chain);
    e.coord = {lat, lon};
    return e;
}

HierarchyChain chain2(std::string province, std::string city) {
    HierarchyChain c;
    c.set(Level::province, std::move(province));
    c.set(Level::city, std::move(city));
    return c;
}

// Local stand-in for a real geocoding service.
struct TestServer {
    httplib::Server svr;
    int port = 0;
    std::thread worker;

    TestServer() {
        port = svr.bind_to_any_port("127.0.0.1");
        worker = std::thread([this] { svr.listen_after_bind(); });
        svr.wait_until_ready();
    }
    ~TestServer() {
        svr.stop();
        worker.join();
    }
    std::string url(const std::string& rest) const {
        return "http://127.0.0.1:" + std::to_string(port) + rest;
    }
};

RemoteGeocoderConfig fast_remote(const std::string& endpoint) {
    RemoteGeocoderConfig cfg;
    cfg.endpoint_template = endpoint;
    cfg.rate_limit_per_s = 10000.0;
    cfg.backoff_base_ms = 1;
    return cfg;
}

}  // namespace

TEST_CASE("gazetteer load and resolve") {
    test::TempDir dir;
    const auto path = dir.file("gaz.jsonl");

    SUBCASE("entries, aliases, chains") {
        test::write_text(
            path,
            R"({"name":"West Lake","aliases":["西湖"],"chain":{"province":"Zhejiang","city":"Hangzhou","district":"West Lake District"},"lat":30.243,"lon":120.144})"
            "\n"
            R"({"name":"Nanchang","aliases":[],"chain":{"province":"Jiangxi","city":"Nanchang"},"lat":28.682,"lon":115.858})"
            "\n");
        const auto g = Gazetteer::load(path);
        CHECK(g.size() == 2);
        CHECK(g.warnings().empty());

        const auto* west = g.resolve("West Lake");
        REQUIRE(west != nullptr);
        CHECK(west->coord.lat == doctest::Approx(30.243));
        CHECK(west->chain.at(Level::province) == "Zhejiang");
        CHECK(west->chain.at(Level::district) == "West Lake District");
        CHECK_FALSE(west->chain.at(Level::road).has_value());

        // Alias and canonical land on the same entry.
        CHECK(g.resolve("西湖") == west);
        CHECK(g.resolve("Hangzhou") == nullptr);
        CHECK(g.resolve("West") == nullptr);  // no prefix fuzzing
    }

    SUBCASE("empty file") {
        test::write_text(path, "");
        const auto g = Gazetteer::load(path);
        CHECK(g.size() == 0);
        CHECK(g.resolve("anything") == nullptr);
    }

    SUBCASE("duplicate names keep the first entry and warn") {
        test::write_text(path,
                         R"({"name":"Springfield","aliases":[],"lat":1.0,"lon":1.0})"
                         "\n"
                         R"({"name":"Springfield","aliases":[],"lat":2.0,"lon":2.0})"
                         "\n");
        const auto g = Gazetteer::load(path);
        CHECK(g.size() == 2);
        REQUIRE(g.warnings().size() == 1);
        CHECK(g.resolve("Springfield")->coord.lat == 1.0);
    }

    SUBCASE("schema violations carry line numbers") {
        test::write_text(path,
                         R"({"name":"ok","aliases":[],"lat":0.0,"lon":0.0})"
                         "\n"
                         R"({"name":"bad","aliases":[],"lat":95.0,"lon":0.0})"
                         "\n");
        try {
            Gazetteer::load(path);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line == 2);
        }
    }

    SUBCASE("alias equal to the canonical name rejected") {
        test::write_text(path, R"({"name":"Twin","aliases":["Twin"],"lat":0.0,"lon":0.0})"
                               "\n");
        CHECK_THROWS_AS(Gazetteer::load(path), ParseError);
    }

    SUBCASE("missing coordinates rejected") {
        test::write_text(path, R"({"name":"nowhere","aliases":[]})"
                               "\n");
        CHECK_THROWS_AS(Gazetteer::load(path), ParseError);
    }
}

TEST_CASE("longest_match prefers the longest name at a position") {
    Gazetteer g(std::vector<GazetteerEntry>{
        entry("West Lake", 30.24, 120.14),
        entry("West Lake District", 30.26, 120.13),
    });
    const std::string text = "near West Lake District today";
    const auto m = g.longest_match(text, 5);
    REQUIRE(m.entry != nullptr);
    CHECK(m.length == std::string("West Lake District").size());
    CHECK(m.entry->canonical_name == "West Lake District");
    CHECK(g.longest_match(text, 0).length == 0);
}

TEST_CASE("extract_toponyms") {
    Gazetteer g(std::vector<GazetteerEntry>{
        entry("南昌", 28.68, 115.86),
        entry("West Lake", 30.24, 120.14),
        entry("West Lake District", 30.26, 120.13),
    });

    SUBCASE("one mention per occurrence") {
        const auto mentions = extract_toponyms({msg("m1", "南昌大雾，南昌高速封闭")}, g);
        REQUIRE(mentions.size() == 2);
        CHECK(mentions[0].surface == "南昌");
        CHECK(mentions[1].surface == "南昌");
        CHECK(mentions[0].message_id == "m1");
        CHECK(mentions[0].entry == mentions[1].entry);
    }

    SUBCASE("overlap resolves to the longest name") {
        const auto mentions = extract_toponyms({msg("m1", "crowds at West Lake District")}, g);
        REQUIRE(mentions.size() == 1);
        CHECK(mentions[0].surface == "West Lake District");
    }

    SUBCASE("no hits") {
        CHECK(extract_toponyms({msg("m1", "nothing geographic here")}, g).empty());
    }

    SUBCASE("surfaces occur verbatim in the source text") {
        const std::vector<Message> msgs = {msg("a", "fog West Lake 南昌 mixed"),
                                           msg("b", "more 南昌 text")};
        for (const auto& m : extract_toponyms(msgs, g)) {
            const auto& source = m.message_id == "a" ? msgs[0].text : msgs[1].text;
            CHECK(source.find(m.surface) != std::string::npos);
            CHECK(m.entry != nullptr);
        }
    }
}

TEST_CASE("geocode cache") {
    SUBCASE("memory-only store and lookup") {
        GeocodeCache cache;
        CHECK_FALSE(cache.lookup("x").has_value());
        GeocodeResult r;
        r.point = {10.0, 20.0};
        r.chain = chain2("P", "C");
        cache.store("x", r);
        const auto hit = cache.lookup("x");
        REQUIRE(hit.has_value());
        CHECK(hit->point.lat == 10.0);
        CHECK(hit->chain.at(Level::city) == "C");
        CHECK(cache.size() == 1);

        // Re-storing the same name is a no-op, not a duplicate.
        cache.store("x", r);
        CHECK(cache.size() == 1);
    }

    SUBCASE("persists across reopen") {
        test::TempDir dir;
        const auto path = dir.file("cache.jsonl");
        {
            GeocodeCache cache(path);
            GeocodeResult r;
            r.point = {-5.5, 33.25};
            cache.store("somewhere", r);
        }
        GeocodeCache reopened(path);
        const auto hit = reopened.lookup("somewhere");
        REQUIRE(hit.has_value());
        CHECK(hit->point.lat == -5.5);
        CHECK(hit->point.lon == 33.25);
    }
}

TEST_CASE("geocode lookup order") {
    Gazetteer g(std::vector<GazetteerEntry>{entry("Known", 1.0, 2.0)});

    SUBCASE("gazetteer first") {
        const auto r = geocode("Known", g);
        REQUIRE(r.has_value());
        CHECK(r->point.lat == 1.0);
    }

    SUBCASE("cache second") {
        GeocodeCache cache;
        GeocodeResult stored;
        stored.point = {7.0, 8.0};
        cache.store("Cached", stored);
        const auto r = geocode("Cached", g, nullptr, &cache);
        REQUIRE(r.has_value());
        CHECK(r->point.lat == 7.0);
    }

    SUBCASE("absent when everything misses") {
        GeocodeCache cache;
        CHECK_FALSE(geocode("Unknown", g, nullptr, &cache).has_value());
        CHECK_FALSE(geocode("Unknown", g).has_value());
    }
}

TEST_CASE("remote geocoder") {
    SUBCASE("rejects a relative endpoint") {
        RemoteGeocoderConfig cfg;
        cfg.endpoint_template = "/geo?q={name}";
        CHECK_THROWS_AS(RemoteGeocoder{cfg}, ValidationError);
    }

    SUBCASE("parses a successful response") {
        TestServer server;
        server.svr.Get("/geo", [](const httplib::Request& req, httplib::Response& res) {
            if (req.get_param_value("q") == "Hangzhou")
                res.set_content(
                    R"({"lat":30.27,"lon":120.15,"chain":{"province":"Zhejiang","city":"Hangzhou"}})",
                    "application/json");
            else
                res.status = 404;
        });
        RemoteGeocoder remote(fast_remote(server.url("/geo?q={name}")));
        const auto r = remote.query("Hangzhou");
        REQUIRE(r.has_value());
        CHECK(r->point.lat == doctest::Approx(30.27));
        CHECK(r->chain.at(Level::province) == "Zhejiang");
        CHECK(remote.request_count() == 1);

        CHECK_FALSE(remote.query("Atlantis").has_value());  // 404, no retries
        CHECK(remote.request_count() == 2);
    }

    SUBCASE("percent-encodes the name") {
        TestServer server;
        std::string seen;
        server.svr.Get("/geo", [&](const httplib::Request& req, httplib::Response& res) {
            seen = req.get_param_value("q");
            res.set_content(R"({"lat":1.0,"lon":2.0})", "application/json");
        });
        RemoteGeocoder remote(fast_remote(server.url("/geo?q={name}")));
        REQUIRE(remote.query("西湖 district").has_value());
        CHECK(seen == "西湖 district");  // httplib decodes; round trip survives
    }

    SUBCASE("retries server errors then succeeds") {
        TestServer server;
        std::atomic<int> calls{0};
        server.svr.Get("/geo", [&](const httplib::Request&, httplib::Response& res) {
            if (++calls <= 2) {
                res.status = 503;
                return;
            }
            res.set_content(R"({"lat":5.0,"lon":6.0})", "application/json");
        });
        RemoteGeocoder remote(fast_remote(server.url("/geo?q={name}")));
        const auto r = remote.query("flaky");
        REQUIRE(r.has_value());
        CHECK(r->point.lat == 5.0);
        CHECK(remote.request_count() == 3);
    }

    SUBCASE("gives up after max_retries server errors") {
        TestServer server;
        server.svr.Get("/geo", [](const httplib::Request&, httplib::Response& res) {
            res.status = 500;
        });
        auto cfg = fast_remote(server.url("/geo?q={name}"));
        cfg.max_retries = 2;
        RemoteGeocoder remote(cfg);
        CHECK_FALSE(remote.query("down").has_value());
        CHECK(remote.request_count() == 3);  // initial try + 2 retries
    }

    SUBCASE("malformed body degrades to absent") {
        TestServer server;
        server.svr.Get("/geo", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("not json at all", "application/json");
        });
        RemoteGeocoder remote(fast_remote(server.url("/geo?q={name}")));
        CHECK_FALSE(remote.query("garbled").has_value());
        CHECK(remote.request_count() == 1);
    }

    SUBCASE("out-of-range coordinates degrade to absent") {
        TestServer server;
        server.svr.Get("/geo", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"lat":123.0,"lon":456.0})", "application/json");
        });
        RemoteGeocoder remote(fast_remote(server.url("/geo?q={name}")));
        CHECK_FALSE(remote.query("mars").has_value());
    }

    SUBCASE("api key appended from the environment") {
        TestServer server;
        std::string seen_key;
        server.svr.Get("/geo", [&](const httplib::Request& req, httplib::Response& res) {
            seen_key = req.get_param_value("key");
            res.set_content(R"({"lat":1.0,"lon":1.0})", "application/json");
        });
        ::setenv("EVGEO_TEST_GEO_KEY", "sekrit", 1);
        auto cfg = fast_remote(server.url("/geo?q={name}"));
        cfg.api_key_env = "EVGEO_TEST_GEO_KEY";
        RemoteGeocoder remote(cfg);
        REQUIRE(remote.query("anywhere").has_value());
        CHECK(seen_key == "sekrit");
        ::unsetenv("EVGEO_TEST_GEO_KEY");
    }

    SUBCASE("geocode persists remote results: one request per name") {
        TestServer server;
        server.svr.Get("/geo", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"lat":9.0,"lon":10.0,"chain":{"province":"P"}})",
                            "application/json");
        });
        Gazetteer g;  // empty: everything goes remote
        GeocodeCache cache;
        RemoteGeocoder remote(fast_remote(server.url("/geo?q={name}")));
        for (int i = 0; i < 5; ++i) {
            const auto r = geocode("OnlyRemote", g, &remote, &cache);
            REQUIRE(r.has_value());
            CHECK(r->point.lat == 9.0);
        }
        CHECK(remote.request_count() == 1);
        CHECK(cache.size() == 1);
    }
}
