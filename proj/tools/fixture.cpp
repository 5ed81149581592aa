#include "fixture.hpp"

#include <random>

#include "evgeo/util.hpp"

namespace evgeo::fixture {

namespace {

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
    const auto i = static_cast<std::size_t>(uniform_unit(rng) * static_cast<double>(n));
    return std::min(i, n - 1);
}

GazetteerEntry province_entry(const std::string& name, const std::string& cjk, double lat,
                              double lon) {
    GazetteerEntry e;
    e.canonical_name = name;
    e.aliases = {cjk};
    e.chain.set(Level::province, name);
    e.coord = {lat, lon};
    return e;
}

GazetteerEntry city_entry(const std::string& province, const std::string& name,
                          const std::string& cjk, double lat, double lon) {
    GazetteerEntry e;
    e.canonical_name = name;
    e.aliases = {cjk};
    e.chain.set(Level::province, province);
    e.chain.set(Level::city, name);
    e.coord = {lat, lon};
    return e;
}

GazetteerEntry district_entry(const std::string& province, const std::string& city,
                              const std::string& name, const std::string& cjk, double lat,
                              double lon) {
    GazetteerEntry e;
    e.canonical_name = name;
    // The composite alias lets a chain-assembled "province city district"
    // candidate resolve without a remote geocoder.
    e.aliases = {cjk, province + " " + city + " " + name};
    e.chain.set(Level::province, province);
    e.chain.set(Level::city, city);
    e.chain.set(Level::district, name);
    e.coord = {lat, lon};
    return e;
}

GazetteerEntry township_entry(const std::string& province, const std::string& city,
                              const std::string& district, const std::string& name,
                              const std::string& cjk, double lat, double lon) {
    GazetteerEntry e;
    e.canonical_name = name;
    e.aliases = {cjk, province + " " + city + " " + district + " " + name};
    e.chain.set(Level::province, province);
    e.chain.set(Level::city, city);
    e.chain.set(Level::district, district);
    e.chain.set(Level::township, name);
    e.coord = {lat, lon};
    return e;
}

GazetteerEntry road_entry(const std::string& province, const std::string& city,
                          const std::string& district, const std::string& township,
                          const std::string& name, const std::string& cjk, double lat,
                          double lon) {
    GazetteerEntry e;
    e.canonical_name = name;
    e.aliases = {cjk, province + " " + city + " " + district + " " + township + " " + name,
                 province + " " + city + " " + district + " " + name};
    e.chain.set(Level::province, province);
    e.chain.set(Level::city, city);
    e.chain.set(Level::district, district);
    e.chain.set(Level::township, township);
    e.chain.set(Level::road, name);
    e.coord = {lat, lon};
    return e;
}

}  // namespace

const std::vector<EventSpec>& fixture_events() {
    static const std::vector<EventSpec> events = {
        {"evt-flood", "Henan", "Zhengzhou", "郑州", {34.7466, 113.6254},
         {"Jinshui District", "Erqi District", "Zhongyuan District"},
         "Huayuan Road Subdistrict", "Nongye Road", "Wuhan",
         {"rainstorm", "flooding", "subway", "waterlogging", "rescue", "stranded", "downpour",
          "emergency", "shelter", "evacuation", "pumping", "umbrella"}},
        {"evt-fog", "Jiangxi", "Nanchang", "南昌", {28.6820, 115.8579},
         {"Donghu District", "Qingshanhu District", "Qingyunpu District"},
         "Baihuazhou Subdistrict", "Minde Road", "Jinan",
         {"fog", "visibility", "highway", "pileup", "collision", "expressway", "morning", "dense",
          "crash", "lanes", "closure", "caution"}},
        {"evt-typhoon", "Guangdong", "Guangzhou", "广州", {23.1291, 113.2644},
         {"Tianhe District", "Yuexiu District", "Haizhu District"},
         "Shipai Subdistrict", "Tianhe Road", "Qingdao",
         {"typhoon", "landfall", "gusts", "coastline", "ferry", "suspended", "cyclone", "surge",
          "evacuate", "harbor", "alert", "shutters"}},
        {"evt-marathon", "Zhejiang", "Hangzhou", "杭州", {30.2741, 120.1551},
         {"West Lake District", "Gongshu District", "Binjiang District"},
         "West Lake Street", "Manjuelong Road", "Kunming",
         {"marathon", "runners", "finish", "course", "spectators", "cheering", "race", "medal",
          "kilometer", "pace", "cheers", "sunday"}},
        {"evt-quake", "Sichuan", "Chengdu", "成都", {30.5728, 104.0668},
         {"Jinjiang District", "Wuhou District", "Qingyang District"},
         "Chunxi Road Subdistrict", "Chunxi Road", "Xian",
         {"earthquake", "tremor", "aftershock", "magnitude", "epicenter", "seismic", "buildings",
          "sway", "residents", "drill", "alarm", "depth"}},
    };
    return events;
}

std::vector<GazetteerEntry> fixture_gazetteer() {
    std::vector<GazetteerEntry> g;

    g.push_back(province_entry("Henan", "河南", 34.7466, 113.6254));
    g.push_back(province_entry("Jiangxi", "江西", 28.6820, 115.8579));
    g.push_back(province_entry("Guangdong", "广东", 23.1291, 113.2644));
    g.push_back(province_entry("Zhejiang", "浙江", 30.2741, 120.1551));
    g.push_back(province_entry("Sichuan", "四川", 30.5728, 104.0668));
    g.push_back(province_entry("Hubei", "湖北", 30.5928, 114.3055));
    g.push_back(province_entry("Shandong", "山东", 36.6512, 117.1201));
    g.push_back(province_entry("Shaanxi", "陕西", 34.3416, 108.9398));
    g.push_back(province_entry("Yunnan", "云南", 25.0389, 102.7183));

    g.push_back(city_entry("Henan", "Zhengzhou", "郑州", 34.7466, 113.6254));
    g.push_back(city_entry("Jiangxi", "Nanchang", "南昌", 28.6820, 115.8579));
    g.push_back(city_entry("Guangdong", "Guangzhou", "广州", 23.1291, 113.2644));
    g.push_back(city_entry("Zhejiang", "Hangzhou", "杭州", 30.2741, 120.1551));
    g.push_back(city_entry("Sichuan", "Chengdu", "成都", 30.5728, 104.0668));
    g.push_back(city_entry("Hubei", "Wuhan", "武汉", 30.5928, 114.3055));
    g.push_back(city_entry("Shandong", "Jinan", "济南", 36.6512, 117.1201));
    g.push_back(city_entry("Shandong", "Qingdao", "青岛", 36.0671, 120.3826));
    g.push_back(city_entry("Shaanxi", "Xian", "西安", 34.3416, 108.9398));
    g.push_back(city_entry("Yunnan", "Kunming", "昆明", 25.0389, 102.7183));

    g.push_back(district_entry("Henan", "Zhengzhou", "Jinshui District", "金水区", 34.8005, 113.6605));
    g.push_back(district_entry("Henan", "Zhengzhou", "Erqi District", "二七区", 34.7251, 113.6401));
    g.push_back(district_entry("Henan", "Zhengzhou", "Zhongyuan District", "中原区", 34.7483, 113.6130));
    g.push_back(township_entry("Henan", "Zhengzhou", "Jinshui District", "Huayuan Road Subdistrict",
                               "花园路街道", 34.7800, 113.6800));
    g.push_back(road_entry("Henan", "Zhengzhou", "Jinshui District", "Huayuan Road Subdistrict",
                           "Nongye Road", "农业路", 34.7795, 113.6606));

    g.push_back(district_entry("Jiangxi", "Nanchang", "Donghu District", "东湖区", 28.6852, 115.8941));
    g.push_back(district_entry("Jiangxi", "Nanchang", "Qingshanhu District", "青山湖区", 28.6820, 115.9622));
    g.push_back(district_entry("Jiangxi", "Nanchang", "Qingyunpu District", "青云谱区", 28.6219, 115.9252));
    g.push_back(township_entry("Jiangxi", "Nanchang", "Donghu District", "Baihuazhou Subdistrict",
                               "百花洲街道", 28.6870, 115.9000));
    g.push_back(road_entry("Jiangxi", "Nanchang", "Donghu District", "Baihuazhou Subdistrict",
                           "Minde Road", "民德路", 28.6850, 115.8990));

    g.push_back(district_entry("Guangdong", "Guangzhou", "Tianhe District", "天河区", 23.1247, 113.3616));
    g.push_back(district_entry("Guangdong", "Guangzhou", "Yuexiu District", "越秀区", 23.1289, 113.2668));
    g.push_back(district_entry("Guangdong", "Guangzhou", "Haizhu District", "海珠区", 23.0838, 113.3172));
    g.push_back(township_entry("Guangdong", "Guangzhou", "Tianhe District", "Shipai Subdistrict",
                               "石牌街道", 23.1320, 113.3320));
    g.push_back(road_entry("Guangdong", "Guangzhou", "Tianhe District", "Shipai Subdistrict",
                           "Tianhe Road", "天河路", 23.1330, 113.3280));

    g.push_back(district_entry("Zhejiang", "Hangzhou", "West Lake District", "西湖区", 30.2595, 120.1305));
    g.push_back(district_entry("Zhejiang", "Hangzhou", "Gongshu District", "拱墅区", 30.3190, 120.1498));
    g.push_back(district_entry("Zhejiang", "Hangzhou", "Binjiang District", "滨江区", 30.2084, 120.2119));
    g.push_back(township_entry("Zhejiang", "Hangzhou", "West Lake District", "West Lake Street",
                               "西湖街道", 30.2200, 120.1200));
    g.push_back(road_entry("Zhejiang", "Hangzhou", "West Lake District", "West Lake Street",
                           "Manjuelong Road", "满觉陇路", 30.2110, 120.1310));

    g.push_back(district_entry("Sichuan", "Chengdu", "Jinjiang District", "锦江区", 30.6573, 104.0807));
    g.push_back(district_entry("Sichuan", "Chengdu", "Wuhou District", "武侯区", 30.6424, 104.0435));
    g.push_back(district_entry("Sichuan", "Chengdu", "Qingyang District", "青羊区", 30.6739, 104.0625));
    g.push_back(township_entry("Sichuan", "Chengdu", "Jinjiang District", "Chunxi Road Subdistrict",
                               "春熙路街道", 30.6580, 104.0810));
    g.push_back(road_entry("Sichuan", "Chengdu", "Jinjiang District", "Chunxi Road Subdistrict",
                           "Chunxi Road", "春熙路", 30.6575, 104.0805));

    // The scenic-landmark entry: resolvable, city-level chain, distinct from
    // West Lake District/Street above. Longest match must prefer those.
    {
        GazetteerEntry e;
        e.canonical_name = "West Lake";
        e.aliases = {"西湖"};
        e.chain.set(Level::province, "Zhejiang");
        e.chain.set(Level::city, "Hangzhou");
        e.chain.set(Level::district, "West Lake District");
        e.coord = {30.2430, 120.1440};
        g.push_back(e);
    }
    return g;
}

std::vector<Message> make_fixture(const FixtureOptions& opt) {
    const auto& events = fixture_events();
    std::mt19937_64 rng(opt.seed);
    std::vector<Message> messages;
    messages.reserve(events.size() * static_cast<std::size_t>(opt.messages_per_event));

    constexpr std::int64_t kBase = 1719792000;     // 2024-07-01T00:00:00Z
    constexpr std::int64_t kEventGap = 3 * 86400;  // event windows 3 days apart

    int serial = 0;
    for (std::size_t ev = 0; ev < events.size(); ++ev) {
        const EventSpec& spec = events[ev];
        for (int i = 0; i < opt.messages_per_event; ++i) {
            Message m;
            m.id = "m" + std::to_string(1000 + serial++);
            m.event_label = spec.event_id;
            m.truth_coord = spec.center;
            m.timestamp = kBase + static_cast<std::int64_t>(ev) * kEventGap + i * 4000 +
                          static_cast<std::int64_t>(pick(rng, 3600));
            m.user_id = "u" + std::to_string(ev) + "_" + std::to_string(pick(rng, 8));
            if (uniform_unit(rng) < 0.5) {
                std::string other;
                do {
                    other = "u" + std::to_string(ev) + "_" + std::to_string(pick(rng, 8));
                } while (other == m.user_id);
                m.mentioned_user_ids.push_back(other);
            }

            std::vector<std::string> tokens;
            const std::size_t n_words = 6 + pick(rng, 4);
            for (std::size_t w = 0; w < n_words; ++w) {
                if (uniform_unit(rng) < opt.word_noise) {
                    std::size_t other = pick(rng, events.size() - 1);
                    if (other >= ev) ++other;
                    tokens.push_back(events[other].vocabulary[pick(
                        rng, events[other].vocabulary.size())]);
                } else {
                    tokens.push_back(spec.vocabulary[pick(rng, spec.vocabulary.size())]);
                }
            }

            const std::size_t n_topo = 1 + (uniform_unit(rng) < 0.6 ? 0
                                            : uniform_unit(rng) < 0.75 ? 1
                                                                       : 2);
            for (std::size_t t = 0; t < n_topo; ++t) {
                const double kind = uniform_unit(rng);
                std::string surface;
                if (kind < 0.45) {
                    surface = (uniform_unit(rng) < opt.cjk_alias_rate) ? spec.city_alias_cjk
                                                                       : spec.city;
                } else if (kind < 0.70) {
                    // The township's parent district dominates so the chain's
                    // district representative is unambiguous.
                    const double d = uniform_unit(rng);
                    surface = spec.districts[d < 0.6 ? 0 : (d < 0.8 ? 1 : 2)];
                } else if (kind < 0.85) {
                    surface = spec.province;
                } else if (kind < 0.95) {
                    surface = spec.township;
                } else {
                    surface = spec.road;
                }
                tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(
                                                   pick(rng, tokens.size() + 1)),
                              surface);
            }
            if (uniform_unit(rng) < opt.toponym_noise) {
                tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(
                                                   pick(rng, tokens.size() + 1)),
                              spec.noise_city);
            }

            std::string text;
            for (std::size_t t = 0; t < tokens.size(); ++t) {
                if (t > 0) text += ' ';
                text += tokens[t];
            }
            m.text = std::move(text);
            messages.push_back(std::move(m));
        }
    }
    return messages;
}

}  // namespace evgeo::fixture
