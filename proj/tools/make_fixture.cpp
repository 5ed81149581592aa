// Regenerates the sample corpus, gazetteer, truth file, and config shipped
// under data/ and configs/. The repo copies are committed; rerun after
// changing the fixture.
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "evgeo/util.hpp"
#include "fixture.hpp"

using nlohmann::json;

namespace {

json chain_json(const evgeo::HierarchyChain& chain) {
    json out = json::object();
    for (int l = 0; l < evgeo::kLevelCount; ++l)
        if (chain.levels[l]) out[evgeo::kLevelNames[l]] = *chain.levels[l];
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"regenerate the sample fixture data"};
    std::string out_dir = "data";
    std::string config_path = "configs/sample.json";
    evgeo::fixture::FixtureOptions opt;
    app.add_option("--out", out_dir, "data output directory");
    app.add_option("--config-out", config_path, "sample config path");
    app.add_option("--messages", opt.messages_per_event, "messages per event");
    app.add_option("--seed", opt.seed, "fixture generator seed");
    CLI11_PARSE(app, argc, argv);

    std::ostringstream gaz;
    for (const auto& e : evgeo::fixture::fixture_gazetteer()) {
        json rec;
        rec["name"] = e.canonical_name;
        rec["aliases"] = e.aliases;
        rec["chain"] = chain_json(e.chain);
        rec["lat"] = e.coord.lat;
        rec["lon"] = e.coord.lon;
        gaz << rec.dump() << "\n";
    }
    evgeo::atomic_write_file(out_dir + "/gazetteer.jsonl", gaz.str());

    std::ostringstream msgs;
    for (const auto& m : evgeo::fixture::make_fixture(opt)) {
        json rec;
        rec["id"] = m.id;
        rec["text"] = m.text;
        rec["user_id"] = m.user_id;
        rec["mentions"] = m.mentioned_user_ids;
        rec["timestamp"] = evgeo::format_rfc3339(m.timestamp);
        if (m.event_label) rec["event_label"] = *m.event_label;
        if (m.truth_coord) {
            rec["lat"] = m.truth_coord->lat;
            rec["lon"] = m.truth_coord->lon;
        }
        msgs << rec.dump() << "\n";
    }
    evgeo::atomic_write_file(out_dir + "/messages.jsonl", msgs.str());

    std::ostringstream truth;
    for (const auto& spec : evgeo::fixture::fixture_events()) {
        json rec;
        rec["event_id"] = spec.event_id;
        rec["lat"] = spec.center.lat;
        rec["lon"] = spec.center.lon;
        truth << rec.dump() << "\n";
    }
    evgeo::atomic_write_file(out_dir + "/truth.jsonl", truth.str());

    json config;
    config["dataset_path"] = out_dir + "/messages.jsonl";
    config["dataset_format"] = "jsonl";
    config["gazetteer_path"] = out_dir + "/gazetteer.jsonl";
    config["truth_path"] = out_dir + "/truth.jsonl";
    config["output_dir"] = "out";
    config["seed"] = 42;
    config["train"] = {{"epochs", 200}, {"learning_rate", 0.1}};
    evgeo::atomic_write_file(config_path, config.dump(2) + "\n");

    std::cerr << "wrote " << out_dir << "/{gazetteer,messages,truth}.jsonl and " << config_path
              << "\n";
    return 0;
}
