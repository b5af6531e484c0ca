#include "pia/model/model_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "pia/common/error.hpp"

namespace pia {

using nlohmann::json;

namespace {

StateId parse_index(const std::string& key, std::size_t bound, const char* what) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
        v = std::stoul(key, &pos);
    } catch (const std::exception&) {
        throw ParseError(std::string("non-numeric ") + what + " key '" + key + "'");
    }
    if (pos != key.size()) throw ParseError(std::string("non-numeric ") + what + " key '" + key + "'");
    if (v >= bound) throw ValidationError(std::string(what) + " id " + key + " out of range");
    return static_cast<StateId>(v);
}

FactoredState state_from_json(const json& j) {
    if (!j.is_array()) throw ParseError("state must be an array of integers");
    std::vector<int> values;
    values.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number_integer()) throw ParseError("state entries must be integers");
        values.push_back(v.get<int>());
    }
    return FactoredState(std::move(values));
}

}  // namespace

json schema_to_json(const FeatureSchema& schema) {
    json features = json::array();
    for (const auto& f : schema.features()) features.push_back({{"name", f.name}, {"lo", f.lo}, {"hi", f.hi}});
    return {{"features", features}, {"actions", schema.action_names()}};
}

FeatureSchema schema_from_json(const json& j) {
    try {
        std::vector<Feature> features;
        for (const auto& f : j.at("features")) {
            features.push_back({f.at("name").get<std::string>(), f.at("lo").get<int>(), f.at("hi").get<int>()});
        }
        return FeatureSchema(std::move(features), j.at("actions").get<std::vector<std::string>>());
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad schema: ") + e.what());
    }
}

json model_to_json(const ExplicitModel& model) {
    json states = json::array();
    for (const auto& s : model.states) states.push_back(s.vector());
    json transitions = json::object();
    json rewards = json::object();
    json labels = json::object();
    for (std::size_t s = 0; s < model.num_states(); ++s) {
        const std::string key = std::to_string(s);
        json trow = json::object();
        json rrow = json::object();
        for (const auto& ch : model.choices[s]) {
            json row = json::array();
            for (const auto& t : ch.row) row.push_back(json::array({t.target, t.prob}));
            trow[std::to_string(ch.action)] = std::move(row);
            rrow[std::to_string(ch.action)] = ch.reward;
        }
        transitions[key] = std::move(trow);
        rewards[key] = std::move(rrow);
        labels[key] = model.labels[s];
    }
    return {{"kind", to_string(model.kind)},
            {"schema", schema_to_json(model.schema)},
            {"initial", model.states.at(model.initial).vector()},
            {"states", std::move(states)},
            {"transitions", std::move(transitions)},
            {"rewards", std::move(rewards)},
            {"labels", std::move(labels)}};
}

ExplicitModel model_from_json(const json& j) {
    ExplicitModel model;
    try {
        if (!j.is_object()) throw ParseError("model document must be a JSON object");
        model.schema = schema_from_json(j.at("schema"));
        for (const auto& s : j.at("states")) model.states.push_back(state_from_json(s));
        const std::size_t n = model.states.size();
        model.choices.assign(n, {});
        model.labels.assign(n, {});

        const FactoredState initial = state_from_json(j.at("initial"));
        auto it = std::find(model.states.begin(), model.states.end(), initial);
        if (it == model.states.end()) throw ValidationError("initial state " + to_string(initial) + " not listed");
        model.initial = static_cast<StateId>(it - model.states.begin());

        for (const auto& [skey, actions] : j.at("transitions").items()) {
            StateId s = parse_index(skey, n, "state");
            for (const auto& [akey, row] : actions.items()) {
                Choice ch;
                ch.action = parse_index(akey, model.schema.num_actions(), "action");
                for (const auto& entry : row) {
                    if (!entry.is_array() || entry.size() != 2) throw ParseError("row entries must be [succ, prob]");
                    ch.row.push_back({entry[0].get<StateId>(), entry[1].get<double>()});
                }
                model.choices[s].push_back(std::move(ch));
            }
        }
        if (j.contains("rewards")) {
            for (const auto& [skey, actions] : j.at("rewards").items()) {
                StateId s = parse_index(skey, n, "state");
                for (const auto& [akey, r] : actions.items()) {
                    ActionId a = parse_index(akey, model.schema.num_actions(), "action");
                    auto c = model.choice_index(s, a);
                    if (!c) throw ValidationError("reward for disabled action " + akey + " at state " + skey);
                    model.choices[s][*c].reward = r.get<double>();
                }
            }
        }
        if (j.contains("labels")) {
            for (const auto& [skey, names] : j.at("labels").items()) {
                StateId s = parse_index(skey, n, "state");
                auto ls = names.get<std::vector<std::string>>();
                std::sort(ls.begin(), ls.end());
                ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
                model.labels[s] = std::move(ls);
            }
        }
        for (auto& cs : model.choices) {
            std::sort(cs.begin(), cs.end(), [](const Choice& a, const Choice& b) { return a.action < b.action; });
        }
        bool single = std::all_of(model.choices.begin(), model.choices.end(),
                                  [](const auto& cs) { return cs.size() == 1; });
        if (j.contains("kind")) {
            const auto kind = j.at("kind").get<std::string>();
            if (kind == "DTMC") {
                model.kind = ModelKind::DTMC;
            } else if (kind == "MDP") {
                model.kind = ModelKind::MDP;
            } else {
                throw ParseError("unknown model kind '" + kind + "'");
            }
        } else {
            model.kind = single ? ModelKind::DTMC : ModelKind::MDP;
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad model document: ") + e.what());
    }
    require_valid(model);
    return model;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_json_file(const json& j, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

ExplicitModel load_explicit_model(const std::filesystem::path& path) { return model_from_json(read_json_file(path)); }

void save_explicit_model(const ExplicitModel& model, const std::filesystem::path& path) {
    write_json_file(model_to_json(model), path);
}

}  // namespace pia
