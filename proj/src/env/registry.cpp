#include <set>

#include "pia/common/error.hpp"
#include "pia/env/environments.hpp"

namespace pia::env {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const char* env) {
    if (j.is_null()) return;
    if (!j.is_object()) throw ConfigError(std::string(env) + " config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw ConfigError(std::string("unknown ") + env + " config key '" + key + "'");
    }
}

template <class T>
void read(const json& j, const char* key, T& out) {
    if (j.is_object() && j.contains(key)) {
        try {
            out = j.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
        }
    }
}

Cell cell_from(const json& j) {
    if (!j.is_array() || j.size() != 2) throw ConfigError("cells are written as [x, y]");
    return {j[0].get<int>(), j[1].get<int>()};
}

void read_cell(const json& j, const char* key, Cell& out) {
    if (j.is_object() && j.contains(key)) out = cell_from(j.at(key));
}

json cell_json(const Cell& c) { return json::array({c.x, c.y}); }

}  // namespace

void from_json(const json& j, TaxiConfig& c) {
    reject_unknown(j, {"grid_w", "grid_h", "pickup_locations", "gas_station", "max_fuel", "max_jobs"}, "taxi");
    read(j, "grid_w", c.grid_w);
    read(j, "grid_h", c.grid_h);
    if (j.is_object() && j.contains("pickup_locations")) {
        c.pickup_locations.clear();
        for (const auto& cell : j.at("pickup_locations")) c.pickup_locations.push_back(cell_from(cell));
    }
    read_cell(j, "gas_station", c.gas_station);
    read(j, "max_fuel", c.max_fuel);
    read(j, "max_jobs", c.max_jobs);
}

void from_json(const json& j, CollisionConfig& c) {
    reject_unknown(j, {"grid_w", "grid_h", "slickness", "agent_start", "obs1_start", "obs2_start"}, "collision");
    read(j, "grid_w", c.grid_w);
    read(j, "grid_h", c.grid_h);
    read(j, "slickness", c.slickness);
    read_cell(j, "agent_start", c.agent_start);
    read_cell(j, "obs1_start", c.obs1_start);
    read_cell(j, "obs2_start", c.obs2_start);
}

void from_json(const json& j, SmartGridConfig& c) {
    reject_unknown(j,
                   {"max_energy", "max_production_level", "consumption_lo", "consumption_hi", "initial_renewable",
                    "initial_non_renewable", "initial_consumption"},
                   "smartgrid");
    read(j, "max_energy", c.max_energy);
    read(j, "max_production_level", c.max_production_level);
    read(j, "consumption_lo", c.consumption_lo);
    read(j, "consumption_hi", c.consumption_hi);
    read(j, "initial_renewable", c.initial_renewable);
    read(j, "initial_non_renewable", c.initial_non_renewable);
    read(j, "initial_consumption", c.initial_consumption);
}

void from_json(const json& j, StockConfig& c) {
    reject_unknown(j,
                   {"initial_capital", "p_lo", "p_hi", "max_stocks", "step", "initial_buy_price",
                    "initial_sell_price", "max_capital"},
                   "stockmarket");
    read(j, "initial_capital", c.initial_capital);
    read(j, "p_lo", c.p_lo);
    read(j, "p_hi", c.p_hi);
    read(j, "max_stocks", c.max_stocks);
    read(j, "step", c.step);
    read(j, "initial_buy_price", c.initial_buy_price);
    read(j, "initial_sell_price", c.initial_sell_price);
    read(j, "max_capital", c.max_capital);
}

void from_json(const json& j, FreewayConfig& c) {
    reject_unknown(j, {"lanes", "lane_width", "spawn_probability"}, "freeway");
    read(j, "lanes", c.lanes);
    read(j, "lane_width", c.lane_width);
    read(j, "spawn_probability", c.spawn_probability);
}

json to_json(const TaxiConfig& c) {
    json locs = json::array();
    for (const auto& l : c.pickup_locations) locs.push_back(cell_json(l));
    return {{"grid_w", c.grid_w},
            {"grid_h", c.grid_h},
            {"pickup_locations", locs},
            {"gas_station", cell_json(c.gas_station)},
            {"max_fuel", c.max_fuel},
            {"max_jobs", c.max_jobs}};
}

json to_json(const CollisionConfig& c) {
    return {{"grid_w", c.grid_w},
            {"grid_h", c.grid_h},
            {"slickness", c.slickness},
            {"agent_start", cell_json(c.agent_start)},
            {"obs1_start", cell_json(c.obs1_start)},
            {"obs2_start", cell_json(c.obs2_start)}};
}

json to_json(const SmartGridConfig& c) {
    return {{"max_energy", c.max_energy},
            {"max_production_level", c.max_production_level},
            {"consumption_lo", c.consumption_lo},
            {"consumption_hi", c.consumption_hi},
            {"initial_renewable", c.initial_renewable},
            {"initial_non_renewable", c.initial_non_renewable},
            {"initial_consumption", c.initial_consumption}};
}

json to_json(const StockConfig& c) {
    return {{"initial_capital", c.initial_capital},
            {"p_lo", c.p_lo},
            {"p_hi", c.p_hi},
            {"max_stocks", c.max_stocks},
            {"step", c.step},
            {"initial_buy_price", c.initial_buy_price},
            {"initial_sell_price", c.initial_sell_price},
            {"max_capital", c.max_capital}};
}

json to_json(const FreewayConfig& c) {
    return {{"lanes", c.lanes}, {"lane_width", c.lane_width}, {"spawn_probability", c.spawn_probability}};
}

const std::vector<std::string>& environment_names() {
    static const std::vector<std::string> names{"taxi", "collision", "smartgrid", "stockmarket", "freeway", "fig2"};
    return names;
}

namespace {

template <class Config>
Config parse(const json& j) {
    Config c;
    from_json(j, c);
    return c;
}

}  // namespace

std::unique_ptr<ModelProvider> make_environment(const std::string& name, const json& config) {
    try {
        if (name == "taxi") return std::make_unique<TaxiEnv>(parse<TaxiConfig>(config));
        if (name == "collision") return std::make_unique<CollisionEnv>(parse<CollisionConfig>(config));
        if (name == "smartgrid") return std::make_unique<SmartGridEnv>(parse<SmartGridConfig>(config));
        if (name == "stockmarket") return std::make_unique<StockMarketEnv>(parse<StockConfig>(config));
        if (name == "freeway") return std::make_unique<FreewayEnv>(parse<FreewayConfig>(config));
        if (name == "fig2") {
            reject_unknown(config, {}, "fig2");
            return std::make_unique<Fig2Env>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(name + " config: " + e.what());
    }
    throw ConfigError("unknown environment '" + name + "'");
}

json resolved_config(const std::string& name, const json& config) {
    make_environment(name, config);  // validates
    if (name == "taxi") return to_json(parse<TaxiConfig>(config));
    if (name == "collision") return to_json(parse<CollisionConfig>(config));
    if (name == "smartgrid") return to_json(parse<SmartGridConfig>(config));
    if (name == "stockmarket") return to_json(parse<StockConfig>(config));
    if (name == "freeway") return to_json(parse<FreewayConfig>(config));
    return json::object();
}

}  // namespace pia::env
