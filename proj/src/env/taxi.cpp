#include <cstdlib>

#include "pia/common/error.hpp"
#include "pia/env/environments.hpp"
#include "util.hpp"

namespace pia::env {

namespace {

constexpr double kTripCost = 21.0;

bool inside(const Cell& c, int w, int h) { return c.x >= 0 && c.x < w && c.y >= 0 && c.y < h; }

}  // namespace

TaxiConfig TaxiConfig::reduced() {
    TaxiConfig c;
    c.grid_w = 3;
    c.grid_h = 3;
    c.pickup_locations = {{0, 0}, {0, 2}, {2, 0}, {2, 2}};
    c.gas_station = {1, 2};
    c.max_fuel = 5;
    c.max_jobs = 1;
    return c;
}

TaxiEnv::TaxiEnv(TaxiConfig config) : cfg_(std::move(config)) {
    if (cfg_.grid_w < 1 || cfg_.grid_h < 1) throw ConfigError("taxi grid must be at least 1x1");
    if (cfg_.pickup_locations.size() < 2) throw ConfigError("taxi needs at least two pickup locations");
    for (std::size_t i = 0; i < cfg_.pickup_locations.size(); ++i) {
        if (!inside(cfg_.pickup_locations[i], cfg_.grid_w, cfg_.grid_h)) {
            throw ConfigError("taxi pickup location outside the grid");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (cfg_.pickup_locations[i] == cfg_.pickup_locations[j]) throw ConfigError("duplicate pickup location");
        }
    }
    if (!inside(cfg_.gas_station, cfg_.grid_w, cfg_.grid_h)) throw ConfigError("gas station outside the grid");
    if (cfg_.max_fuel < 1) throw ConfigError("max_fuel must be at least 1");
    if (cfg_.max_jobs < 1) throw ConfigError("max_jobs must be at least 1");
    const int w = cfg_.grid_w - 1;
    const int h = cfg_.grid_h - 1;
    schema_ = FeatureSchema({{"x", 0, w},
                             {"y", 0, h},
                             {"Xloc", 0, w},
                             {"Yloc", 0, h},
                             {"Xdest", 0, w},
                             {"Ydest", 0, h},
                             {"fuel", 0, cfg_.max_fuel},
                             {"pass", 0, 1},
                             {"jobs", 0, cfg_.max_jobs},
                             {"done", 0, 1}},
                            {"north", "east", "south", "west", "pick_up", "drop"});
}

FactoredState TaxiEnv::initial_state() const {
    const Cell& loc = cfg_.pickup_locations[0];
    const Cell& dest = cfg_.pickup_locations[1];
    return FactoredState{cfg_.grid_w / 2, cfg_.grid_h / 2, loc.x, loc.y, dest.x, dest.y, cfg_.max_fuel, 0, 0, 0};
}

std::vector<ActionId> TaxiEnv::available_actions(const FactoredState&) const { return detail::all_actions(schema_); }

Distribution TaxiEnv::transition(const FactoredState& s, ActionId a) const {
    if (a >= schema_.num_actions()) throw IllegalAction("taxi action id out of range");
    if (s[Done]) return {{s, 1.0}};
    FactoredState n = s;
    const bool on_station = s[X] == cfg_.gas_station.x && s[Y] == cfg_.gas_station.y;
    const bool move = a <= West;
    if (move) {
        static constexpr int dx[] = {0, 1, 0, -1};
        static constexpr int dy[] = {1, 0, -1, 0};
        n[X] = std::clamp(s[X] + dx[a], 0, cfg_.grid_w - 1);
        n[Y] = std::clamp(s[Y] + dy[a], 0, cfg_.grid_h - 1);
        n[Fuel] = s[Fuel] - 1;
    }
    if (on_station) n[Fuel] = cfg_.max_fuel;

    bool dropped = false;
    if (a == PickUp && !s[Pass] && s[X] == s[XLoc] && s[Y] == s[YLoc]) n[Pass] = 1;
    if (a == Drop && s[Pass] && s[X] == s[XDest] && s[Y] == s[YDest]) {
        n[Pass] = 0;
        n[Jobs] = s[Jobs] + 1;
        dropped = true;
    }
    n[Done] = (n[Fuel] == 0 || n[Jobs] == cfg_.max_jobs) ? 1 : 0;
    if (!dropped || n[Done]) return {{n, 1.0}};

    // A new guest appears at a uniformly chosen location with a different destination.
    const auto& locs = cfg_.pickup_locations;
    const double p = 1.0 / static_cast<double>(locs.size() * (locs.size() - 1));
    Distribution d;
    for (std::size_t i = 0; i < locs.size(); ++i) {
        for (std::size_t j = 0; j < locs.size(); ++j) {
            if (i == j) continue;
            FactoredState m = n;
            m[XLoc] = locs[i].x;
            m[YLoc] = locs[i].y;
            m[XDest] = locs[j].x;
            m[YDest] = locs[j].y;
            d.push_back({std::move(m), p});
        }
    }
    return detail::merge(std::move(d));
}

double TaxiEnv::reward(const FactoredState& s, ActionId a) const {
    if (s[Done]) return 0.0;
    if (a == Drop && s[Pass] && s[X] == s[XDest] && s[Y] == s[YDest]) return 0.0;
    if (a == PickUp && !s[Pass] && s[X] == s[XLoc] && s[Y] == s[YLoc]) return -kTripCost;
    if (s[Pass]) return -(kTripCost + std::abs(s[X] - s[XDest]) + std::abs(s[Y] - s[YDest]));
    return -(kTripCost + std::abs(s[X] - s[XLoc]) + std::abs(s[Y] - s[YLoc]));
}

std::vector<std::string> TaxiEnv::labels(const FactoredState& s) const {
    std::vector<std::string> out;
    if (s[Done]) out.push_back("done");
    if (s[Fuel] == 0) out.push_back("empty");
    out.push_back("jobs=" + std::to_string(s[Jobs]));
    if (s[Pass]) out.push_back("pass");
    out.push_back("x=" + std::to_string(s[X]));
    out.push_back("y=" + std::to_string(s[Y]));
    return out;
}

std::vector<std::string> TaxiEnv::label_names() const {
    return {"done", "empty", "jobs=<k>", "pass", "x=<i>", "y=<j>"};
}

}  // namespace pia::env
