#include "pia/common/error.hpp"
#include "pia/env/environments.hpp"
#include "util.hpp"

namespace pia::env {

namespace {

constexpr int kDx[] = {0, 1, 0, -1};
constexpr int kDy[] = {1, 0, -1, 0};

}  // namespace

CollisionEnv::CollisionEnv(CollisionConfig config) : cfg_(config) {
    if (cfg_.grid_w < 2 || cfg_.grid_h < 2) throw ConfigError("collision grid must be at least 2x2");
    if (!(cfg_.slickness >= 0.0 && cfg_.slickness <= 1.0)) throw ConfigError("slickness must lie in [0, 1]");
    for (const Cell& c : {cfg_.agent_start, cfg_.obs1_start, cfg_.obs2_start}) {
        if (c.x < 0 || c.x >= cfg_.grid_w || c.y < 0 || c.y >= cfg_.grid_h) {
            throw ConfigError("collision start position outside the grid");
        }
    }
    if (cfg_.agent_start == cfg_.obs1_start) throw ConfigError("agent must not start on obstacle 1");
    const int w = cfg_.grid_w - 1;
    const int h = cfg_.grid_h - 1;
    schema_ = FeatureSchema({{"x", 0, w},
                             {"y", 0, h},
                             {"obs1_x", 0, w},
                             {"obs1_y", 0, h},
                             {"obs2_x", 0, w},
                             {"obs2_y", 0, h},
                             {"done", 0, 1}},
                            {"north", "east", "south", "west"});
}

FactoredState CollisionEnv::initial_state() const {
    return FactoredState{cfg_.agent_start.x, cfg_.agent_start.y, cfg_.obs1_start.x, cfg_.obs1_start.y,
                         cfg_.obs2_start.x,  cfg_.obs2_start.y,  0};
}

std::vector<ActionId> CollisionEnv::available_actions(const FactoredState&) const {
    return detail::all_actions(schema_);
}

Distribution CollisionEnv::transition(const FactoredState& s, ActionId a) const {
    if (a >= schema_.num_actions()) throw IllegalAction("collision action id out of range");
    if (s[Done]) return {{s, 1.0}};
    const int w = cfg_.grid_w - 1;
    const int h = cfg_.grid_h - 1;

    std::vector<std::pair<Cell, double>> agent;
    const Cell moved{std::clamp(s[X] + kDx[a], 0, w), std::clamp(s[Y] + kDy[a], 0, h)};
    if (cfg_.slickness < 1.0) agent.push_back({moved, 1.0 - cfg_.slickness});
    if (cfg_.slickness > 0.0) agent.push_back({{s[X], s[Y]}, cfg_.slickness});

    Distribution d;
    for (const auto& [ag, pa] : agent) {
        for (int m1 = 0; m1 < 4; ++m1) {
            const int o1x = detail::reflect(s[Obs1X] + kDx[m1], 0, w);
            const int o1y = detail::reflect(s[Obs1Y] + kDy[m1], 0, h);
            for (int m2 = 0; m2 < 4; ++m2) {
                const int o2x = detail::reflect(s[Obs2X] + kDx[m2], 0, w);
                const int o2y = detail::reflect(s[Obs2Y] + kDy[m2], 0, h);
                const int done = (ag.x == o1x && ag.y == o1y) ? 1 : 0;
                d.push_back({FactoredState{ag.x, ag.y, o1x, o1y, o2x, o2y, done}, pa / 16.0});
            }
        }
    }
    return detail::merge(std::move(d));
}

double CollisionEnv::reward(const FactoredState& s, ActionId) const { return s[Done] ? 0.0 : 100.0; }

std::vector<std::string> CollisionEnv::labels(const FactoredState& s) const {
    if (s[X] == s[Obs1X] && s[Y] == s[Obs1Y]) return {"collision"};
    return {};
}

}  // namespace pia::env
