#include <optional>

#include "pia/common/error.hpp"
#include "pia/env/environments.hpp"
#include "util.hpp"

namespace pia::env {

FreewayConfig FreewayConfig::mini() {
    FreewayConfig c;
    c.lanes = 3;
    c.lane_width = 5;
    return c;
}

FreewayEnv::FreewayEnv(FreewayConfig config) : cfg_(config) {
    if (cfg_.lanes < 1) throw ConfigError("freeway needs at least one lane");
    if (cfg_.lane_width < 1 || cfg_.lane_width % 2 == 0) throw ConfigError("lane_width must be odd and positive");
    if (!(cfg_.spawn_probability >= 0.0 && cfg_.spawn_probability <= 1.0)) {
        throw ConfigError("spawn_probability must lie in [0, 1]");
    }
    std::vector<Feature> features{{"chicken", 1, cfg_.lanes + 1}, {"hit", 0, 1}};
    for (int lane = 1; lane <= cfg_.lanes; ++lane) {
        for (int col = 0; col < cfg_.lane_width; ++col) {
            features.push_back({"cell_" + std::to_string(lane) + "_" + std::to_string(col), 0, 1});
        }
    }
    schema_ = FeatureSchema(std::move(features), {"up", "down", "noop"});
}

std::size_t FreewayEnv::cell_feature(int lane, int col) const {
    return kFirstCell + static_cast<std::size_t>((lane - 1) * cfg_.lane_width + col);
}

FactoredState FreewayEnv::initial_state() const {
    std::vector<int> v(schema_.num_features(), 0);
    v[kChicken] = 1;
    return FactoredState(std::move(v));
}

bool FreewayEnv::is_terminal(const FactoredState& s) const { return s[kHit] != 0 || s[kChicken] == cfg_.lanes + 1; }

std::vector<ActionId> FreewayEnv::available_actions(const FactoredState&) const {
    return detail::all_actions(schema_);
}

Distribution FreewayEnv::transition(const FactoredState& s, ActionId a) const {
    if (a >= schema_.num_actions()) throw IllegalAction("freeway action id out of range");
    if (is_terminal(s)) return {{s, 1.0}};
    const int lanes = cfg_.lanes;
    const int width = cfg_.lane_width;
    const int mid = middle_column();
    int row = s[kChicken];
    if (a == Up) row += 1;
    if (a == Down) row = std::max(1, row - 1);

    std::vector<int> cleared(schema_.num_features(), 0);
    if (row == lanes + 1) {
        cleared[kChicken] = row;
        return {{FactoredState(cleared), 1.0}};
    }

    // Per-lane outcomes: the car's next column (or none) and whether it sweeps the middle column.
    struct Outcome {
        std::optional<int> col;
        bool sweeps_mid;
        double prob;
    };
    std::vector<std::vector<Outcome>> per_lane(static_cast<std::size_t>(lanes));
    for (int lane = 1; lane <= lanes; ++lane) {
        const int dir = lane % 2 == 1 ? 1 : -1;
        std::optional<int> car;
        for (int col = 0; col < width; ++col) {
            if (s[cell_feature(lane, col)]) car = col;
        }
        auto& out = per_lane[static_cast<std::size_t>(lane - 1)];
        if (car) {
            const int next = *car + dir;
            const bool on_road = next >= 0 && next < width;
            out.push_back({on_road ? std::optional<int>(next) : std::nullopt, *car == mid || (on_road && next == mid), 1.0});
        } else {
            const int entry = dir == 1 ? 0 : width - 1;
            if (cfg_.spawn_probability > 0.0) out.push_back({entry, entry == mid, cfg_.spawn_probability});
            if (cfg_.spawn_probability < 1.0) out.push_back({std::nullopt, false, 1.0 - cfg_.spawn_probability});
        }
    }

    Distribution d;
    std::vector<std::size_t> pick(static_cast<std::size_t>(lanes), 0);
    while (true) {
        double p = 1.0;
        bool hit = false;
        std::vector<int> v(schema_.num_features(), 0);
        v[kChicken] = row;
        for (int lane = 1; lane <= lanes; ++lane) {
            const Outcome& o = per_lane[static_cast<std::size_t>(lane - 1)][pick[static_cast<std::size_t>(lane - 1)]];
            p *= o.prob;
            if (o.col) v[cell_feature(lane, *o.col)] = 1;
            if (lane == row && o.sweeps_mid) hit = true;
        }
        if (hit) {
            v = cleared;
            v[kChicken] = row;
            v[kHit] = 1;
        }
        d.push_back({FactoredState(std::move(v)), p});

        std::size_t k = 0;
        while (k < pick.size() && ++pick[k] == per_lane[k].size()) pick[k++] = 0;
        if (k == pick.size()) break;
    }
    return detail::merge(std::move(d));
}

double FreewayEnv::reward(const FactoredState& s, ActionId a) const {
    if (is_terminal(s)) return 0.0;
    return (a == Up && s[kChicken] == cfg_.lanes) ? 1.0 : 0.0;
}

std::vector<std::string> FreewayEnv::labels(const FactoredState& s) const {
    std::vector<std::string> out;
    if (s[kChicken] == cfg_.lanes + 1) out.push_back("crossed");
    if (s[kHit]) out.push_back("hit");
    return out;
}

}  // namespace pia::env
