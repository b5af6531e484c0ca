#include <algorithm>

#include "pia/common/error.hpp"
#include "pia/env/environments.hpp"
#include "util.hpp"

namespace pia::env {

namespace {

constexpr double kBlackoutPenalty = -1000.0;

}  // namespace

SmartGridEnv::SmartGridEnv(SmartGridConfig config) : cfg_(config) {
    if (cfg_.max_production_level < 1) throw ConfigError("max_production_level must be positive");
    if (cfg_.consumption_lo < 0 || cfg_.consumption_lo > cfg_.consumption_hi) {
        throw ConfigError("consumption range must be a nonempty nonnegative interval");
    }
    if (cfg_.max_energy < 0) throw ConfigError("max_energy must be nonnegative");
    auto in = [](int v, int lo, int hi) { return v >= lo && v <= hi; };
    if (!in(cfg_.initial_renewable, 0, cfg_.max_production_level) ||
        !in(cfg_.initial_non_renewable, 0, cfg_.max_production_level) ||
        !in(cfg_.initial_consumption, cfg_.consumption_lo, cfg_.consumption_hi)) {
        throw ConfigError("smart grid initial state outside its ranges");
    }
    const int p = cfg_.max_production_level;
    schema_ = FeatureSchema({{"energy", -cfg_.consumption_hi, 2 * p - cfg_.consumption_lo},
                             {"blackout", 0, 1},
                             {"renewable", 0, p},
                             {"non_renewable", 0, p},
                             {"consumption", cfg_.consumption_lo, cfg_.consumption_hi}},
                            {"increase_renewable", "increase_non_renewable", "decrease_renewable", "decrease_both"});
}

FactoredState SmartGridEnv::make_state(int renewable, int non_renewable, int consumption, bool blackout) const {
    return FactoredState{renewable + non_renewable - consumption, blackout ? 1 : 0, renewable, non_renewable,
                         consumption};
}

FactoredState SmartGridEnv::initial_state() const {
    return make_state(cfg_.initial_renewable, cfg_.initial_non_renewable, cfg_.initial_consumption, false);
}

std::vector<ActionId> SmartGridEnv::available_actions(const FactoredState&) const {
    return detail::all_actions(schema_);
}

Distribution SmartGridEnv::transition(const FactoredState& s, ActionId a) const {
    if (a >= schema_.num_actions()) throw IllegalAction("smart grid action id out of range");
    if (s[Blackout]) return {{s, 1.0}};
    const int p = cfg_.max_production_level;
    int r = s[Renewable];
    int nr = s[NonRenewable];
    switch (a) {
        case IncreaseRenewable: r = std::min(r + 1, p); break;
        case IncreaseNonRenewable: nr = std::min(nr + 1, p); break;
        case DecreaseRenewable: r = std::max(r - 1, 0); break;
        default:
            r = std::max(r - 1, 0);
            nr = std::max(nr - 1, 0);
            break;
    }
    Distribution d;
    for (int dc = -1; dc <= 1; ++dc) {
        const int c = std::clamp(s[Consumption] + dc, cfg_.consumption_lo, cfg_.consumption_hi);
        const int surplus = r + nr - c;
        FactoredState n = surplus < 0                ? make_state(r, nr, c, true)
                          : surplus > cfg_.max_energy ? make_state(0, 0, c, false)  // shutdown
                                                      : make_state(r, nr, c, false);
        d.push_back({std::move(n), 1.0 / 3.0});
    }
    return detail::merge(std::move(d));
}

double SmartGridEnv::reward(const FactoredState& s, ActionId a) const {
    if (s[Blackout]) return 0.0;
    double total = 0.0;
    for (const auto& o : transition(s, a)) {
        const double r = o.state[Blackout] ? kBlackoutPenalty : -std::max(o.state[NonRenewable] - o.state[Renewable], 0);
        total += o.prob * r;
    }
    return total;
}

std::vector<std::string> SmartGridEnv::labels(const FactoredState& s) const {
    if (s[Blackout]) return {"blackout"};
    return {};
}

}  // namespace pia::env
