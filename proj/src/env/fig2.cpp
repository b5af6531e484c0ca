#include "pia/common/error.hpp"
#include "pia/env/environments.hpp"
#include "util.hpp"

namespace pia::env {

namespace {

// Successor x for actions a, b, c at x = 1, 2, 3.
constexpr int kNext[3][3] = {{1, 2, 3}, {2, 2, 1}, {1, 3, 3}};

}  // namespace

Fig2Env::Fig2Env() : schema_({{"x", 0, 4}}, {"a", "b", "c"}) {}

std::vector<ActionId> Fig2Env::available_actions(const FactoredState&) const { return detail::all_actions(schema_); }

Distribution Fig2Env::transition(const FactoredState& s, ActionId a) const {
    if (a >= 3) throw IllegalAction("fig2 action id out of range");
    const int x = s[0];
    if (x < 1 || x > 3) return {{s, 1.0}};  // never reached from x = 1
    return {{FactoredState{kNext[x - 1][a]}, 1.0}};
}

double Fig2Env::reward(const FactoredState&, ActionId) const { return 0.0; }

std::vector<std::string> Fig2Env::labels(const FactoredState&) const { return {}; }

}  // namespace pia::env
