#pragma once

#include <functional>

#include "pia/model/provider.hpp"
#include "pia/pctl/checker.hpp"

namespace pia::pctl {

enum class Tri : std::uint8_t { False, Unknown, True };

/// A finite trajectory prefix. When `absorbed` is set, the last position
/// repeats forever, which makes every formula decidable.
struct TraceView {
    std::size_t length = 0;
    bool absorbed = false;
    std::function<bool(const StateFormula&, std::size_t)> holds;
};

/// Three-valued finite-prefix semantics of a path formula at position 0.
Tri evaluate(const PathFormula& f, const TraceView& trace);

/// Wilson score lower bound for k successes out of n at two-sided level
/// `confidence`.
double wilson_lower(std::size_t k, std::size_t n, double confidence);

/// Monte Carlo estimate over sampled trajectories of the chain. The bracket
/// is [wilson_lower(true), 1 - wilson_lower(false)]; the value is its midpoint.
CheckResult check_statistical(const ExplicitModel& dtmc, const Query& q, const StatisticalOptions& options);

/// Same, simulating `policy` on the provider with optional observation attack.
CheckResult check_statistical(const ModelProvider& provider, const Policy& policy, const AttackFn* attack,
                              const Query& q, const StatisticalOptions& options);

}  // namespace pia::pctl
