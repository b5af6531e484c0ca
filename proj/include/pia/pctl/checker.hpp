#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pia/model/explicit_model.hpp"
#include "pia/pctl/formula.hpp"

namespace pia::pctl {

enum class Direction { Max, Min };

std::string to_string(Direction d);

struct StatisticalOptions {
    std::size_t samples = 10000;
    std::size_t horizon = 1000;
    double confidence = 0.95;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
};

struct CheckOptions {
    double tolerance = 1e-9;               // absolute residual for value iteration
    std::size_t max_iterations = 1'000'000;
    StatisticalOptions statistical;
};

struct Bracket {
    double lower = 0.0;
    double upper = 1.0;
    double confidence = 0.95;
    std::size_t n_true = 0;
    std::size_t n_false = 0;
    std::size_t n_unknown = 0;
};

struct CheckResult {
    double value = 0.0;
    FragmentClass engine = FragmentClass::ExactCore;
    std::optional<Bracket> bracket;      // statistical engine only
    std::size_t iterations = 0;          // exact engines
    double residual = 0.0;
    std::optional<bool> satisfied;       // threshold queries
    std::vector<double> state_values;    // exact engines, per state
    std::vector<ActionId> scheduler;     // MDP extremal checks, per state
};

/// States satisfying a state formula. Bare labels hold where the label is
/// set or, failing that, where a feature of that name is nonzero. Nested
/// probability operators need a bound and are checked exactly.
std::vector<char> satisfying_states(const ExplicitModel& model, const StateFormula& f,
                                    const CheckOptions& options = {});

/// Exact check on a Markov chain. Throws UnsupportedFragment for statistical
/// formulas and NonConvergence when value iteration hits the iteration cap.
CheckResult check_dtmc_exact(const ExplicitModel& dtmc, const Query& q, const CheckOptions& options = {});

/// Extremal probability over memoryless schedulers together with an optimal
/// memoryless scheduler (lowest action id on ties).
CheckResult check_mdp_extremal(const ExplicitModel& mdp, const Query& q, Direction direction,
                               const CheckOptions& options = {});

/// Engine dispatch: DTMCs go to the exact or statistical engine by fragment;
/// MDPs require Pmax/Pmin unless every state has a single choice.
CheckResult check(const ExplicitModel& model, const Query& q, const CheckOptions& options = {});

}  // namespace pia::pctl
