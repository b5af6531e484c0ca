#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pia/attack/attack.hpp"
#include "pia/model/builder.hpp"
#include "pia/pctl/checker.hpp"

namespace pia {

struct AttackMapEntry {
    FactoredState state;
    FactoredState observation;
    std::vector<int> offset;
    ActionId action = 0;
};

struct RobustnessTimings {
    double build_clean = 0.0;
    double check_clean = 0.0;
    double build_permissive = 0.0;
    double check_permissive = 0.0;
    double extract = 0.0;
    double verify = 0.0;
    double total() const { return build_clean + check_clean + build_permissive + check_permissive + extract + verify; }
};

struct RobustnessReport {
    std::string formula;
    pctl::Direction direction = pctl::Direction::Max;
    PermissiveSpec spec;
    std::string feature;  // attacked feature name, or "*" for the box
    double P = 0.0;
    double P_star = 0.0;
    double impact_star = 0.0;
    double alpha = 0.0;
    bool robust = true;
    pctl::FragmentClass engine = pctl::FragmentClass::ExactCore;
    std::vector<AttackMapEntry> attack_map;  // states reachable under the optimal attack
    std::optional<double> verified;          // value of the extracted attack
    RobustnessTimings timings;
    std::size_t clean_states = 0;
    std::size_t clean_transitions = 0;
    std::size_t permissive_states = 0;
    std::size_t permissive_choices = 0;
    std::size_t permissive_transitions = 0;
};

struct RobustnessOptions {
    pctl::CheckOptions check;
    BuildOptions build;
    bool verify = true;
};

/// P on the clean chain, P* on the permissive MDP in `direction`; robust iff
/// |P* - P| <= alpha. With options.verify the extracted attack is replayed.
RobustnessReport check_robustness(const ModelProvider& provider, const Policy& policy, const pctl::Query& query,
                                  const PermissiveSpec& spec, double alpha, pctl::Direction direction,
                                  const RobustnessOptions& options = {});

/// For every state the scheduler reaches from the initial state, the first
/// candidate of Delta(s) whose observation makes the policy take the
/// scheduler's action. `scheduler` holds action ids per permissive state.
std::vector<AttackMapEntry> extract_optimal_attack(const ExplicitModel& permissive, const std::vector<ActionId>& scheduler,
                                                   const Policy& policy, const PermissiveSpec& spec);

TableAttack attack_from_map(const FeatureSchema& schema, const std::vector<AttackMapEntry>& map, int epsilon);

/// Value of the chain induced by the table attack. When `expected` is given
/// and the query is exact-core without a step bound, a deviation beyond 1e-6
/// throws MismatchAgainstPStar.
double verify_extracted_attack(const ModelProvider& provider, const Policy& policy, const pctl::Query& query,
                               const std::vector<AttackMapEntry>& map, int epsilon,
                               std::optional<double> expected = std::nullopt, const RobustnessOptions& options = {});

inline constexpr double kVerifyTolerance = 1e-6;

/// Report without timings unless `with_timings`.
nlohmann::json report_to_json(const RobustnessReport& report, const FeatureSchema& schema, bool with_timings = false);

/// `<feature names...>,offset_feature,offset,action`
std::string attack_map_csv(const RobustnessReport& report, const FeatureSchema& schema);

}  // namespace pia
