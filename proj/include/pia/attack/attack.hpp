#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pia/model/builder.hpp"
#include "pia/pctl/checker.hpp"
#include "pia/policy/policy.hpp"

namespace pia {

/// s + epsilon * sign(dJ/ds) with a = act(policy, s), optionally restricted
/// to one feature, then clipped to the feature domains. sign(0) = 0.
FactoredState fgsm_perturb(const MlpPolicy& policy, const FactoredState& s, int epsilon,
                           std::optional<std::size_t> feature = std::nullopt);

class FgsmAttack final : public AttackFn {
public:
    FgsmAttack(const MlpPolicy& policy, int epsilon, std::optional<std::size_t> feature = std::nullopt);
    FactoredState perturb(const FactoredState& s) const override;
    int epsilon() const override { return epsilon_; }

private:
    const MlpPolicy* policy_;
    int epsilon_;
    std::optional<std::size_t> feature_;
};

/// Adds the same offset vector everywhere, clipped to the domains.
class FixedOffsetAttack final : public AttackFn {
public:
    /// Throws ConfigError if an offset exceeds epsilon or the length is wrong.
    FixedOffsetAttack(FeatureSchema schema, std::vector<int> offsets, int epsilon);
    FactoredState perturb(const FactoredState& s) const override;
    int epsilon() const override { return epsilon_; }

private:
    FeatureSchema schema_;
    std::vector<int> offsets_;
    int epsilon_;
};

/// Explicit state -> observation map; unmapped states are left alone.
class TableAttack final : public AttackFn {
public:
    TableAttack(FeatureSchema schema, int epsilon);
    /// Throws ConfigError when the entry leaves the domains or the budget.
    void set(const FactoredState& s, const FactoredState& observation);
    FactoredState perturb(const FactoredState& s) const override;
    int epsilon() const override { return epsilon_; }
    const std::map<FactoredState, FactoredState>& table() const noexcept { return table_; }

private:
    FeatureSchema schema_;
    int epsilon_;
    std::map<FactoredState, FactoredState> table_;
};

/// Policy pi(delta(s)) as a standalone policy.
class AttackedPolicy final : public Policy {
public:
    AttackedPolicy(const Policy& policy, const AttackFn& attack) : policy_(&policy), attack_(&attack) {}
    ActionId act(const FactoredState& s) const override { return policy_->act(attack_->perturb(s)); }

private:
    const Policy* policy_;
    const AttackFn* attack_;
};

/// { s with feature offset by k : |k| <= epsilon, in domain }, ordered
/// k = 0, -1, +1, -2, +2, ...
std::vector<FactoredState> enumerate_attack_set(const FactoredState& s, std::size_t feature, int epsilon,
                                                const FeatureSchema& schema);

struct ImpactOptions {
    pctl::CheckOptions check;
    BuildOptions build;
    std::size_t jobs = 1;
};

struct PiResult {
    std::string feature;          // "*" for a whole-observation attack
    std::optional<std::size_t> feature_index;
    int epsilon = 0;
    double r = 0.0;
    double r_adv = 0.0;
    double pi = 0.0;
    pctl::FragmentClass engine = pctl::FragmentClass::ExactCore;
    bool approximate = false;     // statistical engine: midpoints of brackets
    double bracket_width = 0.0;   // summed widths of both brackets
    std::size_t clean_states = 0;
    std::size_t attacked_states = 0;
    double seconds = 0.0;
    std::optional<std::string> error;
};

/// Property impact of an arbitrary attack.
PiResult compute_pi(const ModelProvider& provider, const Policy& policy, const pctl::Query& query,
                    const AttackFn& attack, const ImpactOptions& options = {});
/// Property impact of per-feature FGSM on `feature`.
PiResult compute_pi(const ModelProvider& provider, const MlpPolicy& policy, const pctl::Query& query,
                    std::size_t feature, int epsilon, const ImpactOptions& options = {});
/// Whole-observation FGSM.
PiResult compute_fgsm_impact(const ModelProvider& provider, const MlpPolicy& policy, const pctl::Query& query,
                             int epsilon, const ImpactOptions& options = {});

struct PiMap {
    std::vector<PiResult> entries;  // schema order
    std::vector<double> normalized;
};

/// compute_pi for every feature; the clean chain is built once. Errors of a
/// single feature are recorded in its entry.
PiMap compute_pi_map(const ModelProvider& provider, const MlpPolicy& policy, const pctl::Query& query, int epsilon,
                     const ImpactOptions& options = {});

/// Each value divided by the maximum; an all-zero input stays zero.
std::vector<double> normalize_map(const std::vector<double>& values);

/// argmax pi, lowest feature index on ties.
std::size_t select_pia_index(const PiMap& map);
std::string select_pia_feature(const PiMap& map);

struct SriOptions {
    std::size_t episodes = 300;
    double gamma = 0.99;
    std::uint64_t seed = 0;
    std::size_t max_steps = 100;
    std::size_t jobs = 1;
};

struct SriResult {
    std::string feature;
    std::size_t feature_index = 0;
    int epsilon = 0;
    double clean_mean = 0.0;
    double attacked_mean = 0.0;
    double drop = 0.0;  // clean_mean - attacked_mean
    std::size_t episodes = 0;
    std::uint64_t seed = 0;
};

/// Episode i of both batches runs on an RNG seeded with (seed, i).
SriResult estimate_sri(const ModelProvider& provider, const MlpPolicy& policy, std::size_t feature, int epsilon,
                       const SriOptions& options = {});

struct SriMap {
    std::vector<SriResult> entries;
    std::vector<double> normalized;  // |drop| / max |drop|
};

SriMap compute_sri_map(const ModelProvider& provider, const MlpPolicy& policy, int epsilon,
                       const SriOptions& options = {});

/// `feature,pi,r,r_adv,normalized`
std::string pi_map_csv(const PiMap& map);
/// `feature,sri,clean,attacked,normalized`
std::string sri_map_csv(const SriMap& map);
/// Lane-by-column matrix for features named cell_<lane>_<col>; empty when
/// the schema has no such features.
std::string grid_csv(const FeatureSchema& schema, const std::vector<double>& values);

bool within_budget(const FactoredState& s, const FactoredState& observation, int epsilon);

}  // namespace pia
