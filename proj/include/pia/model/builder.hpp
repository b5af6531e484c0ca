#pragma once

#include <cstddef>
#include <vector>

#include "pia/model/explicit_model.hpp"
#include "pia/model/provider.hpp"

namespace pia {

struct BuildOptions {
    std::size_t state_cap = 5'000'000;
};

/// The finite attack set Delta(s) behind a permissive policy.
struct PermissiveSpec {
    enum class Scope { SingleFeature, AllFeaturesBox };

    Scope scope = Scope::SingleFeature;
    std::size_t feature = 0;  // SingleFeature only
    int epsilon = 0;
    std::size_t cap = 4096;   // bound on |Delta(s)| for AllFeaturesBox

    static PermissiveSpec single_feature(std::size_t feature, int epsilon) {
        return {Scope::SingleFeature, feature, epsilon, 4096};
    }
    static PermissiveSpec box(int epsilon, std::size_t cap = 4096) {
        return {Scope::AllFeaturesBox, 0, epsilon, cap};
    }
};

/// One member of Delta(s): the perturbed observation and its offset from s.
struct AttackCandidate {
    FactoredState observation;
    std::vector<int> offset;  // length = number of features
};

/// Delta(s) in preference order: identity first, then by increasing
/// l-infinity and l1 size, negative offsets before positive ones. Only
/// in-domain observations are kept. Throws AttackSetCapExceeded when a box
/// would exceed spec.cap.
std::vector<AttackCandidate> attack_candidates(const FeatureSchema& schema, const FactoredState& s,
                                               const PermissiveSpec& spec);

/// Breadth-first closure over all available actions. State ids follow
/// discovery order; actions are expanded by increasing id, successors in the
/// order the provider returns them.
ExplicitModel explore_model(const ModelProvider& provider, const BuildOptions& options = {});

/// Markov chain of `policy` acting on (optionally attacked) observations while
/// the environment evolves on, and is labelled by, the true state.
ExplicitModel induce_dtmc(const ModelProvider& provider, const Policy& policy, const AttackFn* attack = nullptr,
                          const BuildOptions& options = {});

/// MDP whose choices at s are { policy(d) : d in Delta(s) }.
ExplicitModel induce_permissive_mdp(const ModelProvider& provider, const Policy& policy, const PermissiveSpec& spec,
                                    const BuildOptions& options = {});

}  // namespace pia
