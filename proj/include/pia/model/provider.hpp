#pragma once

#include <string>
#include <vector>

#include "pia/model/schema.hpp"

namespace pia {

/// Factored MDP given implicitly by its transition function.
///
/// Implementations must be pure: the same arguments always produce the same
/// result. Every reachable state needs at least one available action; episode
/// ends are modelled as absorbing states where every action is a reward-0
/// self-loop, so that any policy output stays legal there.
class ModelProvider {
public:
    virtual ~ModelProvider() = default;

    virtual const FeatureSchema& schema() const = 0;
    virtual FactoredState initial_state() const = 0;
    virtual std::vector<ActionId> available_actions(const FactoredState& s) const = 0;
    virtual Distribution transition(const FactoredState& s, ActionId a) const = 0;
    virtual double reward(const FactoredState& s, ActionId a) const = 0;
    virtual std::vector<std::string> labels(const FactoredState& s) const = 0;

    /// Names of every proposition labels() may return. Parametric families such
    /// as "x=3" are listed with a placeholder, e.g. "x=<i>".
    virtual std::vector<std::string> label_names() const = 0;

    /// Episode end for simulation (training, SRI, statistical checking).
    virtual bool is_terminal(const FactoredState& s) const {
        (void)s;
        return false;
    }
};

/// Memoryless deterministic policy over observations.
class Policy {
public:
    virtual ~Policy() = default;
    virtual ActionId act(const FactoredState& observation) const = 0;
};

/// Observation perturbation. Implementations clip into the feature domains.
class AttackFn {
public:
    virtual ~AttackFn() = default;
    virtual FactoredState perturb(const FactoredState& s) const = 0;
    /// l-infinity budget; builders assert ||perturb(s) - s|| <= epsilon().
    virtual int epsilon() const = 0;
};

class IdentityAttack final : public AttackFn {
public:
    FactoredState perturb(const FactoredState& s) const override { return s; }
    int epsilon() const override { return 0; }
};

}  // namespace pia
