#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pia/model/provider.hpp"
#include "pia/model/schema.hpp"

namespace pia {

enum class ModelKind { MDP, DTMC };

std::string to_string(ModelKind kind);

struct Transition {
    StateId target = 0;
    double prob = 0.0;

    bool operator==(const Transition&) const = default;
};

/// One enabled action of a state together with its sparse successor row.
struct Choice {
    ActionId action = 0;
    double reward = 0.0;
    std::vector<Transition> row;

    bool operator==(const Choice&) const = default;
};

/// Sparse MDP or DTMC over explicitly enumerated factored states.
///
/// Choices of a state are sorted by action id. A DTMC has exactly one choice
/// per state. Label lists are sorted and duplicate-free.
struct ExplicitModel {
    ModelKind kind = ModelKind::MDP;
    FeatureSchema schema;
    std::vector<FactoredState> states;
    std::vector<std::vector<Choice>> choices;
    std::vector<std::vector<std::string>> labels;
    StateId initial = 0;

    std::size_t num_states() const noexcept { return states.size(); }
    std::size_t num_choices() const;
    std::size_t num_transitions() const;
    bool has_label(StateId s, std::string_view name) const;
    /// Choice index at state s for action a, if enabled.
    std::optional<std::size_t> choice_index(StateId s, ActionId a) const;

    bool operator==(const ExplicitModel&) const = default;
};

using StateIndex = std::unordered_map<FactoredState, StateId, FactoredStateHash>;

StateIndex build_state_index(const ExplicitModel& model);

struct Diagnostic {
    std::optional<StateId> state;
    std::optional<ActionId> action;
    std::string message;
};

/// Empty iff every ExplicitModel invariant holds: kind/choice-count agreement,
/// normalized rows without duplicate or dangling successors, in-domain and
/// unique states, no deadlocks, and reachability of every state from initial.
std::vector<Diagnostic> validate_model(const ExplicitModel& model);

std::string to_string(const Diagnostic& d);

/// Throws ValidationError carrying the first diagnostics, if any.
void require_valid(const ExplicitModel& model);

/// Exposes an explicit MDP through the provider contract so the builders can
/// re-induce chains from a loaded model file.
class ExplicitModelProvider final : public ModelProvider {
public:
    explicit ExplicitModelProvider(ExplicitModel model);

    const FeatureSchema& schema() const override { return model_.schema; }
    FactoredState initial_state() const override { return model_.states[model_.initial]; }
    std::vector<ActionId> available_actions(const FactoredState& s) const override;
    Distribution transition(const FactoredState& s, ActionId a) const override;
    double reward(const FactoredState& s, ActionId a) const override;
    std::vector<std::string> labels(const FactoredState& s) const override;
    std::vector<std::string> label_names() const override;

    const ExplicitModel& model() const noexcept { return model_; }

private:
    StateId id_of(const FactoredState& s) const;
    const Choice& choice_of(const FactoredState& s, ActionId a) const;

    ExplicitModel model_;
    StateIndex index_;
};

}  // namespace pia
