#include "pia/model/explicit_model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "pia/common/error.hpp"

namespace pia {

std::string to_string(ModelKind kind) { return kind == ModelKind::MDP ? "MDP" : "DTMC"; }

std::size_t ExplicitModel::num_choices() const {
    std::size_t n = 0;
    for (const auto& cs : choices) n += cs.size();
    return n;
}

std::size_t ExplicitModel::num_transitions() const {
    std::size_t n = 0;
    for (const auto& cs : choices) {
        for (const auto& c : cs) n += c.row.size();
    }
    return n;
}

bool ExplicitModel::has_label(StateId s, std::string_view name) const {
    const auto& ls = labels[s];
    return std::binary_search(ls.begin(), ls.end(), name, std::less<>{});
}

std::optional<std::size_t> ExplicitModel::choice_index(StateId s, ActionId a) const {
    const auto& cs = choices[s];
    for (std::size_t i = 0; i < cs.size(); ++i) {
        if (cs[i].action == a) return i;
    }
    return std::nullopt;
}

StateIndex build_state_index(const ExplicitModel& model) {
    StateIndex index;
    index.reserve(model.states.size());
    for (std::size_t i = 0; i < model.states.size(); ++i) {
        index.emplace(model.states[i], static_cast<StateId>(i));
    }
    return index;
}

std::string to_string(const Diagnostic& d) {
    std::string out;
    if (d.state) out += "state " + std::to_string(*d.state);
    if (d.action) out += (out.empty() ? "" : " ") + std::string("action ") + std::to_string(*d.action);
    if (!out.empty()) out += ": ";
    return out + d.message;
}

std::vector<Diagnostic> validate_model(const ExplicitModel& model) {
    std::vector<Diagnostic> out;
    const std::size_t n = model.states.size();
    if (n == 0) {
        out.push_back({std::nullopt, std::nullopt, "model has no states"});
        return out;
    }
    if (model.choices.size() != n || model.labels.size() != n) {
        out.push_back({std::nullopt, std::nullopt, "choices/labels arrays do not match the state count"});
        return out;
    }
    if (model.initial >= n) {
        out.push_back({std::nullopt, std::nullopt, "initial state id out of range"});
        return out;
    }

    StateIndex seen;
    for (std::size_t s = 0; s < n; ++s) {
        const auto sid = static_cast<StateId>(s);
        if (!model.schema.contains(model.states[s])) {
            out.push_back({sid, std::nullopt, "state " + to_string(model.states[s]) + " violates the schema"});
        }
        if (!seen.emplace(model.states[s], sid).second) {
            out.push_back({sid, std::nullopt, "duplicate state " + to_string(model.states[s])});
        }
        if (!std::is_sorted(model.labels[s].begin(), model.labels[s].end()) ||
            std::adjacent_find(model.labels[s].begin(), model.labels[s].end()) != model.labels[s].end()) {
            out.push_back({sid, std::nullopt, "labels not sorted and unique"});
        }

        const auto& cs = model.choices[s];
        if (cs.empty()) {
            out.push_back({sid, std::nullopt, "deadlock: no enabled action"});
            continue;
        }
        if (model.kind == ModelKind::DTMC && cs.size() != 1) {
            out.push_back({sid, std::nullopt, "DTMC state has " + std::to_string(cs.size()) + " choices"});
        }
        for (std::size_t c = 0; c < cs.size(); ++c) {
            const Choice& ch = cs[c];
            if (c > 0 && cs[c - 1].action >= ch.action) {
                out.push_back({sid, ch.action, "choices not sorted by unique action id"});
            }
            if (ch.action >= model.schema.num_actions()) {
                out.push_back({sid, ch.action, "action id out of range"});
            }
            if (ch.row.empty()) {
                out.push_back({sid, ch.action, "empty row"});
                continue;
            }
            double total = 0.0;
            std::set<StateId> targets;
            bool dangling = false;
            bool bad_prob = false;
            bool duplicate = false;
            for (const auto& t : ch.row) {
                if (t.target >= n) dangling = true;
                if (!(t.prob > 0.0) || t.prob > 1.0 + kProbabilityTolerance) bad_prob = true;
                if (!targets.insert(t.target).second) duplicate = true;
                total += t.prob;
            }
            if (dangling) out.push_back({sid, ch.action, "row references a missing state id"});
            if (bad_prob) out.push_back({sid, ch.action, "row has a probability outside (0, 1]"});
            if (duplicate) out.push_back({sid, ch.action, "row lists a successor more than once"});
            if (std::abs(total - 1.0) > kProbabilityTolerance) {
                out.push_back({sid, ch.action, "row sums to " + std::to_string(total)});
            }
        }
    }
    {
        std::vector<bool> reached(n, false);
        std::deque<StateId> queue{model.initial};
        reached[model.initial] = true;
        while (!queue.empty()) {
            StateId s = queue.front();
            queue.pop_front();
            for (const auto& ch : model.choices[s]) {
                for (const auto& t : ch.row) {
                    if (t.target < n && !reached[t.target]) {
                        reached[t.target] = true;
                        queue.push_back(t.target);
                    }
                }
            }
        }
        for (std::size_t s = 0; s < n; ++s) {
            if (!reached[s]) out.push_back({static_cast<StateId>(s), std::nullopt, "unreachable from initial state"});
        }
    }
    return out;
}

void require_valid(const ExplicitModel& model) {
    auto diags = validate_model(model);
    if (diags.empty()) return;
    std::string msg = "invalid model (" + std::to_string(diags.size()) + " problems)";
    for (std::size_t i = 0; i < diags.size() && i < 5; ++i) msg += "; " + to_string(diags[i]);
    throw ValidationError(msg);
}

ExplicitModelProvider::ExplicitModelProvider(ExplicitModel model)
    : model_(std::move(model)), index_(build_state_index(model_)) {}

StateId ExplicitModelProvider::id_of(const FactoredState& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) throw ConfigError("state " + to_string(s) + " is not part of the explicit model");
    return it->second;
}

const Choice& ExplicitModelProvider::choice_of(const FactoredState& s, ActionId a) const {
    StateId id = id_of(s);
    auto c = model_.choice_index(id, a);
    if (!c) {
        throw IllegalAction("action " + std::to_string(a) + " not enabled in state " + to_string(s));
    }
    return model_.choices[id][*c];
}

std::vector<ActionId> ExplicitModelProvider::available_actions(const FactoredState& s) const {
    std::vector<ActionId> out;
    for (const auto& ch : model_.choices[id_of(s)]) out.push_back(ch.action);
    return out;
}

Distribution ExplicitModelProvider::transition(const FactoredState& s, ActionId a) const {
    Distribution d;
    for (const auto& t : choice_of(s, a).row) d.push_back({model_.states[t.target], t.prob});
    return d;
}

double ExplicitModelProvider::reward(const FactoredState& s, ActionId a) const { return choice_of(s, a).reward; }

std::vector<std::string> ExplicitModelProvider::labels(const FactoredState& s) const {
    return model_.labels[id_of(s)];
}

std::vector<std::string> ExplicitModelProvider::label_names() const {
    std::set<std::string> names;
    for (const auto& ls : model_.labels) names.insert(ls.begin(), ls.end());
    return {names.begin(), names.end()};
}

}  // namespace pia
