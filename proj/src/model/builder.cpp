#include "pia/model/builder.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <numeric>

#include "pia/common/error.hpp"

namespace pia {
namespace {

// Shared BFS driver: `select(s)` returns the sorted, unique actions to expand at s.
template <typename Select>
ExplicitModel build(const ModelProvider& provider, ModelKind kind, const BuildOptions& options, Select&& select) {
    const FeatureSchema& schema = provider.schema();
    ExplicitModel model;
    model.kind = kind;
    model.schema = schema;

    StateIndex index;
    std::deque<StateId> frontier;
    auto intern = [&](const FactoredState& s) -> StateId {
        auto it = index.find(s);
        if (it != index.end()) return it->second;
        if (model.states.size() >= options.state_cap) {
            throw StateCapExceeded("reachable state count exceeds cap of " + std::to_string(options.state_cap));
        }
        auto id = static_cast<StateId>(model.states.size());
        index.emplace(s, id);
        model.states.push_back(s);
        frontier.push_back(id);
        return id;
    };

    FactoredState init = provider.initial_state();
    schema.check(init);
    model.initial = intern(init);

    while (!frontier.empty()) {
        StateId sid = frontier.front();
        frontier.pop_front();
        // Copy: intern() may grow model.states.
        const FactoredState s = model.states[sid];

        std::vector<Choice> choices;
        for (ActionId a : select(s)) {
            Distribution dist = provider.transition(s, a);
            check_distribution(dist);
            Choice ch;
            ch.action = a;
            ch.reward = provider.reward(s, a);
            ch.row.reserve(dist.size());
            for (const auto& o : dist) {
                if (!schema.contains(o.state)) {
                    throw InvalidDistribution("successor " + to_string(o.state) + " of " + to_string(s) +
                                              " violates the schema");
                }
                ch.row.push_back({intern(o.state), o.prob});
            }
            choices.push_back(std::move(ch));
        }
        if (choices.empty()) throw IllegalAction("state " + to_string(s) + " has no enabled action");

        auto ls = provider.labels(s);
        std::sort(ls.begin(), ls.end());
        ls.erase(std::unique(ls.begin(), ls.end()), ls.end());

        if (model.choices.size() <= sid) {
            model.choices.resize(sid + 1);
            model.labels.resize(sid + 1);
        }
        model.choices[sid] = std::move(choices);
        model.labels[sid] = std::move(ls);
    }
    model.choices.resize(model.states.size());
    model.labels.resize(model.states.size());
    return model;
}

std::vector<ActionId> sorted_available(const ModelProvider& provider, const FactoredState& s) {
    auto acts = provider.available_actions(s);
    std::sort(acts.begin(), acts.end());
    acts.erase(std::unique(acts.begin(), acts.end()), acts.end());
    return acts;
}

void require_enabled(const std::vector<ActionId>& available, ActionId a, const FactoredState& s,
                     const FactoredState& obs) {
    if (!std::binary_search(available.begin(), available.end(), a)) {
        throw IllegalAction("policy chose action " + std::to_string(a) + " on observation " + to_string(obs) +
                            ", which is not enabled in state " + to_string(s));
    }
}

bool prefer(const std::vector<int>& a, const std::vector<int>& b) {
    auto linf = [](const std::vector<int>& v) {
        int m = 0;
        for (int x : v) m = std::max(m, std::abs(x));
        return m;
    };
    auto l1 = [](const std::vector<int>& v) {
        int m = 0;
        for (int x : v) m += std::abs(x);
        return m;
    };
    if (linf(a) != linf(b)) return linf(a) < linf(b);
    if (l1(a) != l1(b)) return l1(a) < l1(b);
    return a < b;  // negative offsets first
}

}  // namespace

std::vector<AttackCandidate> attack_candidates(const FeatureSchema& schema, const FactoredState& s,
                                               const PermissiveSpec& spec) {
    if (spec.epsilon < 0) throw ConfigError("attack epsilon must be nonnegative");
    const std::size_t n = schema.num_features();
    std::vector<AttackCandidate> out;

    if (spec.scope == PermissiveSpec::Scope::SingleFeature) {
        if (spec.feature >= n) throw ConfigError("attack feature index out of range");
        const Feature& f = schema.feature(spec.feature);
        // 0, -1, +1, -2, +2, ...
        std::vector<int> ks{0};
        for (int k = 1; k <= spec.epsilon; ++k) {
            ks.push_back(-k);
            ks.push_back(k);
        }
        for (int k : ks) {
            long v = static_cast<long>(s[spec.feature]) + k;
            if (v < f.lo || v > f.hi) continue;
            AttackCandidate c{s, std::vector<int>(n, 0)};
            c.observation[spec.feature] = static_cast<int>(v);
            c.offset[spec.feature] = k;
            out.push_back(std::move(c));
        }
        return out;
    }

    // Box over all features: per-feature in-domain offset ranges.
    std::vector<int> lo(n), hi(n);
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const Feature& f = schema.feature(i);
        lo[i] = std::max(-spec.epsilon, f.lo - s[i]);
        hi[i] = std::min(spec.epsilon, f.hi - s[i]);
        const std::size_t width = static_cast<std::size_t>(hi[i] - lo[i] + 1);
        if (total > spec.cap / width + 1) {
            throw AttackSetCapExceeded("attack box at " + to_string(s) + " exceeds cap " + std::to_string(spec.cap));
        }
        total *= width;
    }
    if (total > spec.cap) {
        throw AttackSetCapExceeded("attack box at " + to_string(s) + " has " + std::to_string(total) +
                                   " members, cap is " + std::to_string(spec.cap));
    }
    std::vector<int> off(lo);
    out.reserve(total);
    for (;;) {
        AttackCandidate c{s, off};
        for (std::size_t i = 0; i < n; ++i) c.observation[i] += off[i];
        out.push_back(std::move(c));
        std::size_t i = 0;
        while (i < n && off[i] == hi[i]) {
            off[i] = lo[i];
            ++i;
        }
        if (i == n) break;
        ++off[i];
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const AttackCandidate& a, const AttackCandidate& b) { return prefer(a.offset, b.offset); });
    return out;
}

ExplicitModel explore_model(const ModelProvider& provider, const BuildOptions& options) {
    return build(provider, ModelKind::MDP, options,
                 [&](const FactoredState& s) { return sorted_available(provider, s); });
}

ExplicitModel induce_dtmc(const ModelProvider& provider, const Policy& policy, const AttackFn* attack,
                          const BuildOptions& options) {
    const FeatureSchema& schema = provider.schema();
    return build(provider, ModelKind::DTMC, options, [&](const FactoredState& s) {
        FactoredState obs = attack ? attack->perturb(s) : s;
        if (attack) {
            if (!schema.contains(obs)) throw IllegalAction("attack left the feature domain at " + to_string(s));
            if (obs.linf_distance(s) > attack->epsilon()) {
                throw IllegalAction("attack exceeded its epsilon bound at " + to_string(s));
            }
        }
        ActionId a = policy.act(obs);
        require_enabled(sorted_available(provider, s), a, s, obs);
        return std::vector<ActionId>{a};
    });
}

ExplicitModel induce_permissive_mdp(const ModelProvider& provider, const Policy& policy, const PermissiveSpec& spec,
                                    const BuildOptions& options) {
    const FeatureSchema& schema = provider.schema();
    return build(provider, ModelKind::MDP, options, [&](const FactoredState& s) {
        const auto available = sorted_available(provider, s);
        std::vector<ActionId> omega;
        for (const auto& c : attack_candidates(schema, s, spec)) {
            ActionId a = policy.act(c.observation);
            require_enabled(available, a, s, c.observation);
            omega.push_back(a);
        }
        std::sort(omega.begin(), omega.end());
        omega.erase(std::unique(omega.begin(), omega.end()), omega.end());
        return omega;
    });
}

}  // namespace pia
