#include "pia/pctl/graph.hpp"

#include <algorithm>
#include <limits>

namespace pia::pctl {

namespace {

constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();

}  // namespace

std::vector<StateSet> strongly_connected_components(const std::vector<std::vector<StateId>>& successors,
                                                    const std::vector<char>& active) {
    const std::size_t n = successors.size();
    auto is_active = [&](std::size_t s) { return active.empty() || active[s]; };

    // Iterative Tarjan.
    std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
    std::vector<char> on_stack(n, 0);
    std::vector<StateId> stack;
    std::vector<std::pair<StateId, std::size_t>> call;  // node, next edge position
    std::vector<StateSet> out;
    std::size_t counter = 0;

    for (std::size_t root = 0; root < n; ++root) {
        if (!is_active(root) || index[root] != kUnvisited) continue;
        call.push_back({static_cast<StateId>(root), 0});
        index[root] = low[root] = counter++;
        stack.push_back(static_cast<StateId>(root));
        on_stack[root] = 1;
        while (!call.empty()) {
            auto& [v, pos] = call.back();
            if (pos < successors[v].size()) {
                const StateId w = successors[v][pos++];
                if (!is_active(w)) continue;
                if (index[w] == kUnvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            const StateId done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
            if (low[done] == index[done]) {
                StateSet comp;
                StateId w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp.push_back(w);
                } while (w != done);
                std::sort(comp.begin(), comp.end());
                out.push_back(std::move(comp));
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const StateSet& a, const StateSet& b) { return a.front() < b.front(); });
    return out;
}

std::vector<StateSet> decompose_bsccs(const ExplicitModel& dtmc) {
    const std::size_t n = dtmc.num_states();
    std::vector<std::vector<StateId>> succ(n);
    for (std::size_t s = 0; s < n; ++s) {
        for (const auto& ch : dtmc.choices[s]) {
            for (const auto& t : ch.row) succ[s].push_back(t.target);
        }
    }
    auto sccs = strongly_connected_components(succ);
    std::vector<std::size_t> comp_of(n);
    for (std::size_t c = 0; c < sccs.size(); ++c) {
        for (StateId s : sccs[c]) comp_of[s] = c;
    }
    std::vector<StateSet> out;
    for (std::size_t c = 0; c < sccs.size(); ++c) {
        bool bottom = true;
        for (StateId s : sccs[c]) {
            for (StateId t : succ[s]) bottom = bottom && comp_of[t] == c;
        }
        if (bottom) out.push_back(sccs[c]);
    }
    return out;
}

std::vector<EndComponent> decompose_mecs(const ExplicitModel& mdp, const std::vector<char>& restrict_to) {
    const std::size_t n = mdp.num_states();
    std::vector<char> alive(n, 1);
    if (!restrict_to.empty()) alive = restrict_to;
    std::vector<std::vector<char>> live_choice(n);
    for (std::size_t s = 0; s < n; ++s) live_choice[s].assign(mdp.choices[s].size(), alive[s]);

    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> comp_of(n, kNone);
    std::vector<StateSet> sccs;
    bool changed = true;
    while (changed) {
        changed = false;
        // Drop choices that may leave the alive region, then states without choices.
        bool pruned = true;
        while (pruned) {
            pruned = false;
            for (std::size_t s = 0; s < n; ++s) {
                if (!alive[s]) continue;
                bool any = false;
                for (std::size_t c = 0; c < mdp.choices[s].size(); ++c) {
                    if (!live_choice[s][c]) continue;
                    for (const auto& t : mdp.choices[s][c].row) {
                        if (!alive[t.target]) {
                            live_choice[s][c] = 0;
                            break;
                        }
                    }
                    any = any || live_choice[s][c];
                }
                if (!any) {
                    alive[s] = 0;
                    pruned = true;
                }
            }
        }

        std::vector<std::vector<StateId>> succ(n);
        for (std::size_t s = 0; s < n; ++s) {
            if (!alive[s]) continue;
            for (std::size_t c = 0; c < mdp.choices[s].size(); ++c) {
                if (!live_choice[s][c]) continue;
                for (const auto& t : mdp.choices[s][c].row) succ[s].push_back(t.target);
            }
        }
        sccs = strongly_connected_components(succ, alive);
        std::fill(comp_of.begin(), comp_of.end(), kNone);
        for (std::size_t c = 0; c < sccs.size(); ++c) {
            for (StateId s : sccs[c]) comp_of[s] = c;
        }
        for (std::size_t s = 0; s < n; ++s) {
            if (!alive[s]) continue;
            for (std::size_t c = 0; c < mdp.choices[s].size(); ++c) {
                if (!live_choice[s][c]) continue;
                for (const auto& t : mdp.choices[s][c].row) {
                    if (comp_of[t.target] != comp_of[s]) {
                        live_choice[s][c] = 0;
                        changed = true;
                        break;
                    }
                }
            }
        }
    }

    std::vector<EndComponent> out;
    for (const auto& comp : sccs) {
        EndComponent ec;
        ec.states = comp;
        for (StateId s : comp) {
            std::vector<ActionId> acts;
            for (std::size_t c = 0; c < mdp.choices[s].size(); ++c) {
                if (live_choice[s][c]) acts.push_back(mdp.choices[s][c].action);
            }
            ec.actions.push_back(std::move(acts));
        }
        out.push_back(std::move(ec));
    }
    return out;
}

}  // namespace pia::pctl
