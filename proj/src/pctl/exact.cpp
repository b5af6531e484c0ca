#include <algorithm>
#include <cmath>
#include <deque>

#include "pia/common/error.hpp"
#include "pia/pctl/checker.hpp"
#include "pia/pctl/graph.hpp"
#include "pia/pctl/statistical.hpp"

namespace pia::pctl {

std::string to_string(Direction d) { return d == Direction::Max ? "max" : "min"; }

namespace {

// Choices whose value is this close to the optimum count as optimal when
// extracting a maximizing scheduler.
constexpr double kOptimalTolerance = 1e-8;
constexpr double kTieTolerance = 1e-12;

using Mask = std::vector<char>;

struct Solution {
    std::vector<double> x;
    std::vector<std::size_t> choice;  // choice index per state
    std::size_t iterations = 0;
    double residual = 0.0;
};

bool single_choice(const ExplicitModel& m) {
    return std::all_of(m.choices.begin(), m.choices.end(), [](const auto& cs) { return cs.size() == 1; });
}

double q_value(const Choice& ch, const std::vector<double>& x) {
    double v = 0.0;
    for (const auto& t : ch.row) v += t.prob * x[t.target];
    return v;
}

double best_value(const std::vector<Choice>& cs, const std::vector<double>& x, Direction dir) {
    double best = q_value(cs[0], x);
    for (std::size_t c = 1; c < cs.size(); ++c) {
        const double v = q_value(cs[c], x);
        best = dir == Direction::Max ? std::max(best, v) : std::min(best, v);
    }
    return best;
}

std::size_t best_choice(const std::vector<Choice>& cs, const std::vector<double>& x, Direction dir) {
    const double target = best_value(cs, x, dir);
    for (std::size_t c = 0; c < cs.size(); ++c) {
        const double v = q_value(cs[c], x);
        if (dir == Direction::Max ? v >= target - kTieTolerance : v <= target + kTieTolerance) return c;
    }
    return 0;
}

struct PredEntry {
    StateId state;
    std::size_t choice;
};

std::vector<std::vector<PredEntry>> predecessors(const ExplicitModel& m) {
    std::vector<std::vector<PredEntry>> pred(m.num_states());
    for (std::size_t s = 0; s < m.num_states(); ++s) {
        for (std::size_t c = 0; c < m.choices[s].size(); ++c) {
            for (const auto& t : m.choices[s][c].row) pred[t.target].push_back({static_cast<StateId>(s), c});
        }
    }
    return pred;
}

/// States that reach `positive` with positive probability while staying in
/// `cont`: under some scheduler (max) or under every scheduler (min).
Mask positive_reach(const ExplicitModel& m, Direction dir, const Mask& positive, const Mask& cont) {
    const std::size_t n = m.num_states();
    const auto pred = predecessors(m);
    Mask reach = positive;
    std::vector<std::size_t> remaining(n);
    std::vector<std::vector<char>> hit(n);
    for (std::size_t s = 0; s < n; ++s) {
        remaining[s] = m.choices[s].size();
        hit[s].assign(m.choices[s].size(), 0);
    }
    std::deque<StateId> queue;
    for (std::size_t s = 0; s < n; ++s) {
        if (reach[s]) queue.push_back(static_cast<StateId>(s));
    }
    while (!queue.empty()) {
        const StateId t = queue.front();
        queue.pop_front();
        for (const auto& [p, c] : pred[t]) {
            if (reach[p] || !cont[p] || hit[p][c]) continue;
            hit[p][c] = 1;
            --remaining[p];
            if (dir == Direction::Max || remaining[p] == 0) {
                reach[p] = 1;
                queue.push_back(p);
            }
        }
    }
    return reach;
}

/// States that reach the weight-1 terminals with probability one under some
/// scheduler, computed as the usual nested fixed point.
Mask almost_sure_max(const ExplicitModel& m, const Mask& goal, const Mask& candidates) {
    const std::size_t n = m.num_states();
    Mask u(n, 0);
    for (std::size_t s = 0; s < n; ++s) u[s] = goal[s] || candidates[s];
    while (true) {
        Mask r = goal;
        bool grew = true;
        while (grew) {
            grew = false;
            for (std::size_t s = 0; s < n; ++s) {
                if (r[s] || !u[s] || !candidates[s]) continue;
                for (const auto& ch : m.choices[s]) {
                    bool inside = true;
                    bool progress = false;
                    for (const auto& t : ch.row) {
                        inside = inside && u[t.target];
                        progress = progress || r[t.target];
                    }
                    if (inside && progress) {
                        r[s] = 1;
                        grew = true;
                        break;
                    }
                }
            }
        }
        if (r == u) return u;
        u = std::move(r);
    }
}

/// Optimal value of reaching a terminal state (collecting its weight) while
/// moving through `cont` states; all other states are worth 0.
Solution solve_reach(const ExplicitModel& m, Direction dir, const Mask& terminal, const std::vector<double>& weight,
                     const Mask& cont_in, const CheckOptions& opt) {
    const std::size_t n = m.num_states();
    if (single_choice(m)) dir = Direction::Max;
    Mask cont(n, 0), positive(n, 0), unit(n, 0);
    for (std::size_t s = 0; s < n; ++s) {
        cont[s] = cont_in[s] && !terminal[s];
        positive[s] = terminal[s] && weight[s] > 0.0;
        unit[s] = terminal[s] && weight[s] == 1.0;
    }
    const Mask reach = positive_reach(m, dir, positive, cont);
    Mask one(n, 0);
    if (dir == Direction::Max) {
        Mask candidates(n, 0);
        for (std::size_t s = 0; s < n; ++s) candidates[s] = cont[s] && reach[s];
        one = almost_sure_max(m, unit, candidates);
        for (std::size_t s = 0; s < n; ++s) one[s] = one[s] && cont[s];
    }

    Solution sol;
    sol.x.assign(n, 0.0);
    std::vector<StateId> maybe;
    for (std::size_t s = 0; s < n; ++s) {
        if (terminal[s]) {
            sol.x[s] = weight[s];
        } else if (one[s]) {
            sol.x[s] = 1.0;
        } else if (cont[s] && reach[s]) {
            maybe.push_back(static_cast<StateId>(s));
        }
    }

    if (!maybe.empty()) {
        std::vector<double> next = sol.x;
        while (true) {
            double residual = 0.0;
            for (StateId s : maybe) {
                const double v = best_value(m.choices[s], sol.x, dir);
                residual = std::max(residual, std::abs(v - sol.x[s]));
                next[s] = v;
            }
            sol.x.swap(next);
            ++sol.iterations;
            sol.residual = residual;
            if (residual < opt.tolerance) break;
            if (sol.iterations >= opt.max_iterations) {
                throw NonConvergence("value iteration did not reach residual " + std::to_string(opt.tolerance) +
                                     " within " + std::to_string(opt.max_iterations) + " iterations");
            }
        }
    }

    sol.choice.assign(n, 0);
    if (dir == Direction::Max) {
        // Among optimal choices, pick one that moves toward a positive terminal,
        // so that end components are never entered without an exit.
        Mask attracted = positive;
        std::vector<StateId> pending;
        for (std::size_t s = 0; s < n; ++s) {
            if (cont[s] && sol.x[s] > 0.0) pending.push_back(static_cast<StateId>(s));
        }
        while (!pending.empty()) {
            std::vector<StateId> newly, rest;
            for (StateId s : pending) {
                const auto& cs = m.choices[s];
                bool assigned = false;
                for (std::size_t c = 0; c < cs.size() && !assigned; ++c) {
                    if (q_value(cs[c], sol.x) < sol.x[s] - kOptimalTolerance) continue;
                    for (const auto& t : cs[c].row) {
                        if (attracted[t.target]) {
                            sol.choice[s] = c;
                            assigned = true;
                            break;
                        }
                    }
                }
                (assigned ? newly : rest).push_back(s);
            }
            if (newly.empty()) {
                for (StateId s : rest) sol.choice[s] = best_choice(m.choices[s], sol.x, dir);
                break;
            }
            for (StateId s : newly) attracted[s] = 1;
            pending = std::move(rest);
        }
    } else {
        for (std::size_t s = 0; s < n; ++s) {
            if (!cont[s]) continue;
            const auto& cs = m.choices[s];
            if (!reach[s]) {
                // Some choice avoids positive terminals forever; keep to it.
                for (std::size_t c = 0; c < cs.size(); ++c) {
                    bool avoids = std::none_of(cs[c].row.begin(), cs[c].row.end(),
                                               [&](const Transition& t) { return reach[t.target]; });
                    if (avoids) {
                        sol.choice[s] = c;
                        break;
                    }
                }
            } else {
                sol.choice[s] = best_choice(cs, sol.x, dir);
            }
        }
    }
    return sol;
}

Solution solve_bounded(const ExplicitModel& m, Direction dir, const Mask& target, const Mask& cont,
                       std::uint64_t steps) {
    const std::size_t n = m.num_states();
    if (single_choice(m)) dir = Direction::Max;
    Solution sol;
    sol.x.assign(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) sol.x[s] = target[s] ? 1.0 : 0.0;
    sol.choice.assign(n, 0);
    std::vector<double> next = sol.x;
    for (std::uint64_t k = 0; k < steps; ++k) {
        for (std::size_t s = 0; s < n; ++s) {
            if (target[s] || !cont[s]) continue;
            next[s] = best_value(m.choices[s], sol.x, dir);
            if (k + 1 == steps) sol.choice[s] = best_choice(m.choices[s], sol.x, dir);
        }
        sol.x.swap(next);
        next = sol.x;
    }
    sol.iterations = static_cast<std::size_t>(steps);
    return sol;
}

Solution solve_next(const ExplicitModel& m, Direction dir, const Mask& target) {
    const std::size_t n = m.num_states();
    if (single_choice(m)) dir = Direction::Max;
    std::vector<double> ind(n);
    for (std::size_t s = 0; s < n; ++s) ind[s] = target[s] ? 1.0 : 0.0;
    Solution sol;
    sol.x.resize(n);
    sol.choice.resize(n);
    for (std::size_t s = 0; s < n; ++s) {
        sol.x[s] = best_value(m.choices[s], ind, dir);
        sol.choice[s] = best_choice(m.choices[s], ind, dir);
    }
    sol.iterations = 1;
    return sol;
}

Direction opposite(Direction d) { return d == Direction::Max ? Direction::Min : Direction::Max; }

Mask negate(const Mask& a) {
    Mask out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = !a[i];
    return out;
}

Solution solve_until(const ExplicitModel& m, Direction dir, const Mask& a, const Mask& b,
                     const std::optional<std::uint64_t>& bound, const CheckOptions& opt) {
    Mask cont(a.size());
    for (std::size_t s = 0; s < a.size(); ++s) cont[s] = a[s] && !b[s];
    if (bound) return solve_bounded(m, dir, b, cont, *bound);
    std::vector<double> w(b.size());
    for (std::size_t s = 0; s < b.size(); ++s) w[s] = b[s] ? 1.0 : 0.0;
    return solve_reach(m, dir, b, w, cont, opt);
}

Solution solve_query(const ExplicitModel& m, const PathFormula& p, Direction dir, const CheckOptions& opt);

Solution solve_core(const ExplicitModel& m, const PathFormula& p, Direction dir, const CheckOptions& opt) {
    const std::size_t n = m.num_states();
    switch (p.kind) {
        case PathFormula::Kind::Next:
            return solve_next(m, dir, satisfying_states(m, *p.left->state, opt));
        case PathFormula::Kind::Eventually:
            return solve_until(m, dir, Mask(n, 1), satisfying_states(m, *p.left->state, opt), p.bound, opt);
        case PathFormula::Kind::Until:
            return solve_until(m, dir, satisfying_states(m, *p.left->state, opt),
                               satisfying_states(m, *p.right->state, opt), p.bound, opt);
        case PathFormula::Kind::Globally: {
            Solution sol = solve_until(m, opposite(dir), Mask(n, 1), negate(satisfying_states(m, *p.left->state, opt)),
                                       std::nullopt, opt);
            for (double& v : sol.x) v = 1.0 - v;
            return sol;
        }
        default: break;
    }
    throw UnsupportedFragment("formula is outside the exact fragment");
}

/// Lowest-id action of each end-component state, as a choice index.
void stay_in(const ExplicitModel& m, const EndComponent& ec, std::vector<std::size_t>& choice) {
    for (std::size_t i = 0; i < ec.states.size(); ++i) {
        choice[ec.states[i]] = *m.choice_index(ec.states[i], ec.actions[i].front());
    }
}

/// Within an end component, choices that visit `goal` states infinitely often.
void cycle_through(const ExplicitModel& m, const EndComponent& ec, const Mask& goal, std::vector<std::size_t>& choice) {
    Mask attracted(m.num_states(), 0);
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < ec.states.size(); ++i) {
        const StateId s = ec.states[i];
        if (goal[s]) {
            choice[s] = *m.choice_index(s, ec.actions[i].front());
            attracted[s] = 1;
        } else {
            pending.push_back(i);
        }
    }
    while (!pending.empty()) {
        std::vector<std::size_t> rest, newly;
        for (std::size_t i : pending) {
            const StateId s = ec.states[i];
            bool assigned = false;
            for (ActionId a : ec.actions[i]) {
                const std::size_t c = *m.choice_index(s, a);
                for (const auto& t : m.choices[s][c].row) {
                    if (attracted[t.target]) {
                        choice[s] = c;
                        assigned = true;
                        break;
                    }
                }
                if (assigned) break;
            }
            (assigned ? newly : rest).push_back(i);
        }
        if (newly.empty()) break;  // unreachable: end components are strongly connected
        for (std::size_t i : newly) attracted[ec.states[i]] = 1;
        pending = std::move(rest);
    }
}

/// Phi1 U (G Phi2). Runs either leave Sat(Phi1) at some state t, and then
/// need G Phi2 from t, or stay inside Sat(Phi1) forever and must settle in
/// an end component of Sat(Phi1 & Phi2).
Solution solve_pattern(const ExplicitModel& m, const StateFormula& phi1, const StateFormula& phi2, Direction dir,
                       const CheckOptions& opt) {
    const std::size_t n = m.num_states();
    const bool chain = single_choice(m);
    if (chain) dir = Direction::Max;
    const Mask a = satisfying_states(m, phi1, opt);
    const Mask c = satisfying_states(m, phi2, opt);
    const Mask not_c = negate(c);
    std::vector<double> one_w(n);
    for (std::size_t s = 0; s < n; ++s) one_w[s] = not_c[s] ? 1.0 : 0.0;

    Mask terminal(n, 0);
    std::vector<double> weight(n, 0.0);
    std::vector<EndComponent> stay;

    if (dir == Direction::Max) {
        // Best chance of G Phi2 from a state outside Sat(Phi1).
        Solution g = solve_reach(m, Direction::Min, not_c, one_w, c, opt);
        for (std::size_t s = 0; s < n; ++s) {
            if (!a[s]) {
                terminal[s] = 1;
                weight[s] = 1.0 - g.x[s];
            }
        }
        Mask ac(n);
        for (std::size_t s = 0; s < n; ++s) ac[s] = a[s] && c[s];
        if (chain) {
            for (auto& bscc : decompose_bsccs(m)) {
                if (std::all_of(bscc.begin(), bscc.end(), [&](StateId s) { return ac[s]; })) {
                    EndComponent ec{bscc, {}};
                    for (StateId s : bscc) ec.actions.push_back({m.choices[s][0].action});
                    stay.push_back(std::move(ec));
                }
            }
        } else {
            stay = decompose_mecs(m, ac);
        }
        for (const auto& ec : stay) {
            for (StateId s : ec.states) {
                terminal[s] = 1;
                weight[s] = 1.0;
            }
        }
        Solution sol = solve_reach(m, Direction::Max, terminal, weight, a, opt);
        for (std::size_t s = 0; s < n; ++s) {
            if (!a[s]) sol.choice[s] = g.choice[s];
        }
        for (const auto& ec : stay) stay_in(m, ec, sol.choice);
        sol.iterations += g.iterations;
        sol.residual = std::max(sol.residual, g.residual);
        return sol;
    }

    // Minimum via the complementary objective: reach a bad end component of
    // Sat(Phi1) (one containing a !Phi2 state) or leave Sat(Phi1) and then hit !Phi2.
    Solution g = solve_reach(m, Direction::Max, not_c, one_w, c, opt);
    for (std::size_t s = 0; s < n; ++s) {
        if (!a[s]) {
            terminal[s] = 1;
            weight[s] = g.x[s];
        }
    }
    std::vector<EndComponent> bad;
    for (auto& ec : decompose_mecs(m, a)) {
        if (std::any_of(ec.states.begin(), ec.states.end(), [&](StateId s) { return not_c[s]; })) {
            bad.push_back(std::move(ec));
        }
    }
    for (const auto& ec : bad) {
        for (StateId s : ec.states) {
            terminal[s] = 1;
            weight[s] = 1.0;
        }
    }
    Solution sol = solve_reach(m, Direction::Max, terminal, weight, a, opt);
    for (double& v : sol.x) v = 1.0 - v;
    for (std::size_t s = 0; s < n; ++s) {
        if (!a[s]) sol.choice[s] = g.choice[s];
    }
    for (const auto& ec : bad) cycle_through(m, ec, not_c, sol.choice);
    sol.iterations += g.iterations;
    sol.residual = std::max(sol.residual, g.residual);
    return sol;
}

Solution solve_query(const ExplicitModel& m, const PathFormula& p, Direction dir, const CheckOptions& opt) {
    Query q{QueryKind::P, std::nullopt, std::make_shared<const PathFormula>(p)};
    switch (classify(q)) {
        case FragmentClass::ExactCore: return solve_core(m, p, dir, opt);
        case FragmentClass::ExactPatternUntilGlobally:
            return solve_pattern(m, *p.left->state, *p.right->left->state, dir, opt);
        case FragmentClass::Statistical: break;
    }
    throw UnsupportedFragment("formula '" + to_string(p) + "' is outside the exact fragments");
}

CheckResult finish(const ExplicitModel& m, const Query& q, Solution sol, FragmentClass engine) {
    CheckResult r;
    r.engine = engine;
    r.iterations = sol.iterations;
    r.residual = sol.residual;
    r.state_values = std::move(sol.x);
    for (double& v : r.state_values) v = std::clamp(v, 0.0, 1.0);
    r.value = r.state_values[m.initial];
    if (q.bound) r.satisfied = compare(r.value, q.bound->op, q.bound->threshold);
    return r;
}

}  // namespace

std::vector<char> satisfying_states(const ExplicitModel& m, const StateFormula& f, const CheckOptions& opt) {
    const std::size_t n = m.num_states();
    Mask out(n, 0);
    switch (f.kind) {
        case StateFormula::Kind::True: std::fill(out.begin(), out.end(), 1); break;
        case StateFormula::Kind::False: break;
        case StateFormula::Kind::Label: {
            const auto fi = m.schema.feature_index(f.name);
            for (std::size_t s = 0; s < n; ++s) {
                out[s] = m.has_label(static_cast<StateId>(s), f.name) || (fi && m.states[s][*fi] != 0);
            }
            break;
        }
        case StateFormula::Kind::Compare: {
            const auto fi = m.schema.feature_index(f.name);
            if (!fi) throw ConfigError("formula compares unknown feature '" + f.name + "'");
            for (std::size_t s = 0; s < n; ++s) out[s] = compare(m.states[s][*fi], f.cmp, f.value);
            break;
        }
        case StateFormula::Kind::Not: out = negate(satisfying_states(m, *f.left, opt)); break;
        case StateFormula::Kind::And:
        case StateFormula::Kind::Or: {
            const Mask l = satisfying_states(m, *f.left, opt);
            const Mask r = satisfying_states(m, *f.right, opt);
            for (std::size_t s = 0; s < n; ++s) {
                out[s] = f.kind == StateFormula::Kind::And ? (l[s] && r[s]) : (l[s] || r[s]);
            }
            break;
        }
        case StateFormula::Kind::Prob: {
            if (!f.bound) throw UnsupportedFragment("nested probability operator needs a bound");
            if (f.query == QueryKind::P && !single_choice(m)) {
                throw UnsupportedFragment("nested P on a nondeterministic model; use Pmax or Pmin");
            }
            const Direction dir = f.query == QueryKind::Pmin ? Direction::Min : Direction::Max;
            const Solution sol = solve_query(m, *f.path, dir, opt);
            for (std::size_t s = 0; s < n; ++s) out[s] = compare(sol.x[s], f.bound->op, f.bound->threshold);
            break;
        }
    }
    return out;
}

CheckResult check_dtmc_exact(const ExplicitModel& dtmc, const Query& q, const CheckOptions& options) {
    if (!single_choice(dtmc)) throw ConfigError("check_dtmc_exact needs a model with one choice per state");
    const FragmentClass engine = classify(q);
    if (engine == FragmentClass::Statistical) {
        throw UnsupportedFragment("formula '" + to_string(q) + "' needs the statistical engine");
    }
    return finish(dtmc, q, solve_query(dtmc, *q.path, Direction::Max, options), engine);
}

CheckResult check_mdp_extremal(const ExplicitModel& mdp, const Query& q, Direction direction,
                               const CheckOptions& options) {
    const FragmentClass engine = classify(q);
    if (engine == FragmentClass::Statistical) {
        throw UnsupportedFragment("formula '" + to_string(q) + "' is outside the exact fragments");
    }
    Solution sol = solve_query(mdp, *q.path, direction, options);
    std::vector<ActionId> scheduler(mdp.num_states());
    for (std::size_t s = 0; s < mdp.num_states(); ++s) scheduler[s] = mdp.choices[s][sol.choice[s]].action;
    CheckResult r = finish(mdp, q, std::move(sol), engine);
    r.scheduler = std::move(scheduler);
    return r;
}

CheckResult check(const ExplicitModel& model, const Query& q, const CheckOptions& options) {
    if (single_choice(model)) {
        if (classify(q) == FragmentClass::Statistical) return check_statistical(model, q, options.statistical);
        return check_dtmc_exact(model, q, options);
    }
    if (q.kind == QueryKind::P) {
        throw UnsupportedFragment("P on a nondeterministic model is undefined; use Pmax or Pmin");
    }
    return check_mdp_extremal(model, q, q.kind == QueryKind::Pmin ? Direction::Min : Direction::Max, options);
}

}  // namespace pia::pctl
