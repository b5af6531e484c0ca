#include "pia/pctl/statistical.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>
#include <unordered_map>

#include <boost/math/distributions/normal.hpp>

#include "pia/common/error.hpp"

namespace pia::pctl {

namespace {

Tri tri(bool b) { return b ? Tri::True : Tri::False; }
Tri t_not(Tri a) { return a == Tri::True ? Tri::False : a == Tri::False ? Tri::True : Tri::Unknown; }
Tri t_and(Tri a, Tri b) { return std::min(a, b); }
Tri t_or(Tri a, Tri b) { return std::max(a, b); }

using Values = std::vector<Tri>;

/// Value at position j, extended past the prefix: the last position repeats
/// for absorbed traces, and is unknown otherwise.
Tri at(const Values& v, std::size_t j, bool absorbed) {
    if (j < v.size()) return v[j];
    return absorbed ? v.back() : Tri::Unknown;
}

Values until_values(const Values& a, const Values& b, const std::optional<std::uint64_t>& bound, bool absorbed) {
    const std::size_t len = a.size();
    Values out(len);
    if (!bound) {
        // On an absorbed suffix every position agrees, so a U b reduces to b.
        out[len - 1] = absorbed ? b[len - 1] : t_or(b[len - 1], t_and(a[len - 1], Tri::Unknown));
        for (std::size_t i = len - 1; i-- > 0;) out[i] = t_or(b[i], t_and(a[i], out[i + 1]));
        return out;
    }
    for (std::size_t i = 0; i < len; ++i) {
        Tri prefix = Tri::True;
        Tri res = Tri::False;
        for (std::uint64_t k = 0; k <= *bound; ++k) {
            const std::size_t j = i + static_cast<std::size_t>(k);
            res = t_or(res, t_and(prefix, at(b, j, absorbed)));
            prefix = t_and(prefix, at(a, j, absorbed));
            if (res == Tri::True || prefix == Tri::False) break;
            if (j >= len) break;  // further positions repeat (absorbed) or stay unknown
        }
        out[i] = res;
    }
    return out;
}

Values eval_all(const PathFormula& f, const TraceView& tr) {
    const std::size_t len = tr.length;
    switch (f.kind) {
        case PathFormula::Kind::State: {
            Values out(len);
            for (std::size_t i = 0; i < len; ++i) out[i] = tri(tr.holds(*f.state, i));
            return out;
        }
        case PathFormula::Kind::Not: {
            Values out = eval_all(*f.left, tr);
            for (auto& v : out) v = t_not(v);
            return out;
        }
        case PathFormula::Kind::And:
        case PathFormula::Kind::Or: {
            Values l = eval_all(*f.left, tr);
            const Values r = eval_all(*f.right, tr);
            for (std::size_t i = 0; i < len; ++i) {
                l[i] = f.kind == PathFormula::Kind::And ? t_and(l[i], r[i]) : t_or(l[i], r[i]);
            }
            return l;
        }
        case PathFormula::Kind::Next: {
            const Values a = eval_all(*f.left, tr);
            Values out(len);
            for (std::size_t i = 0; i < len; ++i) out[i] = at(a, i + 1, tr.absorbed);
            return out;
        }
        case PathFormula::Kind::Until:
            return until_values(eval_all(*f.left, tr), eval_all(*f.right, tr), f.bound, tr.absorbed);
        case PathFormula::Kind::Eventually:
            return until_values(Values(len, Tri::True), eval_all(*f.left, tr), f.bound, tr.absorbed);
        case PathFormula::Kind::Globally: {
            Values neg = eval_all(*f.left, tr);
            for (auto& v : neg) v = t_not(v);
            Values out = until_values(Values(len, Tri::True), neg, std::nullopt, tr.absorbed);
            for (auto& v : out) v = t_not(v);
            return out;
        }
    }
    throw UnsupportedFragment("unknown path operator");
}

struct Counts {
    std::size_t t = 0, f = 0, u = 0;
};

/// Runs `sample(rng)` n times split over workers; worker w owns a contiguous
/// block of the sample indices and an RNG seeded with (seed, w).
template <class Sample>
Counts run_samples(const StatisticalOptions& opt, Sample sample) {
    const std::size_t jobs = std::max<std::size_t>(1, std::min(opt.jobs, opt.samples));
    std::vector<Counts> per(jobs);
    auto work = [&](std::size_t w) {
        std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                          static_cast<std::uint32_t>(w)};
        std::mt19937_64 rng(seq);
        const std::size_t begin = opt.samples * w / jobs;
        const std::size_t end = opt.samples * (w + 1) / jobs;
        for (std::size_t i = begin; i < end; ++i) {
            switch (sample(rng)) {
                case Tri::True: ++per[w].t; break;
                case Tri::False: ++per[w].f; break;
                case Tri::Unknown: ++per[w].u; break;
            }
        }
    };
    if (jobs == 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        for (std::size_t w = 0; w < jobs; ++w) threads.emplace_back(work, w);
        for (auto& t : threads) t.join();
    }
    Counts total;
    for (const auto& c : per) {
        total.t += c.t;
        total.f += c.f;
        total.u += c.u;
    }
    return total;
}

CheckResult summarize(const Query& q, const Counts& c, const StatisticalOptions& opt) {
    CheckResult r;
    r.engine = FragmentClass::Statistical;
    Bracket b;
    b.confidence = opt.confidence;
    b.n_true = c.t;
    b.n_false = c.f;
    b.n_unknown = c.u;
    const std::size_t n = c.t + c.f + c.u;
    b.lower = wilson_lower(c.t, n, opt.confidence);
    b.upper = 1.0 - wilson_lower(c.f, n, opt.confidence);
    r.value = 0.5 * (b.lower + b.upper);
    r.bracket = b;
    if (q.bound) r.satisfied = compare(r.value, q.bound->op, q.bound->threshold);
    return r;
}

void require_samples(const StatisticalOptions& opt) {
    if (opt.samples == 0) throw ConfigError("statistical engine needs at least one sample");
    if (opt.horizon == 0) throw ConfigError("statistical engine needs a horizon of at least one step");
    if (!(opt.confidence > 0.0 && opt.confidence < 1.0)) throw ConfigError("confidence must lie in (0, 1)");
}

void collect_leaves(const PathFormula& f, std::vector<const StateFormula*>& out) {
    if (f.kind == PathFormula::Kind::State) {
        out.push_back(f.state.get());
        return;
    }
    if (f.left) collect_leaves(*f.left, out);
    if (f.right) collect_leaves(*f.right, out);
}

bool holds_on(const FeatureSchema& schema, const FactoredState& s, const std::vector<std::string>& labels,
              const StateFormula& f) {
    switch (f.kind) {
        case StateFormula::Kind::True: return true;
        case StateFormula::Kind::False: return false;
        case StateFormula::Kind::Label: {
            if (std::find(labels.begin(), labels.end(), f.name) != labels.end()) return true;
            const auto fi = schema.feature_index(f.name);
            return fi && s[*fi] != 0;
        }
        case StateFormula::Kind::Compare: return compare(s[schema.require_feature(f.name)], f.cmp, f.value);
        case StateFormula::Kind::Not: return !holds_on(schema, s, labels, *f.left);
        case StateFormula::Kind::And:
            return holds_on(schema, s, labels, *f.left) && holds_on(schema, s, labels, *f.right);
        case StateFormula::Kind::Or:
            return holds_on(schema, s, labels, *f.left) || holds_on(schema, s, labels, *f.right);
        case StateFormula::Kind::Prob: break;
    }
    throw UnsupportedFragment("nested probability operators need an explicit model");
}

}  // namespace

Tri evaluate(const PathFormula& f, const TraceView& trace) {
    if (trace.length == 0) return Tri::Unknown;
    return eval_all(f, trace).front();
}

double wilson_lower(std::size_t k, std::size_t n, double confidence) {
    if (n == 0 || k == 0) return 0.0;
    const boost::math::normal_distribution<double> normal;
    const double z = boost::math::quantile(normal, 1.0 - (1.0 - confidence) / 2.0);
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double centre = p + z2 / (2.0 * nn);
    const double spread = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    return std::clamp((centre - spread) / (1.0 + z2 / nn), 0.0, 1.0);
}

CheckResult check_statistical(const ExplicitModel& dtmc, const Query& q, const StatisticalOptions& opt) {
    require_samples(opt);
    for (const auto& cs : dtmc.choices) {
        if (cs.size() != 1) throw ConfigError("statistical checking of an explicit model needs a DTMC");
    }
    // Leaf formulas are decided once per state.
    std::vector<const StateFormula*> leaves;
    collect_leaves(*q.path, leaves);
    std::unordered_map<const StateFormula*, std::vector<char>> sat;
    for (const auto* leaf : leaves) sat.emplace(leaf, satisfying_states(dtmc, *leaf));

    const std::size_t n = dtmc.num_states();
    std::vector<char> absorbing(n);
    for (std::size_t s = 0; s < n; ++s) {
        const auto& row = dtmc.choices[s][0].row;
        absorbing[s] = row.size() == 1 && row[0].target == s;
    }

    auto sample = [&](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<StateId> path{dtmc.initial};
        while (path.size() <= opt.horizon && !absorbing[path.back()]) {
            const auto& row = dtmc.choices[path.back()][0].row;
            double u = unit(rng);
            StateId next = row.back().target;
            for (const auto& t : row) {
                if (u < t.prob) {
                    next = t.target;
                    break;
                }
                u -= t.prob;
            }
            path.push_back(next);
        }
        TraceView tr;
        tr.length = path.size();
        tr.absorbed = absorbing[path.back()];
        tr.holds = [&](const StateFormula& f, std::size_t i) { return sat.at(&f)[path[i]] != 0; };
        return evaluate(*q.path, tr);
    };
    return summarize(q, run_samples(opt, sample), opt);
}

CheckResult check_statistical(const ModelProvider& provider, const Policy& policy, const AttackFn* attack,
                              const Query& q, const StatisticalOptions& opt) {
    require_samples(opt);
    const FeatureSchema& schema = provider.schema();
    auto sample = [&](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<FactoredState> path{provider.initial_state()};
        std::vector<std::vector<std::string>> labels{provider.labels(path.back())};
        bool absorbed = false;
        while (path.size() <= opt.horizon) {
            const FactoredState& s = path.back();
            const ActionId a = policy.act(attack ? attack->perturb(s) : s);
            Distribution d = provider.transition(s, a);
            if (provider.is_terminal(s) || (d.size() == 1 && d[0].state == s)) {
                absorbed = true;
                break;
            }
            double u = unit(rng);
            std::size_t pick = d.size() - 1;
            for (std::size_t i = 0; i < d.size(); ++i) {
                if (u < d[i].prob) {
                    pick = i;
                    break;
                }
                u -= d[i].prob;
            }
            path.push_back(std::move(d[pick].state));
            labels.push_back(provider.labels(path.back()));
        }
        TraceView tr;
        tr.length = path.size();
        tr.absorbed = absorbed;
        tr.holds = [&](const StateFormula& f, std::size_t i) { return holds_on(schema, path[i], labels[i], f); };
        return evaluate(*q.path, tr);
    };
    return summarize(q, run_samples(opt, sample), opt);
}

}  // namespace pia::pctl
