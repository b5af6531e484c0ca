#include <gtest/gtest.h>

#include <random>

#include "models.hpp"
#include "worlds.hpp"
#include "pia/attack/attack.hpp"
#include "pia/common/error.hpp"
#include "pia/env/environments.hpp"
#include "pia/model/builder.hpp"
#include "pia/pctl/parser.hpp"
#include "pia/policy/policy.hpp"
#include "pia/robustness/robustness.hpp"

using namespace pia;
using pctl::Direction;
using oracle::random_policy;
using oracle::RandomWorld;

namespace {

struct Extremes {
    double lo = 1.0, hi = 0.0;
};

/// Max and min over every memoryless attack with |offset| <= eps.
Extremes brute_force(const RandomWorld& w, const Policy& pi, int eps) {
    const int n = w.schema().feature(0).hi + 1;
    std::vector<std::vector<int>> options(static_cast<std::size_t>(n));
    for (int x = 0; x < n; ++x) {
        for (const auto& d : enumerate_attack_set(FactoredState{x}, 0, eps, w.schema())) options[x].push_back(d[0]);
    }
    std::vector<std::size_t> pick(static_cast<std::size_t>(n), 0);
    Extremes e;
    const auto target = [&](const FactoredState& s) { return w.is_target(s); };
    while (true) {
        const double v = oracle::provider_reach(
            w, [&](const FactoredState& s) { return pi.act(FactoredState{options[s[0]][pick[s[0]]]}); }, target);
        e.lo = std::min(e.lo, v);
        e.hi = std::max(e.hi, v);
        std::size_t k = 0;
        while (k < pick.size() && ++pick[k] == options[k].size()) pick[k++] = 0;
        if (k == pick.size()) break;
    }
    return e;
}

TablePolicy fig2_policy() {
    env::Fig2Env e;
    TablePolicy p(e.schema(), 0);
    const ActionId acts[] = {0, 2, 1, 2, 0};
    for (int x = 0; x <= 4; ++x) p.set(FactoredState{x}, acts[x]);
    return p;
}

const pctl::Query& reach_t() {
    static const pctl::Query q = pctl::parse_formula(R"(P=? [ F "t" ])");
    return q;
}

}  // namespace

TEST(Robustness, Fig2) {
    env::Fig2Env e;
    const TablePolicy pi = fig2_policy();
    const auto q = pctl::parse_formula("P=? [ F x=2 ]");
    const RobustnessReport r =
        check_robustness(e, pi, q, PermissiveSpec::single_feature(0, 1), 0.1, Direction::Max);
    EXPECT_EQ(r.P, 0.0);
    EXPECT_EQ(r.P_star, 1.0);
    EXPECT_EQ(r.impact_star, 1.0);
    EXPECT_FALSE(r.robust);
    ASSERT_TRUE(r.verified);
    EXPECT_EQ(*r.verified, 1.0);
    ASSERT_FALSE(r.attack_map.empty());
    EXPECT_EQ(r.attack_map[0].state, FactoredState{1});
    EXPECT_EQ(r.attack_map[0].observation, FactoredState{2});
    EXPECT_EQ(r.attack_map[0].action, 1u);
}

TEST(Robustness, ZeroBudgetIsRobust) {
    env::Fig2Env e;
    const RobustnessReport r = check_robustness(e, fig2_policy(), pctl::parse_formula("P=? [ F x=2 ]"),
                                                PermissiveSpec::single_feature(0, 0), 0.0, Direction::Max);
    EXPECT_EQ(r.P, r.P_star);
    EXPECT_TRUE(r.robust);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const RandomWorld w(rng, 6, 3);
        const TablePolicy pi = random_policy(rng, w.schema());
        for (Direction d : {Direction::Max, Direction::Min}) {
            const auto rep = check_robustness(w, pi, reach_t(), PermissiveSpec::single_feature(0, 0), 0.0, d);
            EXPECT_NEAR(rep.P_star, rep.P, 1e-9);
            EXPECT_TRUE(rep.robust);
        }
    }
}

TEST(Robustness, OptimumMatchesBruteForce) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        const RandomWorld w(rng, 6, 2 + trial % 2);
        const TablePolicy pi = random_policy(rng, w.schema());
        const int eps = 1 + trial % 2;
        const Extremes e = brute_force(w, pi, eps);
        const auto hi = check_robustness(w, pi, reach_t(), PermissiveSpec::single_feature(0, eps), 0.0, Direction::Max);
        const auto lo = check_robustness(w, pi, reach_t(), PermissiveSpec::single_feature(0, eps), 0.0, Direction::Min);
        EXPECT_NEAR(hi.P_star, e.hi, 1e-7);
        EXPECT_NEAR(lo.P_star, e.lo, 1e-7);
        // The extracted attack realises the optimum.
        ASSERT_TRUE(hi.verified);
        EXPECT_NEAR(*hi.verified, e.hi, 1e-7);
        EXPECT_NEAR(*lo.verified, e.lo, 1e-7);
        for (const auto& m : hi.attack_map) {
            EXPECT_TRUE(within_budget(m.state, m.observation, eps));
            EXPECT_EQ(pi.act(m.observation), m.action);
        }
    }
}

TEST(Robustness, VerificationAcrossSeeds) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        const RandomWorld w(rng, 8, 3);
        const TablePolicy pi = random_policy(rng, w.schema());
        const auto r = check_robustness(w, pi, reach_t(), PermissiveSpec::single_feature(0, 1), 0.05, Direction::Max);
        ASSERT_TRUE(r.verified);
        EXPECT_NEAR(*r.verified, r.P_star, kVerifyTolerance) << seed;
        EXPECT_EQ(r.robust, std::abs(r.P_star - r.P) <= 0.05);
    }
}

TEST(Robustness, SandwichAgainstRandomAttacks) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const RandomWorld w(rng, 7, 3);
        const TablePolicy pi = random_policy(rng, w.schema());
        const PermissiveSpec spec = PermissiveSpec::single_feature(0, 2);
        const double hi = check_robustness(w, pi, reach_t(), spec, 0.0, Direction::Max, {}).P_star;
        const double lo = check_robustness(w, pi, reach_t(), spec, 0.0, Direction::Min, {}).P_star;
        for (int k = 0; k < 50; ++k) {
            TableAttack t(w.schema(), 2);
            for (int x = 0; x < 7; ++x) {
                const auto cands = enumerate_attack_set(FactoredState{x}, 0, 2, w.schema());
                t.set(FactoredState{x}, cands[rng() % cands.size()]);
            }
            const double v = compute_pi(w, pi, reach_t(), t).r_adv;
            EXPECT_LE(v, hi + 1e-7);
            EXPECT_GE(v, lo - 1e-7);
        }
    }
}

TEST(Robustness, MonotoneInBudget) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 15; ++trial) {
        const RandomWorld w(rng, 9, 3);
        const TablePolicy pi = random_policy(rng, w.schema());
        double prev_hi = 0.0, prev_lo = 1.0;
        for (int eps = 0; eps <= 4; ++eps) {
            const auto spec = PermissiveSpec::single_feature(0, eps);
            const double hi = check_robustness(w, pi, reach_t(), spec, 0.0, Direction::Max).P_star;
            const double lo = check_robustness(w, pi, reach_t(), spec, 0.0, Direction::Min).P_star;
            EXPECT_GE(hi, prev_hi - 1e-9);
            EXPECT_LE(lo, prev_lo + 1e-9);
            prev_hi = hi;
            prev_lo = lo;
        }
    }
}

TEST(Robustness, BoxScopeOnMlp) {
    const env::FreewayEnv f(env::FreewayConfig{2, 3, 0.3});
    const MlpPolicy p(f.schema(), {8}, 3);
    const auto q = pctl::parse_formula(R"(P=? [ F "hit" ])");
    const auto single = check_robustness(f, p, q, PermissiveSpec::single_feature(f.cell_feature(1, 1), 1), 0.0,
                                         Direction::Max);
    const auto box = check_robustness(f, p, q, PermissiveSpec::box(1), 0.0, Direction::Max);
    EXPECT_EQ(box.feature, "*");
    EXPECT_GE(box.P_star, single.P_star - 1e-9);
    ASSERT_TRUE(box.verified);
    EXPECT_NEAR(*box.verified, box.P_star, kVerifyTolerance);
    EXPECT_THROW(check_robustness(f, p, q, PermissiveSpec::box(1, 4), 0.0, Direction::Max), AttackSetCapExceeded);
}

TEST(Robustness, VerifyDetectsWrongExpectation) {
    env::Fig2Env e;
    const TablePolicy pi = fig2_policy();
    const auto q = pctl::parse_formula("P=? [ F x=2 ]");
    const auto r = check_robustness(e, pi, q, PermissiveSpec::single_feature(0, 1), 0.0, Direction::Max);
    EXPECT_THROW(verify_extracted_attack(e, pi, q, r.attack_map, 1, 0.5), MismatchAgainstPStar);
    EXPECT_NO_THROW(verify_extracted_attack(e, pi, pctl::parse_formula("P=? [ F<=3 x=2 ]"), r.attack_map, 1, 0.5));
}

TEST(Robustness, ReportSerialisation) {
    env::Fig2Env e;
    const auto r = check_robustness(e, fig2_policy(), pctl::parse_formula("P=? [ F x=2 ]"),
                                    PermissiveSpec::single_feature(0, 1), 0.1, Direction::Max);
    const nlohmann::json j = report_to_json(r, e.schema());
    EXPECT_EQ(j.at("P_star"), 1.0);
    EXPECT_EQ(j.at("robust"), false);
    EXPECT_FALSE(j.contains("timings"));
    EXPECT_TRUE(report_to_json(r, e.schema(), true).contains("timings"));
    const std::string csv = attack_map_csv(r, e.schema());
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "x,offset_feature,offset,action");
}
