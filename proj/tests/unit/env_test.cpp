#include <gtest/gtest.h>

#include <cmath>

#include "models.hpp"
#include "pia/common/error.hpp"
#include "pia/env/environments.hpp"
#include "pia/model/builder.hpp"
#include "pia/pctl/checker.hpp"
#include "pia/pctl/parser.hpp"
#include "pia/policy/policy.hpp"

using namespace pia;
using namespace pia::env;

namespace {

double sum(const Distribution& d) {
    double t = 0.0;
    for (const auto& o : d) t += o.prob;
    return t;
}

void expect_sound(const ModelProvider& p, std::size_t cap = 2'000'000) {
    BuildOptions o;
    o.state_cap = cap;
    const ExplicitModel m = explore_model(p, o);
    const auto diags = validate_model(m);
    EXPECT_TRUE(diags.empty()) << (diags.empty() ? "" : to_string(diags.front()));
    for (StateId s = 0; s < m.num_states(); ++s) {
        ASSERT_TRUE(p.schema().contains(m.states[s]));
        if (p.is_terminal(m.states[s])) {
            for (ActionId a : p.available_actions(m.states[s])) {
                const auto d = p.transition(m.states[s], a);
                ASSERT_EQ(d.size(), 1u);
                EXPECT_EQ(d[0].state, m.states[s]);
                EXPECT_EQ(p.reward(m.states[s], a), 0.0);
            }
        }
    }
}

double reach(const ExplicitModel& dtmc, const std::string& formula) {
    return pctl::check(dtmc, pctl::parse_formula(formula)).value;
}

}  // namespace

TEST(Environments, RegistryNames) {
    for (const auto& name : environment_names()) {
        const auto p = make_environment(name);
        ASSERT_TRUE(p);
        EXPECT_TRUE(p->schema().contains(p->initial_state())) << name;
        EXPECT_FALSE(p->available_actions(p->initial_state()).empty());
    }
    EXPECT_THROW(make_environment("atari"), ConfigError);
}

TEST(Environments, ConfigValidation) {
    EXPECT_THROW(make_environment("taxi", {{"max_fuel", 0}}), ConfigError);
    EXPECT_THROW(make_environment("taxi", {{"fuel", 3}}), ConfigError);
    EXPECT_THROW(make_environment("freeway", {{"lane_width", 4}}), ConfigError);
    EXPECT_THROW(make_environment("collision", {{"slickness", 1.5}}), ConfigError);
    EXPECT_THROW(make_environment("stockmarket", {{"p_lo", 6}}), ConfigError);
    const nlohmann::json r = resolved_config("taxi", {{"max_fuel", 7}});
    EXPECT_EQ(r.at("max_fuel"), 7);
    EXPECT_EQ(r.at("grid_w"), 5);
    EXPECT_EQ(resolved_config("taxi", r), r);
}

TEST(Environments, ExploredModelsAreSound) {
    expect_sound(TaxiEnv(TaxiConfig::reduced()));
    expect_sound(CollisionEnv(CollisionConfig{4, 4, 0.1, {0, 0}, {3, 3}, {3, 0}}));
    expect_sound(SmartGridEnv());
    expect_sound(StockMarketEnv(StockConfig{5, 1, 3, 2, 1, 2, 2, 12}));
    expect_sound(FreewayEnv(FreewayConfig::mini()));
    expect_sound(FreewayEnv(FreewayConfig{1, 1, 0.5}));
    expect_sound(Fig2Env());
}

TEST(Environments, RowsAreNormalised) {
    const auto check_rows = [](const ModelProvider& p) {
        const ExplicitModel m = explore_model(p);
        for (const auto& s : m.states) {
            for (ActionId a : p.available_actions(s)) EXPECT_NEAR(sum(p.transition(s, a)), 1.0, 1e-12);
        }
    };
    check_rows(SmartGridEnv());
    check_rows(FreewayEnv(FreewayConfig::mini()));
    check_rows(CollisionEnv(CollisionConfig{3, 3, 0.3, {0, 0}, {2, 2}, {2, 0}}));
}

TEST(Taxi, FuelAndTermination) {
    TaxiEnv t(TaxiConfig::reduced());
    FactoredState s = t.initial_state();
    EXPECT_EQ(s[TaxiEnv::Fuel], 5);
    // Driving east away from the station burns one unit per move.
    s[TaxiEnv::X] = 0;
    s[TaxiEnv::Y] = 0;
    s[TaxiEnv::Fuel] = 1;
    const auto d = t.transition(s, TaxiEnv::East);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].state[TaxiEnv::Fuel], 0);
    EXPECT_EQ(d[0].state[TaxiEnv::Done], 1);
    const auto labels = t.labels(d[0].state);
    EXPECT_NE(std::find(labels.begin(), labels.end(), "empty"), labels.end());
    EXPECT_TRUE(t.is_terminal(d[0].state));
}

TEST(Taxi, StationRefuelsAndDropIsFree) {
    TaxiEnv t(TaxiConfig::reduced());
    FactoredState s = t.initial_state();
    s[TaxiEnv::X] = 1;
    s[TaxiEnv::Y] = 2;
    s[TaxiEnv::Fuel] = 2;
    EXPECT_EQ(t.transition(s, TaxiEnv::PickUp)[0].state[TaxiEnv::Fuel], 5);
    s[TaxiEnv::Pass] = 1;
    s[TaxiEnv::X] = s[TaxiEnv::XDest];
    s[TaxiEnv::Y] = s[TaxiEnv::YDest];
    EXPECT_EQ(t.reward(s, TaxiEnv::Drop), 0.0);
    EXPECT_LT(t.reward(s, TaxiEnv::North), 0.0);
    const auto d = t.transition(s, TaxiEnv::Drop);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].state[TaxiEnv::Jobs], 1);
    EXPECT_EQ(d[0].state[TaxiEnv::Pass], 0);
    EXPECT_TRUE(t.is_terminal(d[0].state));
}

TEST(Taxi, NewGuestSpawnsUniformly) {
    TaxiConfig c = TaxiConfig::reduced();
    c.max_jobs = 2;
    TaxiEnv t(c);
    FactoredState s = t.initial_state();
    s[TaxiEnv::Pass] = 1;
    s[TaxiEnv::X] = s[TaxiEnv::XDest];
    s[TaxiEnv::Y] = s[TaxiEnv::YDest];
    const auto d = t.transition(s, TaxiEnv::Drop);
    ASSERT_EQ(d.size(), 12u);
    for (const auto& o : d) {
        EXPECT_NEAR(o.prob, 1.0 / 12.0, 1e-15);
        EXPECT_FALSE(o.state[TaxiEnv::XLoc] == o.state[TaxiEnv::XDest] &&
                     o.state[TaxiEnv::YLoc] == o.state[TaxiEnv::YDest]);
    }
}

TEST(Collision, DeterministicWithoutSlickness) {
    CollisionEnv e(CollisionConfig{6, 6, 0.0, {0, 0}, {5, 5}, {5, 0}});
    const auto d = e.transition(e.initial_state(), CollisionEnv::East);
    EXPECT_NEAR(sum(d), 1.0, 1e-12);
    for (const auto& o : d) {
        EXPECT_EQ(o.state[CollisionEnv::X], 1);
        EXPECT_EQ(o.state[CollisionEnv::Y], 0);
    }
    EXPECT_EQ(e.reward(e.initial_state(), CollisionEnv::East), 100.0);
}

TEST(Collision, ContactEndsTheEpisode) {
    CollisionEnv e(CollisionConfig{3, 3, 0.0, {1, 0}, {2, 1}, {0, 2}});
    const FactoredState s = e.initial_state();
    double p_done = 0.0;
    for (const auto& o : e.transition(s, CollisionEnv::East)) {
        if (o.state[CollisionEnv::Done]) {
            p_done += o.prob;
            EXPECT_EQ(e.labels(o.state), std::vector<std::string>{"collision"});
        }
    }
    // The agent reaches (2,0); obstacles bounce off walls, so only a south move meets it.
    EXPECT_NEAR(p_done, 0.25, 1e-12);
}

TEST(Freeway, EveryEpisodeEndsCrossedOrHit) {
    FreewayEnv f(FreewayConfig::mini());
    bool mixed = false;
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        const MlpPolicy pi(f.schema(), {16}, seed);
        const ExplicitModel d = induce_dtmc(f, pi);
        const double crossed = reach(d, R"(P=? [ F "crossed" ])");
        const double hit = reach(d, R"(P=? [ F "hit" ])");
        EXPECT_NEAR(crossed + hit, 1.0, 1e-7) << seed;  // residual 1e-9 does not bound the error by 1e-9
        mixed = mixed || (crossed > 1e-6 && hit > 1e-6);
    }
    EXPECT_TRUE(mixed);
    // Always moving up outruns every car.
    EXPECT_NEAR(reach(induce_dtmc(f, TablePolicy(f.schema(), FreewayEnv::Up)), R"(P=? [ F "crossed" ])"), 1.0, 1e-12);
}

TEST(Freeway, SingleLaneHandComputed) {
    // One lane of width 1: the car spawns straight onto the middle column.
    FreewayEnv f(FreewayConfig{1, 1, 0.25});
    TablePolicy noop(f.schema(), FreewayEnv::Noop);
    EXPECT_NEAR(reach(induce_dtmc(f, noop), R"(P=? [ F "hit" ])"), 1.0, 1e-9);
    TablePolicy up(f.schema(), FreewayEnv::Up);
    EXPECT_NEAR(reach(induce_dtmc(f, up), R"(P=? [ F "crossed" ])"), 1.0, 1e-12);
    EXPECT_EQ(f.reward(f.initial_state(), FreewayEnv::Up), 1.0);
    EXPECT_EQ(f.reward(f.initial_state(), FreewayEnv::Noop), 0.0);
}

TEST(Freeway, FeatureLayout) {
    FreewayEnv f(FreewayConfig::mini());
    EXPECT_EQ(f.schema().num_features(), 2u + 3u * 5u);
    EXPECT_EQ(f.schema().feature(f.cell_feature(2, 3)).name, "cell_2_3");
    EXPECT_EQ(f.middle_column(), 2);
    EXPECT_EQ(f.schema().action_names()[FreewayEnv::Up], "up");
}

TEST(StockMarket, BankruptcyIsAbsorbing) {
    StockMarketEnv m;
    FactoredState s = m.initial_state();
    s[StockMarketEnv::Capital] = 0;
    EXPECT_TRUE(m.is_terminal(s));
    EXPECT_EQ(m.labels(s), std::vector<std::string>{"bankruptcy"});
    for (ActionId a = 0; a < 3; ++a) {
        const auto d = m.transition(s, a);
        ASSERT_EQ(d.size(), 1u);
        EXPECT_EQ(d[0].state, s);
    }
}

TEST(StockMarket, BuyAndSell) {
    StockMarketEnv m;
    const FactoredState s = m.initial_state();
    const auto bought = m.transition(s, StockMarketEnv::Buy);
    EXPECT_EQ(bought.size(), 4u);
    for (const auto& o : bought) {
        EXPECT_EQ(o.state[StockMarketEnv::Stocks], 3);
        EXPECT_EQ(o.state[StockMarketEnv::Capital], 1);
    }
    EXPECT_EQ(m.reward(s, StockMarketEnv::Hold), 0.0);
}

TEST(SmartGrid, BlackoutIsAbsorbing) {
    SmartGridEnv g;
    TablePolicy down(g.schema(), SmartGridEnv::DecreaseBoth);
    const ExplicitModel d = induce_dtmc(g, down);
    EXPECT_NEAR(reach(d, R"(P=? [ F "blackout" ])"), 1.0, 1e-9);
    FactoredState s = g.initial_state();
    s[SmartGridEnv::Blackout] = 1;
    EXPECT_TRUE(g.is_terminal(s));
    EXPECT_EQ(g.labels(s), std::vector<std::string>{"blackout"});
}
