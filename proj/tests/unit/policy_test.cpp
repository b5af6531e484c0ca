#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "pia/common/error.hpp"
#include "pia/env/environments.hpp"
#include "pia/policy/dqn.hpp"
#include "pia/policy/policy.hpp"

using namespace pia;

namespace {

FeatureSchema small_schema() { return FeatureSchema({{"u", -3, 3}, {"v", 0, 5}, {"w", 0, 1}}, {"l", "m", "r"}); }

// One decision: action 1 pays 1, action 0 pays 0, then the episode ends.
class Bandit final : public ModelProvider {
public:
    Bandit() : schema_({{"t", 0, 1}}, {"lose", "win"}) {}
    const FeatureSchema& schema() const override { return schema_; }
    FactoredState initial_state() const override { return FactoredState{0}; }
    std::vector<ActionId> available_actions(const FactoredState&) const override { return {0, 1}; }
    Distribution transition(const FactoredState&, ActionId) const override { return {{FactoredState{1}, 1.0}}; }
    double reward(const FactoredState& s, ActionId a) const override { return s[0] == 0 && a == 1 ? 1.0 : 0.0; }
    std::vector<std::string> labels(const FactoredState&) const override { return {}; }
    std::vector<std::string> label_names() const override { return {}; }
    bool is_terminal(const FactoredState& s) const override { return s[0] == 1; }

private:
    FeatureSchema schema_;
};

TrainConfig quick_config() {
    TrainConfig c;
    c.hidden_layers = 1;
    c.neurons = 16;
    c.learning_rate = 1e-2;
    c.batch = 8;
    c.episodes = 200;
    c.max_steps = 5;
    c.epsilon_decay = 0.98;
    c.target_update = 10;
    c.replay_capacity = 500;
    c.seed = 7;
    return c;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("pia_policy_test_" + name);
}

}  // namespace

TEST(Mlp, ZeroNetworkOutputsZero) {
    const MlpPolicy z = MlpPolicy::zeros(small_schema(), {4, 4});
    const Eigen::VectorXd q = z.forward(FactoredState{2, 3, 1});
    ASSERT_EQ(q.size(), 3);
    EXPECT_EQ(q, Eigen::VectorXd::Zero(3));
    EXPECT_EQ(z.act(FactoredState{2, 3, 1}), 0u);
    EXPECT_EQ(z.layer_sizes(), (std::vector<std::size_t>{3, 4, 4, 3}));
}

TEST(Mlp, HandAffineNetwork) {
    // One ReLU layer: h = relu(x0 - x1), q = [h, 1 - h, 0.5]
    Eigen::MatrixXd w1(1, 3);
    w1 << 1, -1, 0;
    Eigen::VectorXd b1 = Eigen::VectorXd::Zero(1);
    Eigen::MatrixXd w2(3, 1);
    w2 << 1, -1, 0;
    Eigen::VectorXd b2(3);
    b2 << 0, 1, 0.5;
    const MlpPolicy p(small_schema(), {w1, w2}, {b1, b2});
    const Eigen::VectorXd q = p.forward(FactoredState{3, 1, 0});
    EXPECT_DOUBLE_EQ(q(0), 2.0);
    EXPECT_DOUBLE_EQ(q(1), -1.0);
    EXPECT_DOUBLE_EQ(q(2), 0.5);
    EXPECT_EQ(p.act(FactoredState{3, 1, 0}), 0u);
    EXPECT_EQ(p.act(FactoredState{-2, 1, 0}), 1u);
    EXPECT_EQ(p.act_among(FactoredState{3, 1, 0}, {1, 2}), 2u);
    EXPECT_THROW(MlpPolicy(small_schema(), {w2, w1}, {b2, b1}), ShapeMismatch);
    EXPECT_THROW(p.forward(FactoredState{1, 2}), ShapeMismatch);
}

TEST(Mlp, TiesPickLowestAction) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 3);
    Eigen::VectorXd b(3);
    b << 0.0, 1.0, 1.0;
    const MlpPolicy p(small_schema(), {w}, {b});
    EXPECT_EQ(p.act(FactoredState{0, 0, 0}), 1u);
}

TEST(Mlp, BatchMatchesSingle) {
    const MlpPolicy p(small_schema(), {8, 5}, 3);
    Eigen::MatrixXd x(3, 4);
    x << 1, -2, 3, 0, 4, 0, 5, 2, 1, 1, 0, 0;
    const Eigen::MatrixXd qb = p.forward_batch(x);
    for (int c = 0; c < 4; ++c) EXPECT_TRUE(qb.col(c).isApprox(p.forward(Eigen::VectorXd(x.col(c))), 1e-14));
}

TEST(Mlp, InputGradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const MlpPolicy p(small_schema(), {12, 7}, seed);
        const Eigen::VectorXd x{{u(rng), u(rng), u(rng)}};
        const auto loss = [&](const Eigen::VectorXd& v, ActionId a) {
            const Eigen::VectorXd q = p.forward(v);
            const double m = q.maxCoeff();
            return m + std::log((q.array() - m).exp().sum()) - q(a);
        };
        for (ActionId a = 0; a < 3; ++a) {
            const Eigen::VectorXd g = p.input_gradient(x, a);
            for (int i = 0; i < 3; ++i) {
                Eigen::VectorXd hi = x, lo = x;
                const double h = 1e-6;
                hi(i) += h;
                lo(i) -= h;
                EXPECT_NEAR(g(i), (loss(hi, a) - loss(lo, a)) / (2 * h), 1e-6);
            }
        }
    }
}

TEST(Mlp, DeadFeatureHasZeroGradient) {
    MlpPolicy p(small_schema(), {6}, 5);
    p.weights()[0].col(2).setZero();
    for (ActionId a = 0; a < 3; ++a) EXPECT_EQ(p.input_gradient(FactoredState{1, 2, 1}, a)(2), 0.0);
}

TEST(Mlp, ArgmaxInvariantUnderPositiveOutputScaling) {
    std::mt19937_64 rng(13);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const MlpPolicy p(small_schema(), {10}, seed);
        MlpPolicy scaled = p;
        scaled.weights().back() *= 3.5;
        scaled.biases().back() *= 3.5;
        for (int k = 0; k < 20; ++k) {
            const FactoredState s{static_cast<int>(rng() % 7) - 3, static_cast<int>(rng() % 6), static_cast<int>(rng() % 2)};
            EXPECT_EQ(p.act(s), scaled.act(s));
        }
    }
}

TEST(PolicyIo, MlpRoundTripIsBitIdentical) {
    const MlpPolicy p(small_schema(), {9, 4}, 21);
    const std::string bytes = serialize_policy(p);
    const MlpPolicy q = deserialize_policy(bytes);
    EXPECT_TRUE(p == q);
    EXPECT_EQ(serialize_policy(q), bytes);
    const auto path = temp_file("rt.json");
    save_policy(p, path);
    EXPECT_TRUE(load_mlp_policy(path) == p);
    std::filesystem::remove(path);
}

TEST(PolicyIo, TableRoundTrip) {
    env::Fig2Env e;
    TablePolicy t(e.schema(), 0);
    t.set(FactoredState{1}, 2);
    t.set(FactoredState{2}, 1);
    const TablePolicy u = table_policy_from_json(policy_to_json(t));
    EXPECT_EQ(u.table(), t.table());
    EXPECT_EQ(u.default_action(), 0u);
    EXPECT_EQ(u.act(FactoredState{3}), 0u);
}

TEST(PolicyIo, BundledFig2Policy) {
    const env::Fig2Env e;
    const auto p = load_policy(std::filesystem::path(PIA_DATA_DIR) / "fig2_policy.json", &e.schema());
    const ActionId expect[] = {0, 2, 1, 2, 0};
    for (int x = 0; x <= 4; ++x) EXPECT_EQ(p->act(FactoredState{x}), expect[x]) << x;
}

TEST(PolicyIo, TruncatedFileIsAFormatError) {
    const MlpPolicy p(small_schema(), {5}, 2);
    const std::string bytes = serialize_policy(p);
    const auto path = temp_file("trunc.json");
    {
        std::ofstream os(path, std::ios::binary);
        os << bytes.substr(0, bytes.size() / 2);
    }
    EXPECT_THROW(load_policy(path), FormatError);
    std::filesystem::remove(path);
    nlohmann::json j = policy_to_json(p);
    j["weights"][0].erase(0);
    EXPECT_THROW(mlp_policy_from_json(j), Error);
    j = policy_to_json(p);
    j["format"] = "something-else";
    EXPECT_THROW(mlp_policy_from_json(j), FormatError);
}

TEST(PolicyIo, SchemaMismatchIsRejected) {
    const env::TaxiEnv taxi(env::TaxiConfig::reduced());
    const env::FreewayEnv freeway(env::FreewayConfig::mini());
    const MlpPolicy p(taxi.schema(), {4}, 1);
    const auto path = temp_file("schema.json");
    save_policy(p, path);
    EXPECT_THROW(load_policy(path, &freeway.schema()), SchemaMismatch);
    EXPECT_NO_THROW(load_policy(path, &taxi.schema()));
    std::filesystem::remove(path);
}

TEST(PolicyIo, ActsOnEmptyTankState) {
    const env::TaxiEnv taxi(env::TaxiConfig::reduced());
    const MlpPolicy p(taxi.schema(), {8}, 4);
    FactoredState s = taxi.initial_state();
    s[env::TaxiEnv::Fuel] = 0;
    s[env::TaxiEnv::Done] = 1;
    EXPECT_LT(p.act(s), taxi.schema().num_actions());
}

TEST(Dqn, EpsilonSchedule) {
    TrainConfig c;
    c.epsilon_start = 1.0;
    c.epsilon_decay = 0.5;
    c.epsilon_min = 0.1;
    EXPECT_EQ(c.epsilon_at(0), 1.0);
    EXPECT_EQ(c.epsilon_at(1), 0.5);
    EXPECT_EQ(c.epsilon_at(3), 0.125);
    EXPECT_EQ(c.epsilon_at(4), 0.1);
    EXPECT_EQ(c.epsilon_at(1000), 0.1);
}

TEST(Dqn, ConfigValidation) {
    TrainConfig c;
    c.batch = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = TrainConfig{};
    c.gamma = 1.5;
    EXPECT_THROW(c.validate(), ConfigError);
    TrainConfig parsed;
    EXPECT_THROW(from_json(nlohmann::json{{"learning_rat", 0.1}}, parsed), ConfigError);
    from_json(to_json(quick_config()), parsed);
    EXPECT_EQ(to_json(parsed), to_json(quick_config()));
}

TEST(Dqn, LearnsABandit) {
    const Bandit b;
    const TrainResult r = train_dqn(b, quick_config());
    EXPECT_EQ(r.policy.act(FactoredState{0}), 1u);
    EXPECT_EQ(r.history.size(), 200u);
    EXPECT_EQ(r.decisions, 200u);
    EXPECT_GT(r.updates, 0u);
    const Eigen::VectorXd q = r.policy.forward(FactoredState{0});
    EXPECT_NEAR(q(1), 1.0, 0.2);
}

TEST(Dqn, BitReproducible) {
    const env::TaxiEnv taxi(env::TaxiConfig::reduced());
    TrainConfig c = quick_config();
    c.episodes = 30;
    c.max_steps = 20;
    const TrainResult a = train_dqn(taxi, c), b = train_dqn(taxi, c);
    EXPECT_TRUE(a.policy == b.policy);
    EXPECT_EQ(training_csv(a.history), training_csv(b.history));
    c.seed = 8;
    EXPECT_FALSE(train_dqn(taxi, c).policy == a.policy);
}

TEST(Dqn, IdentityHookChangesNothing) {
    const env::TaxiEnv taxi(env::TaxiConfig::reduced());
    TrainConfig c = quick_config();
    c.episodes = 20;
    c.max_steps = 20;
    const TrainResult a = train_dqn(taxi, c);
    const TrainResult b = train_dqn(taxi, c, [](const MlpPolicy&, const FactoredState& s) { return s; });
    EXPECT_TRUE(a.policy == b.policy);
}

TEST(Dqn, ResumeFromInitialWeights) {
    const Bandit b;
    TrainConfig c = quick_config();
    c.episodes = 1;
    const MlpPolicy start(b.schema(), {16}, 99);
    const TrainResult r = train_dqn(b, c, {}, &start);
    // Fewer transitions than a batch: no update happens.
    EXPECT_EQ(r.updates, 0u);
    EXPECT_TRUE(r.policy == start);
}

TEST(Dqn, TrainingCsvHeader) {
    const std::string csv = training_csv({{0, 1.5, 1.5, 1.0}});
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "episode,reward,sliding100,epsilon");
}

TEST(Episodes, RunEpisodeStopsAtTerminal) {
    const Bandit b;
    Rng rng(1);
    const TablePolicy win(b.schema(), 1);
    const EpisodeOutcome o = run_episode(b, policy_chooser(win), 100, 0.9, rng);
    EXPECT_EQ(o.steps, 1u);
    EXPECT_EQ(o.total_reward, 1.0);
    EXPECT_EQ(o.discounted_return, 1.0);
}
