#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "pia/policy/policy.hpp"

namespace pia {

struct TrainConfig {
    std::size_t hidden_layers = 4;
    std::size_t neurons = 512;
    double learning_rate = 1e-4;
    std::size_t batch = 100;
    std::size_t episodes = 1000;
    std::size_t max_steps = 100;  // per episode
    double gamma = 0.99;
    double epsilon_start = 1.0;
    double epsilon_decay = 0.99999;
    double epsilon_min = 0.1;
    std::size_t target_update = 100;  // gradient updates between target refreshes
    std::size_t replay_capacity = 100'000;
    std::uint64_t seed = 128;

    /// Exploration rate after k decisions: max(epsilon_min, epsilon_start * decay^k).
    double epsilon_at(std::uint64_t k) const;
    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

void from_json(const nlohmann::json& j, TrainConfig& c);
nlohmann::json to_json(const TrainConfig& c);

struct EpisodeRecord {
    std::size_t episode = 0;
    double reward = 0.0;
    double sliding100 = 0.0;
    double epsilon = 0.0;
};

struct TrainResult {
    MlpPolicy policy;
    std::vector<EpisodeRecord> history;
    std::uint64_t decisions = 0;
    std::uint64_t updates = 0;
};

/// Observation transform used during training, given the current network.
using AttackHook = std::function<FactoredState(const MlpPolicy& current, const FactoredState& s)>;

/// Deep Q-learning with uniform experience replay, one Adam step on the
/// squared TD error per environment step once `batch` transitions are
/// stored, and a target network copied every `target_update` steps. With
/// `initial`, training resumes from that network. Throws DivergenceDetected
/// on a non-finite loss.
TrainResult train_dqn(const ModelProvider& provider, const TrainConfig& config, const AttackHook& hook = {},
                      const MlpPolicy* initial = nullptr);

/// CSV with header `episode,reward,sliding100,epsilon`.
std::string training_csv(const std::vector<EpisodeRecord>& history);

}  // namespace pia
