#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "pia/model/provider.hpp"

namespace pia {

/// Lookup-table policy with a default for unmapped observations.
class TablePolicy final : public Policy {
public:
    TablePolicy() = default;
    TablePolicy(FeatureSchema schema, ActionId default_action);

    ActionId act(const FactoredState& observation) const override;
    void set(const FactoredState& s, ActionId a);

    const FeatureSchema& schema() const noexcept { return schema_; }
    ActionId default_action() const noexcept { return default_; }
    const std::map<FactoredState, ActionId>& table() const noexcept { return table_; }

private:
    FeatureSchema schema_;
    ActionId default_ = 0;
    std::map<FactoredState, ActionId> table_;
};

/// Feed-forward Q-network: rectifier hidden layers, linear output layer.
/// Features enter as raw integers cast to double.
class MlpPolicy final : public Policy {
public:
    struct Gradients {
        std::vector<Eigen::MatrixXd> weights;
        std::vector<Eigen::VectorXd> biases;
    };

    MlpPolicy() = default;
    /// Uniform(+-1/sqrt(fan_in)) initialisation for weights and biases.
    MlpPolicy(FeatureSchema schema, const std::vector<std::size_t>& hidden, std::uint64_t seed);
    /// Explicit parameters; weights[l] is (out x in). Throws ShapeMismatch
    /// when the dimensions do not chain from the schema to the action count.
    MlpPolicy(FeatureSchema schema, std::vector<Eigen::MatrixXd> weights, std::vector<Eigen::VectorXd> biases);

    static MlpPolicy zeros(FeatureSchema schema, const std::vector<std::size_t>& hidden);

    const FeatureSchema& schema() const noexcept { return schema_; }
    std::vector<std::size_t> layer_sizes() const;
    std::size_t num_layers() const noexcept { return weights_.size(); }
    const std::vector<Eigen::MatrixXd>& weights() const noexcept { return weights_; }
    const std::vector<Eigen::VectorXd>& biases() const noexcept { return biases_; }
    std::vector<Eigen::MatrixXd>& weights() noexcept { return weights_; }
    std::vector<Eigen::VectorXd>& biases() noexcept { return biases_; }

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
    Eigen::VectorXd forward(const FactoredState& s) const;
    /// Column-wise forward pass over a batch (features x batch).
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x) const;

    /// argmax Q with the lowest action id winning ties.
    ActionId act(const FactoredState& observation) const override;
    /// Like act, restricted to `allowed` (nonempty, ascending).
    ActionId act_among(const FactoredState& observation, const std::vector<ActionId>& allowed) const;

    /// Gradient of J(s, a) = logsumexp(Q(s)) - Q_a(s), the cross-entropy between
    /// softmax(Q) and the one-hot vector of a, with respect to the input.
    Eigen::VectorXd input_gradient(const Eigen::VectorXd& x, ActionId a) const;
    Eigen::VectorXd input_gradient(const FactoredState& s, ActionId a) const;

    /// Parameter gradients of sum_j <dq_j, Q(x_j)> for a batch.
    void parameter_gradients(const Eigen::MatrixXd& x, const Eigen::MatrixXd& dq, Gradients& out) const;

    bool operator==(const MlpPolicy& other) const;

private:
    void check_shapes() const;
    Eigen::VectorXd to_input(const FactoredState& s) const;

    FeatureSchema schema_;
    std::vector<Eigen::MatrixXd> weights_;
    std::vector<Eigen::VectorXd> biases_;
};

Eigen::VectorXd forward(const MlpPolicy& policy, const FactoredState& s);
Eigen::VectorXd input_gradient(const MlpPolicy& policy, const FactoredState& s, ActionId a);

nlohmann::json policy_to_json(const MlpPolicy& policy);
nlohmann::json policy_to_json(const TablePolicy& policy);
/// Throws FormatError on malformed documents.
MlpPolicy mlp_policy_from_json(const nlohmann::json& j);
TablePolicy table_policy_from_json(const nlohmann::json& j);

std::string serialize_policy(const MlpPolicy& policy);
MlpPolicy deserialize_policy(const std::string& bytes);

/// Loads either policy kind from a file. When `expected` is given, a schema
/// hash that differs from it throws SchemaMismatch.
std::unique_ptr<Policy> load_policy(const std::filesystem::path& path, const FeatureSchema* expected = nullptr);
MlpPolicy load_mlp_policy(const std::filesystem::path& path, const FeatureSchema* expected = nullptr);
void save_policy(const MlpPolicy& policy, const std::filesystem::path& path);
void save_policy(const TablePolicy& policy, const std::filesystem::path& path);

using Rng = std::mt19937_64;

/// Samples a successor from a distribution.
FactoredState sample_successor(const Distribution& d, Rng& rng);

using ActionChooser = std::function<ActionId(const FactoredState& state, Rng& rng)>;

struct EpisodeOutcome {
    double discounted_return = 0.0;
    double total_reward = 0.0;
    std::size_t steps = 0;
};

/// Runs one episode from the initial state until a terminal state or
/// `max_steps` decisions.
EpisodeOutcome run_episode(const ModelProvider& provider, const ActionChooser& choose, std::size_t max_steps,
                           double gamma, Rng& rng);

/// Chooser that queries `policy` on `attack->perturb(s)` (or s).
ActionChooser policy_chooser(const Policy& policy, const AttackFn* attack = nullptr);
/// Uniformly random over available actions.
ActionChooser random_chooser(const ModelProvider& provider);

}  // namespace pia
