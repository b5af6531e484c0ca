#include "pia/policy/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "pia/common/error.hpp"

namespace pia {

double TrainConfig::epsilon_at(std::uint64_t k) const {
    return std::max(epsilon_min, epsilon_start * std::pow(epsilon_decay, static_cast<double>(k)));
}

void TrainConfig::validate() const {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
    if (!(epsilon_decay > 0.0 && epsilon_decay < 1.0)) throw ConfigError("epsilon decay must lie in (0, 1)");
    if (batch == 0) throw ConfigError("batch size must be at least 1");
    if (neurons == 0 && hidden_layers > 0) throw ConfigError("hidden layers need at least one neuron");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (target_update == 0) throw ConfigError("target update period must be at least 1");
    if (replay_capacity < batch) throw ConfigError("replay capacity must hold at least one batch");
    if (max_steps == 0) throw ConfigError("episode step cap must be at least 1");
    if (epsilon_start < 0.0 || epsilon_start > 1.0 || epsilon_min < 0.0 || epsilon_min > 1.0) {
        throw ConfigError("exploration rates must lie in [0, 1]");
    }
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
    static const char* keys[] = {"hidden_layers", "neurons",       "learning_rate", "batch",
                                 "episodes",      "max_steps",     "gamma",         "epsilon_start",
                                 "epsilon_decay", "epsilon_min",   "target_update", "replay_capacity",
                                 "seed"};
    if (!j.is_object()) throw ConfigError("training config must be an object");
    for (const auto& [k, v] : j.items()) {
        if (std::find(std::begin(keys), std::end(keys), k) == std::end(keys)) {
            throw ConfigError("unknown training option \"" + k + "\"");
        }
        (void)v;
    }
    auto get = [&](const char* key, auto& out) {
        if (j.contains(key)) j.at(key).get_to(out);
    };
    get("hidden_layers", c.hidden_layers);
    get("neurons", c.neurons);
    get("learning_rate", c.learning_rate);
    get("batch", c.batch);
    get("episodes", c.episodes);
    get("max_steps", c.max_steps);
    get("gamma", c.gamma);
    get("epsilon_start", c.epsilon_start);
    get("epsilon_decay", c.epsilon_decay);
    get("epsilon_min", c.epsilon_min);
    get("target_update", c.target_update);
    get("replay_capacity", c.replay_capacity);
    get("seed", c.seed);
}

nlohmann::json to_json(const TrainConfig& c) {
    return {{"hidden_layers", c.hidden_layers}, {"neurons", c.neurons},
            {"learning_rate", c.learning_rate}, {"batch", c.batch},
            {"episodes", c.episodes},           {"max_steps", c.max_steps},
            {"gamma", c.gamma},                 {"epsilon_start", c.epsilon_start},
            {"epsilon_decay", c.epsilon_decay}, {"epsilon_min", c.epsilon_min},
            {"target_update", c.target_update}, {"replay_capacity", c.replay_capacity},
            {"seed", c.seed}};
}

namespace {

struct Transition {
    Eigen::VectorXd obs;
    ActionId action;
    double reward;
    Eigen::VectorXd next;
    bool terminal;
};

/// Fixed-capacity ring buffer.
class Replay {
public:
    explicit Replay(std::size_t capacity) : capacity_(capacity) { data_.reserve(std::min<std::size_t>(capacity, 1 << 16)); }
    void push(Transition t) {
        if (data_.size() < capacity_) {
            data_.push_back(std::move(t));
        } else {
            data_[head_] = std::move(t);
            head_ = (head_ + 1) % capacity_;
        }
    }
    std::size_t size() const { return data_.size(); }
    const Transition& operator[](std::size_t i) const { return data_[i]; }

private:
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::vector<Transition> data_;
};

struct Adam {
    double lr, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::uint64_t t = 0;
    std::vector<Eigen::MatrixXd> mw, vw;
    std::vector<Eigen::VectorXd> mb, vb;

    Adam(const MlpPolicy& net, double learning_rate) : lr(learning_rate) {
        for (std::size_t l = 0; l < net.num_layers(); ++l) {
            mw.push_back(Eigen::MatrixXd::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
            vw.push_back(mw.back());
            mb.push_back(Eigen::VectorXd::Zero(net.biases()[l].size()));
            vb.push_back(mb.back());
        }
    }

    void step(MlpPolicy& net, const MlpPolicy::Gradients& g) {
        ++t;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (std::size_t l = 0; l < net.num_layers(); ++l) {
            mw[l] = beta1 * mw[l] + (1.0 - beta1) * g.weights[l];
            vw[l] = beta2 * vw[l] + (1.0 - beta2) * g.weights[l].cwiseAbs2();
            net.weights()[l].array() -= lr * (mw[l].array() / c1) / ((vw[l].array() / c2).sqrt() + eps);
            mb[l] = beta1 * mb[l] + (1.0 - beta1) * g.biases[l];
            vb[l] = beta2 * vb[l] + (1.0 - beta2) * g.biases[l].cwiseAbs2();
            net.biases()[l].array() -= lr * (mb[l].array() / c1) / ((vb[l].array() / c2).sqrt() + eps);
        }
    }
};

Eigen::VectorXd as_input(const FactoredState& s) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) x(static_cast<Eigen::Index>(i)) = s[i];
    return x;
}

}  // namespace

TrainResult train_dqn(const ModelProvider& provider, const TrainConfig& config, const AttackHook& hook,
                      const MlpPolicy* initial) {
    config.validate();
    const FeatureSchema& schema = provider.schema();
    TrainResult result;
    if (initial) {
        if (!(initial->schema() == schema)) throw SchemaMismatch("initial network was built for another schema");
        result.policy = *initial;
    } else {
        result.policy = MlpPolicy(schema, std::vector<std::size_t>(config.hidden_layers, config.neurons), config.seed);
    }
    MlpPolicy& net = result.policy;
    MlpPolicy target = net;
    Adam adam(net, config.learning_rate);
    Replay replay(config.replay_capacity);
    Rng rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const auto batch = static_cast<Eigen::Index>(config.batch);
    const auto n_in = static_cast<Eigen::Index>(schema.num_features());
    const auto n_out = static_cast<Eigen::Index>(schema.num_actions());
    Eigen::MatrixXd xb(n_in, batch), xn(n_in, batch), dq(n_out, batch);
    MlpPolicy::Gradients grads;
    std::deque<double> window;
    double window_sum = 0.0;

    auto observe = [&](const FactoredState& s) { return hook ? hook(net, s) : s; };

    for (std::size_t episode = 0; episode < config.episodes; ++episode) {
        FactoredState s = provider.initial_state();
        FactoredState obs = observe(s);
        double total = 0.0;
        for (std::size_t step = 0; step < config.max_steps && !provider.is_terminal(s); ++step) {
            const auto actions = provider.available_actions(s);
            ActionId a;
            if (unit(rng) < config.epsilon_at(result.decisions)) {
                std::uniform_int_distribution<std::size_t> pick(0, actions.size() - 1);
                a = actions[pick(rng)];
            } else {
                a = net.act_among(obs, actions);
            }
            ++result.decisions;
            const double r = provider.reward(s, a);
            FactoredState next = sample_successor(provider.transition(s, a), rng);
            const bool terminal = provider.is_terminal(next);
            FactoredState next_obs = observe(next);
            replay.push({as_input(obs), a, r, as_input(next_obs), terminal});
            total += r;
            s = std::move(next);
            obs = std::move(next_obs);

            if (replay.size() < config.batch) continue;
            std::uniform_int_distribution<std::size_t> pick(0, replay.size() - 1);
            std::vector<std::size_t> idx(config.batch);
            for (Eigen::Index j = 0; j < batch; ++j) {
                idx[static_cast<std::size_t>(j)] = pick(rng);
                const Transition& t = replay[idx[static_cast<std::size_t>(j)]];
                xb.col(j) = t.obs;
                xn.col(j) = t.next;
            }
            const Eigen::MatrixXd q = net.forward_batch(xb);
            const Eigen::MatrixXd qn = target.forward_batch(xn);
            dq.setZero();
            double loss = 0.0;
            for (Eigen::Index j = 0; j < batch; ++j) {
                const Transition& t = replay[idx[static_cast<std::size_t>(j)]];
                const double y = t.reward + (t.terminal ? 0.0 : config.gamma * qn.col(j).maxCoeff());
                const double err = q(t.action, j) - y;
                loss += err * err;
                dq(t.action, j) = 2.0 * err / static_cast<double>(batch);
            }
            if (!std::isfinite(loss)) {
                throw DivergenceDetected("non-finite TD loss at episode " + std::to_string(episode));
            }
            net.parameter_gradients(xb, dq, grads);
            adam.step(net, grads);
            ++result.updates;
            if (result.updates % config.target_update == 0) target = net;
        }
        window.push_back(total);
        window_sum += total;
        if (window.size() > 100) {
            window_sum -= window.front();
            window.pop_front();
        }
        result.history.push_back(
            {episode, total, window_sum / static_cast<double>(window.size()), config.epsilon_at(result.decisions)});
    }
    return result;
}

std::string training_csv(const std::vector<EpisodeRecord>& history) {
    std::ostringstream os;
    os.precision(17);
    os << "episode,reward,sliding100,epsilon\n";
    for (const auto& r : history) os << r.episode << ',' << r.reward << ',' << r.sliding100 << ',' << r.epsilon << '\n';
    return os.str();
}

}  // namespace pia
