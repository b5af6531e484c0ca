#include "pia/policy/policy.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "pia/common/error.hpp"
#include "pia/model/model_io.hpp"

namespace pia {

namespace {

constexpr const char* kMlpFormat = "pia-mlp-policy";
constexpr const char* kTableFormat = "pia-table-policy";

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

}  // namespace

TablePolicy::TablePolicy(FeatureSchema schema, ActionId default_action)
    : schema_(std::move(schema)), default_(default_action) {
    if (default_ >= schema_.num_actions()) throw ConfigError("default action out of range");
}

ActionId TablePolicy::act(const FactoredState& observation) const {
    const auto it = table_.find(observation);
    return it == table_.end() ? default_ : it->second;
}

void TablePolicy::set(const FactoredState& s, ActionId a) {
    schema_.check(s);
    if (a >= schema_.num_actions()) throw ConfigError("action id " + std::to_string(a) + " out of range");
    table_[s] = a;
}

MlpPolicy::MlpPolicy(FeatureSchema schema, const std::vector<std::size_t>& hidden, std::uint64_t seed)
    : schema_(std::move(schema)) {
    Rng rng(seed);
    std::size_t in = schema_.num_features();
    std::vector<std::size_t> sizes = hidden;
    sizes.push_back(schema_.num_actions());
    for (const std::size_t out : sizes) {
        if (out == 0) throw ShapeMismatch("layers need at least one unit");
        const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(in, 1)));
        std::uniform_real_distribution<double> u(-bound, bound);
        Eigen::MatrixXd w(out, in);
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = u(rng);
        }
        Eigen::VectorXd b(out);
        for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = u(rng);
        weights_.push_back(std::move(w));
        biases_.push_back(std::move(b));
        in = out;
    }
}

MlpPolicy::MlpPolicy(FeatureSchema schema, std::vector<Eigen::MatrixXd> weights, std::vector<Eigen::VectorXd> biases)
    : schema_(std::move(schema)), weights_(std::move(weights)), biases_(std::move(biases)) {
    check_shapes();
}

MlpPolicy MlpPolicy::zeros(FeatureSchema schema, const std::vector<std::size_t>& hidden) {
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;
    std::size_t in = schema.num_features();
    std::vector<std::size_t> sizes = hidden;
    sizes.push_back(schema.num_actions());
    for (const std::size_t out : sizes) {
        w.push_back(Eigen::MatrixXd::Zero(out, in));
        b.push_back(Eigen::VectorXd::Zero(out));
        in = out;
    }
    return MlpPolicy(std::move(schema), std::move(w), std::move(b));
}

void MlpPolicy::check_shapes() const {
    if (weights_.empty()) throw ShapeMismatch("network has no layers");
    if (weights_.size() != biases_.size()) throw ShapeMismatch("weight and bias layer counts differ");
    Eigen::Index in = static_cast<Eigen::Index>(schema_.num_features());
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        if (weights_[l].cols() != in || biases_[l].size() != weights_[l].rows() || weights_[l].rows() == 0) {
            throw ShapeMismatch("layer " + std::to_string(l) + " does not chain");
        }
        if (!weights_[l].allFinite() || !biases_[l].allFinite()) {
            throw ShapeMismatch("layer " + std::to_string(l) + " has non-finite parameters");
        }
        in = weights_[l].rows();
    }
    if (in != static_cast<Eigen::Index>(schema_.num_actions())) {
        throw ShapeMismatch("output layer has " + std::to_string(in) + " units for " +
                            std::to_string(schema_.num_actions()) + " actions");
    }
}

std::vector<std::size_t> MlpPolicy::layer_sizes() const {
    std::vector<std::size_t> out{schema_.num_features()};
    for (const auto& w : weights_) out.push_back(static_cast<std::size_t>(w.rows()));
    return out;
}

Eigen::VectorXd MlpPolicy::to_input(const FactoredState& s) const {
    if (s.size() != schema_.num_features()) {
        throw ShapeMismatch("state has " + std::to_string(s.size()) + " features, network expects " +
                            std::to_string(schema_.num_features()));
    }
    Eigen::VectorXd x(static_cast<Eigen::Index>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) x(static_cast<Eigen::Index>(i)) = s[i];
    return x;
}

Eigen::VectorXd MlpPolicy::forward(const Eigen::VectorXd& x) const {
    if (x.size() != static_cast<Eigen::Index>(schema_.num_features())) throw ShapeMismatch("input size mismatch");
    Eigen::VectorXd a = x;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Eigen::VectorXd z = weights_[l] * a + biases_[l];
        a = l + 1 < weights_.size() ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
    }
    return a;
}

Eigen::VectorXd MlpPolicy::forward(const FactoredState& s) const { return forward(to_input(s)); }

Eigen::MatrixXd MlpPolicy::forward_batch(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd a = x;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Eigen::MatrixXd z = (weights_[l] * a).colwise() + biases_[l];
        a = l + 1 < weights_.size() ? relu(z) : z;
    }
    return a;
}

ActionId MlpPolicy::act(const FactoredState& observation) const {
    const Eigen::VectorXd q = forward(observation);
    ActionId best = 0;
    for (Eigen::Index i = 1; i < q.size(); ++i) {
        if (q(i) > q(best)) best = static_cast<ActionId>(i);
    }
    return best;
}

ActionId MlpPolicy::act_among(const FactoredState& observation, const std::vector<ActionId>& allowed) const {
    const Eigen::VectorXd q = forward(observation);
    ActionId best = allowed.front();
    for (const ActionId a : allowed) {
        if (q(a) > q(best)) best = a;
    }
    return best;
}

Eigen::VectorXd MlpPolicy::input_gradient(const Eigen::VectorXd& x, ActionId a) const {
    if (a >= schema_.num_actions()) throw ShapeMismatch("action id out of range");
    if (x.size() != static_cast<Eigen::Index>(schema_.num_features())) throw ShapeMismatch("input size mismatch");
    std::vector<Eigen::VectorXd> pre;
    Eigen::VectorXd act = x;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        pre.push_back(weights_[l] * act + biases_[l]);
        act = l + 1 < weights_.size() ? Eigen::VectorXd(pre.back().cwiseMax(0.0)) : pre.back();
    }
    // dJ/dQ = softmax(Q) - onehot(a)
    const double m = act.maxCoeff();
    Eigen::VectorXd delta = (act.array() - m).exp();
    delta /= delta.sum();
    delta(a) -= 1.0;
    for (std::size_t l = weights_.size(); l-- > 0;) {
        if (l + 1 < weights_.size()) {
            for (Eigen::Index i = 0; i < delta.size(); ++i) {
                if (pre[l](i) <= 0.0) delta(i) = 0.0;
            }
        }
        delta = weights_[l].transpose() * delta;
    }
    return delta;
}

Eigen::VectorXd MlpPolicy::input_gradient(const FactoredState& s, ActionId a) const {
    return input_gradient(to_input(s), a);
}

void MlpPolicy::parameter_gradients(const Eigen::MatrixXd& x, const Eigen::MatrixXd& dq, Gradients& out) const {
    const std::size_t layers = weights_.size();
    std::vector<Eigen::MatrixXd> acts{x};
    std::vector<Eigen::MatrixXd> pre;
    for (std::size_t l = 0; l < layers; ++l) {
        pre.push_back((weights_[l] * acts.back()).colwise() + biases_[l]);
        if (l + 1 < layers) acts.push_back(relu(pre.back()));
    }
    out.weights.resize(layers);
    out.biases.resize(layers);
    Eigen::MatrixXd delta = dq;
    for (std::size_t l = layers; l-- > 0;) {
        out.weights[l].noalias() = delta * acts[l].transpose();
        out.biases[l] = delta.rowwise().sum();
        if (l == 0) break;
        Eigen::MatrixXd back = weights_[l].transpose() * delta;
        delta = back.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
}

bool MlpPolicy::operator==(const MlpPolicy& other) const {
    if (!(schema_ == other.schema_) || weights_.size() != other.weights_.size()) return false;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        if (weights_[l].rows() != other.weights_[l].rows() || weights_[l].cols() != other.weights_[l].cols()) {
            return false;
        }
        if (weights_[l] != other.weights_[l] || biases_[l] != other.biases_[l]) return false;
    }
    return true;
}

Eigen::VectorXd forward(const MlpPolicy& policy, const FactoredState& s) { return policy.forward(s); }
Eigen::VectorXd input_gradient(const MlpPolicy& policy, const FactoredState& s, ActionId a) {
    return policy.input_gradient(s, a);
}

nlohmann::json policy_to_json(const MlpPolicy& policy) {
    nlohmann::json j;
    j["format"] = kMlpFormat;
    j["version"] = 1;
    j["schema_hash"] = policy.schema().hash();
    j["schema"] = schema_to_json(policy.schema());
    j["activation"] = "relu";
    j["layers"] = policy.layer_sizes();
    nlohmann::json w = nlohmann::json::array();
    nlohmann::json b = nlohmann::json::array();
    for (std::size_t l = 0; l < policy.num_layers(); ++l) {
        const auto& m = policy.weights()[l];
        std::vector<double> flat;
        flat.reserve(static_cast<std::size_t>(m.size()));
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
        }
        w.push_back(flat);
        const auto& v = policy.biases()[l];
        b.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    }
    j["weights"] = std::move(w);
    j["biases"] = std::move(b);
    return j;
}

nlohmann::json policy_to_json(const TablePolicy& policy) {
    nlohmann::json j;
    j["format"] = kTableFormat;
    j["version"] = 1;
    j["schema_hash"] = policy.schema().hash();
    j["schema"] = schema_to_json(policy.schema());
    j["default_action"] = policy.default_action();
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [s, a] : policy.table()) entries.push_back({{"state", s.vector()}, {"action", a}});
    j["table"] = std::move(entries);
    return j;
}

namespace {

const nlohmann::json& field(const nlohmann::json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("policy file lacks \"") + key + "\"");
    return j.at(key);
}

FeatureSchema read_schema(const nlohmann::json& j) {
    FeatureSchema schema;
    try {
        schema = schema_from_json(field(j, "schema"));
    } catch (const FormatError&) {
        throw;
    } catch (const std::exception& e) {
        throw FormatError(std::string("bad schema in policy file: ") + e.what());
    }
    if (field(j, "schema_hash").get<std::string>() != schema.hash()) {
        throw FormatError("schema hash does not match the embedded schema");
    }
    return schema;
}

void expect_format(const nlohmann::json& j, const char* format) {
    const auto& f = field(j, "format");
    if (!f.is_string() || f.get<std::string>() != format) {
        throw FormatError(std::string("expected a ") + format + " document");
    }
}

}  // namespace

MlpPolicy mlp_policy_from_json(const nlohmann::json& j) {
    try {
        expect_format(j, kMlpFormat);
        FeatureSchema schema = read_schema(j);
        const auto sizes = field(j, "layers").get<std::vector<std::size_t>>();
        const auto& w = field(j, "weights");
        const auto& b = field(j, "biases");
        if (sizes.size() < 2 || w.size() != sizes.size() - 1 || b.size() != sizes.size() - 1) {
            throw FormatError("layer sizes disagree with parameter arrays");
        }
        std::vector<Eigen::MatrixXd> weights;
        std::vector<Eigen::VectorXd> biases;
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            const auto flat = w[l].get<std::vector<double>>();
            const auto bias = b[l].get<std::vector<double>>();
            const std::size_t rows = sizes[l + 1], cols = sizes[l];
            if (flat.size() != rows * cols || bias.size() != rows) {
                throw FormatError("layer " + std::to_string(l) + " has the wrong number of parameters");
            }
            Eigen::MatrixXd m(rows, cols);
            for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t c = 0; c < cols; ++c) {
                    m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = flat[r * cols + c];
                }
            }
            weights.push_back(std::move(m));
            biases.push_back(Eigen::Map<const Eigen::VectorXd>(bias.data(), static_cast<Eigen::Index>(rows)));
        }
        try {
            return MlpPolicy(std::move(schema), std::move(weights), std::move(biases));
        } catch (const ShapeMismatch& e) {
            throw FormatError(e.what());
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed policy file: ") + e.what());
    }
}

TablePolicy table_policy_from_json(const nlohmann::json& j) {
    try {
        expect_format(j, kTableFormat);
        FeatureSchema schema = read_schema(j);
        const auto& def = field(j, "default_action");
        ActionId d = 0;
        if (def.is_string()) {
            const auto id = schema.action_index(def.get<std::string>());
            if (!id) throw FormatError("unknown default action " + def.get<std::string>());
            d = *id;
        } else {
            d = def.get<ActionId>();
        }
        TablePolicy p(schema, d);
        for (const auto& e : field(j, "table")) {
            const FactoredState s(field(e, "state").get<std::vector<int>>());
            const auto& a = field(e, "action");
            ActionId id = 0;
            if (a.is_string()) {
                const auto found = schema.action_index(a.get<std::string>());
                if (!found) throw FormatError("unknown action " + a.get<std::string>());
                id = *found;
            } else {
                id = a.get<ActionId>();
            }
            p.set(s, id);
        }
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed policy file: ") + e.what());
    } catch (const ShapeMismatch& e) {
        throw FormatError(e.what());
    } catch (const ConfigError& e) {
        throw FormatError(e.what());
    }
}

std::string serialize_policy(const MlpPolicy& policy) { return policy_to_json(policy).dump(); }

namespace {

nlohmann::json parse_policy_text(const std::string& bytes) {
    try {
        return nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("policy is not valid JSON: ") + e.what());
    }
}

nlohmann::json read_policy_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open policy file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_policy_text(ss.str());
}

void check_expected(const nlohmann::json& j, const FeatureSchema* expected) {
    if (!expected) return;
    const auto& h = field(j, "schema_hash");
    if (!h.is_string() || h.get<std::string>() != expected->hash()) {
        throw SchemaMismatch("policy was trained on a different feature schema");
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text << '\n';
}

}  // namespace

MlpPolicy deserialize_policy(const std::string& bytes) { return mlp_policy_from_json(parse_policy_text(bytes)); }

std::unique_ptr<Policy> load_policy(const std::filesystem::path& path, const FeatureSchema* expected) {
    const nlohmann::json j = read_policy_file(path);
    check_expected(j, expected);
    const auto& f = field(j, "format");
    if (f == kTableFormat) return std::make_unique<TablePolicy>(table_policy_from_json(j));
    return std::make_unique<MlpPolicy>(mlp_policy_from_json(j));
}

MlpPolicy load_mlp_policy(const std::filesystem::path& path, const FeatureSchema* expected) {
    const nlohmann::json j = read_policy_file(path);
    check_expected(j, expected);
    return mlp_policy_from_json(j);
}

void save_policy(const MlpPolicy& policy, const std::filesystem::path& path) {
    write_text(path, policy_to_json(policy).dump());
}

void save_policy(const TablePolicy& policy, const std::filesystem::path& path) {
    write_text(path, policy_to_json(policy).dump(2));
}

FactoredState sample_successor(const Distribution& d, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double u = unit(rng);
    for (const auto& o : d) {
        if (u < o.prob) return o.state;
        u -= o.prob;
    }
    return d.back().state;
}

EpisodeOutcome run_episode(const ModelProvider& provider, const ActionChooser& choose, std::size_t max_steps,
                           double gamma, Rng& rng) {
    EpisodeOutcome out;
    FactoredState s = provider.initial_state();
    double discount = 1.0;
    while (out.steps < max_steps && !provider.is_terminal(s)) {
        const ActionId a = choose(s, rng);
        const double r = provider.reward(s, a);
        out.total_reward += r;
        out.discounted_return += discount * r;
        discount *= gamma;
        s = sample_successor(provider.transition(s, a), rng);
        ++out.steps;
    }
    return out;
}

ActionChooser policy_chooser(const Policy& policy, const AttackFn* attack) {
    return [&policy, attack](const FactoredState& s, Rng&) { return policy.act(attack ? attack->perturb(s) : s); };
}

ActionChooser random_chooser(const ModelProvider& provider) {
    return [&provider](const FactoredState& s, Rng& rng) {
        const auto acts = provider.available_actions(s);
        std::uniform_int_distribution<std::size_t> pick(0, acts.size() - 1);
        return acts[pick(rng)];
    };
}

}  // namespace pia
