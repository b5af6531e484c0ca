#include "pia/attack/attack.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <regex>
#include <sstream>
#include <thread>

#include "pia/common/error.hpp"

namespace pia {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Runs job(i) for i in [0, n) on up to `jobs` threads.
template <class Job>
void fan_out(std::size_t n, std::size_t jobs, Job job) {
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < jobs; ++w) {
        threads.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) job(i);
        });
    }
    for (auto& t : threads) t.join();
}

struct Checked {
    pctl::CheckResult result;
    std::size_t states = 0;
};

Checked check_chain(const ModelProvider& provider, const Policy& policy, const AttackFn* attack,
                    const pctl::Query& query, const ImpactOptions& options) {
    const ExplicitModel dtmc = induce_dtmc(provider, policy, attack, options.build);
    return {pctl::check(dtmc, query, options.check), dtmc.num_states()};
}

double bracket_width(const pctl::CheckResult& r) { return r.bracket ? r.bracket->upper - r.bracket->lower : 0.0; }

PiResult combine(const Checked& clean, const Checked& attacked) {
    PiResult out;
    out.r = clean.result.value;
    out.r_adv = attacked.result.value;
    out.pi = std::abs(out.r - out.r_adv);
    out.engine = clean.result.engine;
    out.approximate = clean.result.engine == pctl::FragmentClass::Statistical;
    out.bracket_width = bracket_width(clean.result) + bracket_width(attacked.result);
    out.clean_states = clean.states;
    out.attacked_states = attacked.states;
    return out;
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

bool within_budget(const FactoredState& s, const FactoredState& observation, int epsilon) {
    return s.size() == observation.size() && s.linf_distance(observation) <= epsilon;
}

FactoredState fgsm_perturb(const MlpPolicy& policy, const FactoredState& s, int epsilon,
                           std::optional<std::size_t> feature) {
    if (epsilon < 0) throw ConfigError("epsilon must be nonnegative");
    const FeatureSchema& schema = policy.schema();
    schema.check(s);
    if (feature && *feature >= schema.num_features()) throw ConfigError("feature index out of range");
    if (epsilon == 0) return s;
    const Eigen::VectorXd g = policy.input_gradient(s, policy.act(s));
    FactoredState out = s;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (feature && i != *feature) continue;
        const double gi = g(static_cast<Eigen::Index>(i));
        if (gi > 0.0) out[i] += epsilon;
        if (gi < 0.0) out[i] -= epsilon;
    }
    return schema.clip(std::move(out));
}

FgsmAttack::FgsmAttack(const MlpPolicy& policy, int epsilon, std::optional<std::size_t> feature)
    : policy_(&policy), epsilon_(epsilon), feature_(feature) {
    if (epsilon < 0) throw ConfigError("epsilon must be nonnegative");
    if (feature && *feature >= policy.schema().num_features()) throw ConfigError("feature index out of range");
}

FactoredState FgsmAttack::perturb(const FactoredState& s) const { return fgsm_perturb(*policy_, s, epsilon_, feature_); }

FixedOffsetAttack::FixedOffsetAttack(FeatureSchema schema, std::vector<int> offsets, int epsilon)
    : schema_(std::move(schema)), offsets_(std::move(offsets)), epsilon_(epsilon) {
    if (epsilon < 0) throw ConfigError("epsilon must be nonnegative");
    if (offsets_.size() != schema_.num_features()) throw ConfigError("offset vector length differs from schema");
    for (const int o : offsets_) {
        if (std::abs(o) > epsilon) throw ConfigError("offset exceeds the attack budget");
    }
}

FactoredState FixedOffsetAttack::perturb(const FactoredState& s) const {
    FactoredState out = s;
    for (std::size_t i = 0; i < s.size(); ++i) out[i] += offsets_[i];
    return schema_.clip(std::move(out));
}

TableAttack::TableAttack(FeatureSchema schema, int epsilon) : schema_(std::move(schema)), epsilon_(epsilon) {
    if (epsilon < 0) throw ConfigError("epsilon must be nonnegative");
}

void TableAttack::set(const FactoredState& s, const FactoredState& observation) {
    if (!schema_.contains(s) || !schema_.contains(observation)) throw ConfigError("attack entry outside the domains");
    if (!within_budget(s, observation, epsilon_)) {
        throw ConfigError("attack entry at " + to_string(s) + " exceeds epsilon " + std::to_string(epsilon_));
    }
    table_[s] = observation;
}

FactoredState TableAttack::perturb(const FactoredState& s) const {
    const auto it = table_.find(s);
    return it == table_.end() ? s : it->second;
}

std::vector<FactoredState> enumerate_attack_set(const FactoredState& s, std::size_t feature, int epsilon,
                                                const FeatureSchema& schema) {
    if (feature >= schema.num_features()) throw ConfigError("feature index out of range");
    if (epsilon < 0) throw ConfigError("epsilon must be nonnegative");
    const Feature& f = schema.feature(feature);
    std::vector<FactoredState> out{s};
    for (int k = 1; k <= epsilon; ++k) {
        for (const int sign : {-1, 1}) {
            const int v = s[feature] + sign * k;
            if (v < f.lo || v > f.hi) continue;
            FactoredState d = s;
            d[feature] = v;
            out.push_back(std::move(d));
        }
    }
    return out;
}

PiResult compute_pi(const ModelProvider& provider, const Policy& policy, const pctl::Query& query,
                    const AttackFn& attack, const ImpactOptions& options) {
    const auto t0 = Clock::now();
    const Checked clean = check_chain(provider, policy, nullptr, query, options);
    const Checked attacked = check_chain(provider, policy, &attack, query, options);
    PiResult out = combine(clean, attacked);
    out.feature = "*";
    out.epsilon = attack.epsilon();
    out.seconds = seconds_since(t0);
    return out;
}

PiResult compute_pi(const ModelProvider& provider, const MlpPolicy& policy, const pctl::Query& query,
                    std::size_t feature, int epsilon, const ImpactOptions& options) {
    const FgsmAttack attack(policy, epsilon, feature);
    PiResult out = compute_pi(provider, policy, query, attack, options);
    out.feature = provider.schema().feature(feature).name;
    out.feature_index = feature;
    return out;
}

PiResult compute_fgsm_impact(const ModelProvider& provider, const MlpPolicy& policy, const pctl::Query& query,
                             int epsilon, const ImpactOptions& options) {
    const FgsmAttack attack(policy, epsilon);
    return compute_pi(provider, policy, query, attack, options);
}

std::vector<double> normalize_map(const std::vector<double>& values) {
    double hi = 0.0;
    for (const double v : values) hi = std::max(hi, v);
    std::vector<double> out(values.size(), 0.0);
    if (hi > 0.0) {
        for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] / hi;
    }
    return out;
}

PiMap compute_pi_map(const ModelProvider& provider, const MlpPolicy& policy, const pctl::Query& query, int epsilon,
                     const ImpactOptions& options) {
    const FeatureSchema& schema = provider.schema();
    const Checked clean = check_chain(provider, policy, nullptr, query, options);
    PiMap map;
    map.entries.resize(schema.num_features());
    fan_out(schema.num_features(), options.jobs, [&](std::size_t i) {
        const auto t0 = Clock::now();
        PiResult& e = map.entries[i];
        try {
            const FgsmAttack attack(policy, epsilon, i);
            e = combine(clean, check_chain(provider, policy, &attack, query, options));
        } catch (const std::exception& ex) {
            e = PiResult{};
            e.r = clean.result.value;
            e.r_adv = clean.result.value;
            e.error = ex.what();
        }
        e.feature = schema.feature(i).name;
        e.feature_index = i;
        e.epsilon = epsilon;
        e.seconds = seconds_since(t0);
    });
    std::vector<double> pis;
    for (const auto& e : map.entries) pis.push_back(e.pi);
    map.normalized = normalize_map(pis);
    return map;
}

std::size_t select_pia_index(const PiMap& map) {
    if (map.entries.empty()) throw ConfigError("empty property impact map");
    std::size_t best = 0;
    for (std::size_t i = 1; i < map.entries.size(); ++i) {
        if (map.entries[i].pi > map.entries[best].pi) best = i;
    }
    return best;
}

std::string select_pia_feature(const PiMap& map) { return map.entries[select_pia_index(map)].feature; }

SriResult estimate_sri(const ModelProvider& provider, const MlpPolicy& policy, std::size_t feature, int epsilon,
                       const SriOptions& options) {
    if (options.episodes == 0) throw ConfigError("SRI needs at least one episode");
    const FgsmAttack attack(policy, epsilon, feature);
    const ActionChooser clean = policy_chooser(policy);
    const ActionChooser attacked = policy_chooser(policy, &attack);
    double clean_sum = 0.0, attacked_sum = 0.0;
    for (std::size_t i = 0; i < options.episodes; ++i) {
        const std::uint64_t lo = options.seed & 0xffffffffu, hi = options.seed >> 32;
        std::seed_seq seq{static_cast<std::uint32_t>(lo), static_cast<std::uint32_t>(hi),
                          static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
        Rng rng_clean(seq);
        Rng rng_attacked = rng_clean;
        clean_sum += run_episode(provider, clean, options.max_steps, options.gamma, rng_clean).discounted_return;
        attacked_sum +=
            run_episode(provider, attacked, options.max_steps, options.gamma, rng_attacked).discounted_return;
    }
    SriResult out;
    out.feature = provider.schema().feature(feature).name;
    out.feature_index = feature;
    out.epsilon = epsilon;
    out.episodes = options.episodes;
    out.seed = options.seed;
    const auto n = static_cast<double>(options.episodes);
    out.clean_mean = clean_sum / n;
    out.attacked_mean = attacked_sum / n;
    out.drop = out.clean_mean - out.attacked_mean;
    return out;
}

SriMap compute_sri_map(const ModelProvider& provider, const MlpPolicy& policy, int epsilon, const SriOptions& options) {
    SriMap map;
    const std::size_t n = provider.schema().num_features();
    map.entries.resize(n);
    fan_out(n, options.jobs, [&](std::size_t i) { map.entries[i] = estimate_sri(provider, policy, i, epsilon, options); });
    std::vector<double> mags;
    for (const auto& e : map.entries) mags.push_back(std::abs(e.drop));
    map.normalized = normalize_map(mags);
    return map;
}

std::string pi_map_csv(const PiMap& map) {
    std::ostringstream os;
    os << "feature,pi,r,r_adv,normalized\n";
    for (std::size_t i = 0; i < map.entries.size(); ++i) {
        const auto& e = map.entries[i];
        os << e.feature << ',' << format_double(e.pi) << ',' << format_double(e.r) << ',' << format_double(e.r_adv)
           << ',' << format_double(map.normalized[i]) << '\n';
    }
    return os.str();
}

std::string sri_map_csv(const SriMap& map) {
    std::ostringstream os;
    os << "feature,sri,clean,attacked,normalized\n";
    for (std::size_t i = 0; i < map.entries.size(); ++i) {
        const auto& e = map.entries[i];
        os << e.feature << ',' << format_double(e.drop) << ',' << format_double(e.clean_mean) << ','
           << format_double(e.attacked_mean) << ',' << format_double(map.normalized[i]) << '\n';
    }
    return os.str();
}

std::string grid_csv(const FeatureSchema& schema, const std::vector<double>& values) {
    static const std::regex cell(R"(cell_(\d+)_(\d+))");
    std::map<std::pair<int, int>, double> cells;
    int rows = 0, cols = 0;
    for (std::size_t i = 0; i < schema.num_features() && i < values.size(); ++i) {
        std::smatch m;
        const std::string& name = schema.feature(i).name;
        if (!std::regex_match(name, m, cell)) continue;
        const int r = std::stoi(m[1]), c = std::stoi(m[2]);
        cells[{r, c}] = values[i];
        rows = std::max(rows, r + 1);
        cols = std::max(cols, c + 1);
    }
    if (cells.empty()) return {};
    std::ostringstream os;
    os << "lane";
    for (int c = 0; c < cols; ++c) os << ",col" << c;
    os << '\n';
    for (int r = 0; r < rows; ++r) {
        if (std::none_of(cells.begin(), cells.end(), [&](const auto& kv) { return kv.first.first == r; })) continue;
        os << r;
        for (int c = 0; c < cols; ++c) {
            const auto it = cells.find({r, c});
            os << ',' << (it == cells.end() ? std::string() : format_double(it->second));
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace pia
