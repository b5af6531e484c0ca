#include "pia/cli/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "pia/attack/attack.hpp"
#include "pia/common/error.hpp"
#include "pia/env/environments.hpp"
#include "pia/model/builder.hpp"
#include "pia/model/model_io.hpp"
#include "pia/pctl/checker.hpp"
#include "pia/pctl/parser.hpp"
#include "pia/policy/dqn.hpp"
#include "pia/robustness/robustness.hpp"

namespace pia::cli {

using nlohmann::json;
namespace fs = std::filesystem;

const std::map<std::string, std::string>& property_registry() {
    static const std::map<std::string, std::string> registry{
        {"deadlock1", R"(P=? [ fuel>=4 U (G (jobs=1 & !"empty" & "pass")) ])"},
        {"deadlock2", R"(P=? [ fuel>=4 U (G (jobs=1 & !"empty" & !"pass")) ])"},
        {"station_empty", R"(P=? [ ((jobs=0 U (x=1 & y=2)) U (jobs=0 & !(x=1 & y=2))) U ("empty" & jobs=0) ])"},
        {"station_empty_bar", R"(P=? [ (F ("empty" & jobs=0)) & (G !(x!=1 & y!=2)) ])"},
        {"pass_empty", R"(P=? [ F ("empty" & "pass") ])"},
        {"pass_empty_bar", R"(P=? [ F ("empty" & !"pass") ])"},
        {"crossed", R"(P=? [ F "crossed" ])"},
        {"collision", R"(P=? [ F<=100 "collision" ])"},
        {"blackout", R"(P=? [ F<=100 "blackout" ])"},
        {"bankruptcy", R"(P=? [ F "bankruptcy" ])"},
    };
    return registry;
}

std::string resolve_property(const std::string& name_or_text) {
    const auto& reg = property_registry();
    const auto it = reg.find(name_or_text);
    return it == reg.end() ? name_or_text : it->second;
}

int exit_code_for(const std::exception& e) {
    if (const auto* pe = dynamic_cast<const Error*>(&e)) {
        switch (pe->category()) {
            case ErrorCategory::Config: return 2;
            case ErrorCategory::Unsupported: return 3;
            case ErrorCategory::ResourceCap: return 4;
            default: return 1;
        }
    }
    if (dynamic_cast<const json::exception*>(&e)) return 2;
    return 1;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Global {
    std::uint64_t seed = 128;
    std::size_t jobs = 1;
    double tol = 1e-9;
    std::string out = ".";
    std::string env;
    std::string env_config;
    std::string preset;
    std::string model;
    std::string policy;
    std::size_t horizon = 1000;
    std::size_t samples = 10000;
    double confidence = 0.95;
    std::size_t state_cap = 5'000'000;
};

struct Setup {
    std::unique_ptr<ModelProvider> provider;
    json source;  // how the provider was obtained
    std::string env_name;
};

json parse_inline_or_file(const std::string& text) {
    if (text.empty()) return json::object();
    const auto first = text.find_first_not_of(" \t\n");
    if (first != std::string::npos && text[first] == '{') {
        try {
            return json::parse(text);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("environment config is not valid JSON: ") + e.what());
        }
    }
    return read_json_file(text);
}

Setup load_setup(const Global& g) {
    Setup s;
    if (g.env.empty() == g.model.empty()) throw ConfigError("give exactly one of --env or --model");
    if (!g.model.empty()) {
        s.provider = std::make_unique<ExplicitModelProvider>(load_explicit_model(g.model));
        s.source = {{"model", g.model}};
        return s;
    }
    json cfg = json::object();
    if (!g.preset.empty()) {
        if (g.env == "taxi" && g.preset == "reduced") {
            cfg = env::to_json(env::TaxiConfig::reduced());
        } else if (g.env == "freeway" && g.preset == "mini") {
            cfg = env::to_json(env::FreewayConfig::mini());
        } else {
            throw ConfigError("unknown preset \"" + g.preset + "\" for environment " + g.env);
        }
    }
    cfg.merge_patch(parse_inline_or_file(g.env_config));
    s.provider = env::make_environment(g.env, cfg);
    s.env_name = g.env;
    s.source = {{"env", g.env}, {"config", env::resolved_config(g.env, cfg)}};
    return s;
}

pctl::CheckOptions check_options(const Global& g) {
    pctl::CheckOptions o;
    o.tolerance = g.tol;
    o.statistical.samples = g.samples;
    o.statistical.horizon = g.horizon;
    o.statistical.confidence = g.confidence;
    o.statistical.seed = g.seed;
    o.statistical.jobs = g.jobs;
    return o;
}

BuildOptions build_options(const Global& g) {
    BuildOptions b;
    b.state_cap = g.state_cap;
    return b;
}

pctl::Query parse_property(const std::string& prop) {
    if (prop.empty()) throw ConfigError("--prop is required");
    return pctl::parse_formula(resolve_property(prop));
}

std::size_t feature_index(const FeatureSchema& schema, const std::string& name) {
    return schema.require_feature(name);
}

fs::path output_dir(const Global& g) {
    fs::path dir(g.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + g.out);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json run_record(const std::string& command, const Global& g, const Setup& setup, json extra) {
    json j = {{"command", command},
              {"version", kVersion},
              {"seed", g.seed},
              {"jobs", g.jobs},
              {"tolerance", g.tol},
              {"source", setup.source},
              {"statistical", {{"horizon", g.horizon}, {"samples", g.samples}, {"confidence", g.confidence}}},
              {"state_cap", g.state_cap}};
    if (!g.policy.empty()) j["policy"] = g.policy;
    for (auto& [k, v] : extra.items()) j[k] = v;
    return j;
}

void finish(const fs::path& dir, const json& run, const json& timings) {
    write_json(dir / "run.json", run);
    write_json(dir / "timings.json", timings);
}

json bracket_json(const std::optional<pctl::Bracket>& b) {
    if (!b) return nullptr;
    return {{"lower", b->lower},     {"upper", b->upper},     {"confidence", b->confidence},
            {"n_true", b->n_true},   {"n_false", b->n_false}, {"n_unknown", b->n_unknown}};
}

json pi_json(const PiResult& r) {
    json j = {{"feature", r.feature},
              {"epsilon", r.epsilon},
              {"r", r.r},
              {"r_adv", r.r_adv},
              {"pi", r.pi},
              {"engine", pctl::to_string(r.engine)},
              {"approximate", r.approximate},
              {"bracket_width", r.bracket_width},
              {"clean_states", r.clean_states},
              {"attacked_states", r.attacked_states}};
    if (r.error) j["error"] = *r.error;
    return j;
}

std::unique_ptr<Policy> require_policy(const Global& g, const ModelProvider& provider) {
    if (g.policy.empty()) throw ConfigError("--policy is required");
    return load_policy(g.policy, &provider.schema());
}

MlpPolicy require_network(const Global& g, const ModelProvider& provider) {
    if (g.policy.empty()) throw ConfigError("--policy is required");
    return load_mlp_policy(g.policy, &provider.schema());
}

std::string fmt_prob(double v) { return fmt::format("{:.10g}", v); }

// ---------------------------------------------------------------- commands

struct TrainArgs {
    std::size_t episodes = 1000;
    std::string train_config;
    std::string resume;
    std::string adv_feature;
    int adv_epsilon = 1;
    CLI::App* cmd = nullptr;
    TrainConfig flags;
};

int cmd_train(const Global& g, TrainArgs& a, std::ostream& out) {
    const Setup setup = load_setup(g);
    const ModelProvider& p = *setup.provider;
    TrainConfig cfg;
    if (setup.env_name == "freeway" || setup.env_name == "collision") cfg.epsilon_decay = 0.9999;
    if (!a.train_config.empty()) from_json(read_json_file(a.train_config), cfg);
    const auto set = [&](const char* name) { return a.cmd->get_option(name)->count() > 0; };
    if (set("--episodes") || a.train_config.empty()) cfg.episodes = a.episodes;
    if (set("--max-steps")) cfg.max_steps = a.flags.max_steps;
    if (set("--hidden-layers")) cfg.hidden_layers = a.flags.hidden_layers;
    if (set("--neurons")) cfg.neurons = a.flags.neurons;
    if (set("--lr")) cfg.learning_rate = a.flags.learning_rate;
    if (set("--batch")) cfg.batch = a.flags.batch;
    if (set("--gamma")) cfg.gamma = a.flags.gamma;
    if (set("--epsilon-start")) cfg.epsilon_start = a.flags.epsilon_start;
    if (set("--epsilon-decay")) cfg.epsilon_decay = a.flags.epsilon_decay;
    if (set("--epsilon-min")) cfg.epsilon_min = a.flags.epsilon_min;
    if (set("--target-update")) cfg.target_update = a.flags.target_update;
    if (set("--replay")) cfg.replay_capacity = a.flags.replay_capacity;
    cfg.seed = g.seed;

    std::optional<MlpPolicy> initial;
    if (!a.resume.empty()) initial = load_mlp_policy(a.resume, &p.schema());

    AttackHook hook;
    json adv = nullptr;
    if (!a.adv_feature.empty()) {
        const std::size_t f = feature_index(p.schema(), a.adv_feature);
        if (a.adv_epsilon < 0) throw ConfigError("--adv-epsilon must be nonnegative");
        const int eps = a.adv_epsilon;
        hook = [f, eps](const MlpPolicy& net, const FactoredState& s) { return fgsm_perturb(net, s, eps, f); };
        adv = {{"feature", a.adv_feature}, {"epsilon", eps}};
    }
    const auto t0 = Clock::now();
    const TrainResult res = train_dqn(p, cfg, hook, initial ? &*initial : nullptr);
    const double secs = seconds_since(t0);

    const fs::path dir = output_dir(g);
    save_policy(res.policy, dir / "policy.json");
    write_text(dir / "training.csv", training_csv(res.history));
    const double last = res.history.empty() ? 0.0 : res.history.back().sliding100;
    double best = res.history.empty() ? 0.0 : res.history.front().sliding100;
    for (const auto& h : res.history) best = std::max(best, h.sliding100);
    json run = run_record("train", g, setup,
                          {{"train_config", to_json(cfg)},
                           {"resume", a.resume.empty() ? json(nullptr) : json(a.resume)},
                           {"adversarial", adv},
                           {"result",
                            {{"decisions", res.decisions},
                             {"updates", res.updates},
                             {"final_sliding100", last},
                             {"best_sliding100", best}}}});
    finish(dir, run, {{"train", secs}});
    out << fmt::format("trained {} episodes ({} updates); sliding-100 reward final {:.4f}, best {:.4f}\n",
                       cfg.episodes, res.updates, last, best);
    return 0;
}

int cmd_check(const Global& g, const std::string& prop, std::ostream& out) {
    const Setup setup = load_setup(g);
    const ModelProvider& p = *setup.provider;
    const pctl::Query q = parse_property(prop);
    const auto t0 = Clock::now();
    ExplicitModel model;
    if (!g.policy.empty()) {
        const auto policy = require_policy(g, p);
        model = induce_dtmc(p, *policy, nullptr, build_options(g));
    } else {
        model = explore_model(p, build_options(g));
    }
    const double build_secs = seconds_since(t0);
    const auto t1 = Clock::now();
    const pctl::CheckResult r = pctl::check(model, q, check_options(g));
    const double check_secs = seconds_since(t1);

    json result = {{"formula", pctl::to_string(q)},
                   {"value", r.value},
                   {"engine", pctl::to_string(r.engine)},
                   {"satisfied", r.satisfied ? json(*r.satisfied) : json(nullptr)},
                   {"bracket", bracket_json(r.bracket)},
                   {"iterations", r.iterations},
                   {"residual", r.residual},
                   {"model", {{"kind", to_string(model.kind)},
                              {"states", model.num_states()},
                              {"choices", model.num_choices()},
                              {"transitions", model.num_transitions()}}}};
    const fs::path dir = output_dir(g);
    write_json(dir / "check.json", result);
    finish(dir, run_record("check", g, setup, {{"formula", pctl::to_string(q)}}),
           {{"build", build_secs}, {"check", check_secs}});
    out << fmt::format("value={} engine={}", fmt_prob(r.value), pctl::to_string(r.engine));
    if (r.bracket) out << fmt::format(" bracket=[{},{}]", fmt_prob(r.bracket->lower), fmt_prob(r.bracket->upper));
    if (r.satisfied) out << " satisfied=" << (*r.satisfied ? "true" : "false");
    out << '\n';
    return 0;
}

json map_entries(const PiMap& m) {
    json arr = json::array();
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
        json e = pi_json(m.entries[i]);
        e["normalized"] = m.normalized[i];
        arr.push_back(std::move(e));
    }
    return arr;
}

json pi_timings(const PiMap& m) {
    json t = json::object();
    for (const auto& e : m.entries) t[e.feature] = e.seconds;
    return t;
}

int cmd_pi_map(const Global& g, const std::string& prop, int epsilon, std::ostream& out) {
    const Setup setup = load_setup(g);
    const ModelProvider& p = *setup.provider;
    const pctl::Query q = parse_property(prop);
    const MlpPolicy policy = require_network(g, p);
    ImpactOptions opt{check_options(g), build_options(g), g.jobs};
    const auto t0 = Clock::now();
    const PiMap m = compute_pi_map(p, policy, q, epsilon, opt);
    const double secs = seconds_since(t0);
    const fs::path dir = output_dir(g);
    write_text(dir / "pi_map.csv", pi_map_csv(m));
    const std::string grid = grid_csv(p.schema(), m.normalized);
    if (!grid.empty()) write_text(dir / "pi_grid.csv", grid);
    write_json(dir / "pi_map.json", {{"formula", pctl::to_string(q)}, {"epsilon", epsilon}, {"entries", map_entries(m)}});
    finish(dir, run_record("pi-map", g, setup, {{"formula", pctl::to_string(q)}, {"epsilon", epsilon}}),
           {{"total", secs}, {"features", pi_timings(m)}});
    out << fmt::format("most impactful feature: {} (pi={})\n", select_pia_feature(m),
                       fmt_prob(m.entries[select_pia_index(m)].pi));
    return 0;
}

int cmd_sri_map(const Global& g, int epsilon, const SriOptions& base, std::ostream& out) {
    const Setup setup = load_setup(g);
    const ModelProvider& p = *setup.provider;
    const MlpPolicy policy = require_network(g, p);
    SriOptions o = base;
    o.seed = g.seed;
    o.jobs = g.jobs;
    const auto t0 = Clock::now();
    const SriMap m = compute_sri_map(p, policy, epsilon, o);
    const double secs = seconds_since(t0);
    const fs::path dir = output_dir(g);
    write_text(dir / "sri_map.csv", sri_map_csv(m));
    const std::string grid = grid_csv(p.schema(), m.normalized);
    if (!grid.empty()) write_text(dir / "sri_grid.csv", grid);
    json entries = json::array();
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
        const auto& e = m.entries[i];
        entries.push_back({{"feature", e.feature},
                           {"sri", e.drop},
                           {"clean", e.clean_mean},
                           {"attacked", e.attacked_mean},
                           {"normalized", m.normalized[i]}});
    }
    write_json(dir / "sri_map.json", {{"epsilon", epsilon}, {"episodes", o.episodes}, {"entries", entries}});
    finish(dir,
           run_record("sri-map", g, setup,
                      {{"epsilon", epsilon},
                       {"episodes", o.episodes},
                       {"gamma", o.gamma},
                       {"max_steps", o.max_steps}}),
           {{"total", secs}});
    std::size_t best = 0;
    for (std::size_t i = 1; i < m.entries.size(); ++i) {
        if (m.normalized[i] > m.normalized[best]) best = i;
    }
    out << fmt::format("largest reward impact: {} (drop={:.6g})\n", m.entries[best].feature, m.entries[best].drop);
    return 0;
}

int cmd_attack(const Global& g, const std::string& prop, int epsilon, const std::string& baseline, std::ostream& out) {
    const Setup setup = load_setup(g);
    const ModelProvider& p = *setup.provider;
    const pctl::Query q = parse_property(prop);
    const MlpPolicy policy = require_network(g, p);
    if (!baseline.empty() && baseline != "fgsm") throw ConfigError("unknown baseline \"" + baseline + "\"");
    ImpactOptions opt{check_options(g), build_options(g), g.jobs};
    const auto t0 = Clock::now();
    const PiMap m = compute_pi_map(p, policy, q, epsilon, opt);
    const std::size_t pick = select_pia_index(m);
    const PiResult& chosen = m.entries[pick];
    const double pia_secs = seconds_since(t0);
    json result = {{"formula", pctl::to_string(q)},
                   {"epsilon", epsilon},
                   {"selected_feature", chosen.feature},
                   {"r", chosen.r},
                   {"r_adv", chosen.r_adv},
                   {"impact", chosen.pi},
                   {"engine", pctl::to_string(chosen.engine)},
                   {"approximate", chosen.approximate},
                   {"pi_map", map_entries(m)}};
    json timings = {{"pia", pia_secs}, {"features", pi_timings(m)}};
    out << fmt::format("PIA feature {}: r={} r_adv={} impact={}\n", chosen.feature, fmt_prob(chosen.r),
                       fmt_prob(chosen.r_adv), fmt_prob(chosen.pi));
    if (baseline == "fgsm") {
        const auto t1 = Clock::now();
        const PiResult b = compute_fgsm_impact(p, policy, q, epsilon, opt);
        timings["baseline"] = seconds_since(t1);
        result["baseline"] = pi_json(b);
        result["baseline"]["kind"] = "fgsm";
        out << fmt::format("FGSM baseline: r_adv={} impact={}\n", fmt_prob(b.r_adv), fmt_prob(b.pi));
    }
    const fs::path dir = output_dir(g);
    write_json(dir / "attack.json", result);
    finish(dir,
           run_record("attack", g, setup,
                      {{"formula", pctl::to_string(q)}, {"epsilon", epsilon}, {"baseline", baseline}}),
           timings);
    return 0;
}

struct RobustArgs {
    std::string prop;
    std::string feature;
    bool box = false;
    std::size_t cap = 4096;
    int epsilon = 1;
    double alpha = 0.0;
    std::string direction;
    bool no_verify = false;
};

int cmd_robustness(const Global& g, const RobustArgs& a, std::ostream& out) {
    const Setup setup = load_setup(g);
    const ModelProvider& p = *setup.provider;
    const pctl::Query q = parse_property(a.prop);
    const auto policy = require_policy(g, p);
    if (a.box == !a.feature.empty()) throw ConfigError("give exactly one of --feature or --box");
    const PermissiveSpec spec = a.box ? PermissiveSpec::box(a.epsilon, a.cap)
                                      : PermissiveSpec::single_feature(feature_index(p.schema(), a.feature), a.epsilon);
    pctl::Direction dir = q.kind == pctl::QueryKind::Pmin ? pctl::Direction::Min : pctl::Direction::Max;
    if (a.direction == "min") {
        dir = pctl::Direction::Min;
    } else if (a.direction == "max") {
        dir = pctl::Direction::Max;
    } else if (!a.direction.empty()) {
        throw ConfigError("direction must be max or min");
    }
    RobustnessOptions opt{check_options(g), build_options(g), !a.no_verify};
    const RobustnessReport rep = check_robustness(p, *policy, q, spec, a.alpha, dir, opt);
    const fs::path outdir = output_dir(g);
    write_json(outdir / "robustness.json", report_to_json(rep, p.schema()));
    write_text(outdir / "attack_map.csv", attack_map_csv(rep, p.schema()));
    const json t = report_to_json(rep, p.schema(), true)["timings"];
    finish(outdir,
           run_record("robustness", g, setup,
                      {{"formula", pctl::to_string(q)},
                       {"feature", rep.feature},
                       {"epsilon", a.epsilon},
                       {"alpha", a.alpha},
                       {"direction", pctl::to_string(dir)}}),
           t);
    out << fmt::format("P={} P*={} impact*={} alpha={} -> {}\n", fmt_prob(rep.P), fmt_prob(rep.P_star),
                       fmt_prob(rep.impact_star), a.alpha, rep.robust ? "robust" : "NOT robust");
    return 0;
}

int cmd_export(const Global& g, const std::string& feature, int epsilon, std::ostream& out) {
    const Setup setup = load_setup(g);
    const ModelProvider& p = *setup.provider;
    ExplicitModel m;
    json what;
    if (g.policy.empty()) {
        if (!feature.empty()) throw ConfigError("--feature needs --policy");
        m = explore_model(p, build_options(g));
        what = "mdp";
    } else {
        const auto policy = require_policy(g, p);
        if (feature.empty()) {
            m = induce_dtmc(p, *policy, nullptr, build_options(g));
            what = "induced-dtmc";
        } else {
            m = induce_permissive_mdp(p, *policy,
                                      PermissiveSpec::single_feature(feature_index(p.schema(), feature), epsilon),
                                      build_options(g));
            what = {{"permissive", {{"feature", feature}, {"epsilon", epsilon}}}};
        }
    }
    const fs::path dir = output_dir(g);
    save_explicit_model(m, dir / "model.json");
    finish(dir, run_record("export-model", g, setup, {{"export", what}}), json::object());
    out << fmt::format("exported {} with {} states, {} choices, {} transitions\n", to_string(m.kind), m.num_states(),
                       m.num_choices(), m.num_transitions());
    return 0;
}

int cmd_describe(const Global& g, std::ostream& out) {
    const Setup setup = load_setup(g);
    const ModelProvider& p = *setup.provider;
    json d = {{"source", setup.source},
              {"schema", schema_to_json(p.schema())},
              {"schema_hash", p.schema().hash()},
              {"labels", p.label_names()},
              {"initial_state", p.initial_state().vector()}};
    if (!setup.env_name.empty()) {
        json props = json::object();
        for (const auto& [k, v] : property_registry()) props[k] = v;
        d["properties"] = props;
    }
    out << d.dump(2) << '\n';
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Property impact attacks and robustness checks for RL policies", "pia"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(kVersion));
    Global g;
    app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
    app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--tol", g.tol, "value-iteration tolerance")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--out", g.out, "output directory")->capture_default_str();
    app.add_option("--env", g.env, "environment name");
    app.add_option("--env-config", g.env_config, "environment config: inline JSON or file");
    app.add_option("--preset", g.preset, "config preset (taxi: reduced, freeway: mini)");
    app.add_option("--model", g.model, "explicit model file instead of --env");
    app.add_option("--policy", g.policy, "policy file");
    app.add_option("--horizon", g.horizon, "statistical engine step horizon")->capture_default_str();
    app.add_option("--samples", g.samples, "statistical engine sample count")->capture_default_str();
    app.add_option("--confidence", g.confidence, "statistical confidence level")->capture_default_str();
    app.add_option("--state-cap", g.state_cap, "maximum explored states")->capture_default_str();

    TrainArgs train;
    train.cmd = app.add_subcommand("train", "deep Q-learning");
    train.cmd->add_option("--episodes", train.episodes)->capture_default_str();
    train.cmd->add_option("--max-steps", train.flags.max_steps);
    train.cmd->add_option("--hidden-layers", train.flags.hidden_layers);
    train.cmd->add_option("--neurons", train.flags.neurons);
    train.cmd->add_option("--lr", train.flags.learning_rate);
    train.cmd->add_option("--batch", train.flags.batch);
    train.cmd->add_option("--gamma", train.flags.gamma);
    train.cmd->add_option("--epsilon-start", train.flags.epsilon_start);
    train.cmd->add_option("--epsilon-decay", train.flags.epsilon_decay);
    train.cmd->add_option("--epsilon-min", train.flags.epsilon_min);
    train.cmd->add_option("--target-update", train.flags.target_update);
    train.cmd->add_option("--replay", train.flags.replay_capacity);
    train.cmd->add_option("--train-config", train.train_config, "JSON file with training options");
    train.cmd->add_option("--resume", train.resume, "continue from this policy");
    train.cmd->add_option("--adv-feature", train.adv_feature, "adversarial training on this feature");
    train.cmd->add_option("--adv-epsilon", train.adv_epsilon)->capture_default_str();

    std::string prop;
    auto* check = app.add_subcommand("check", "model-check a property");
    check->add_option("--prop", prop, "formula or registered property name")->required();

    int epsilon = 1;
    auto* pimap = app.add_subcommand("pi-map", "per-feature property impact");
    pimap->add_option("--prop", prop)->required();
    pimap->add_option("--epsilon", epsilon)->check(CLI::NonNegativeNumber)->capture_default_str();

    SriOptions sri;
    auto* srimap = app.add_subcommand("sri-map", "per-feature static reward impact");
    srimap->add_option("--epsilon", epsilon)->check(CLI::NonNegativeNumber)->capture_default_str();
    srimap->add_option("--n", sri.episodes, "episodes per batch")->check(CLI::PositiveNumber)->capture_default_str();
    srimap->add_option("--gamma", sri.gamma)->capture_default_str();
    srimap->add_option("--max-steps", sri.max_steps)->capture_default_str();

    std::string baseline;
    auto* attack = app.add_subcommand("attack", "property impact attack");
    attack->add_option("--prop", prop)->required();
    attack->add_option("--epsilon", epsilon)->check(CLI::NonNegativeNumber)->capture_default_str();
    attack->add_option("--baseline", baseline, "also run a whole-observation baseline (fgsm)");

    RobustArgs rob;
    auto* robust = app.add_subcommand("robustness", "epsilon,alpha-robustness check");
    robust->add_option("--prop", rob.prop)->required();
    robust->add_option("--feature", rob.feature, "attacked feature");
    robust->add_flag("--box", rob.box, "attack all features at once");
    robust->add_option("--cap", rob.cap, "attack-set cap for --box")->capture_default_str();
    robust->add_option("--epsilon", rob.epsilon)->check(CLI::NonNegativeNumber)->capture_default_str();
    robust->add_option("--alpha", rob.alpha)->check(CLI::NonNegativeNumber)->capture_default_str();
    robust->add_option("--direction", rob.direction, "max or min; defaults to the query operator");
    robust->add_flag("--no-verify", rob.no_verify, "skip replaying the extracted attack");

    std::string export_feature;
    auto* exportm = app.add_subcommand("export-model", "write the explicit model");
    exportm->add_option("--feature", export_feature, "build the permissive MDP for this feature");
    exportm->add_option("--epsilon", epsilon)->check(CLI::NonNegativeNumber)->capture_default_str();

    auto* describe = app.add_subcommand("describe", "print schema, labels and properties");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    try {
        if (train.cmd->parsed()) return cmd_train(g, train, out);
        if (check->parsed()) return cmd_check(g, prop, out);
        if (pimap->parsed()) return cmd_pi_map(g, prop, epsilon, out);
        if (srimap->parsed()) return cmd_sri_map(g, epsilon, sri, out);
        if (attack->parsed()) return cmd_attack(g, prop, epsilon, baseline, out);
        if (robust->parsed()) return cmd_robustness(g, rob, out);
        if (exportm->parsed()) return cmd_export(g, export_feature, epsilon, out);
        if (describe->parsed()) return cmd_describe(g, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return 2;
}

}  // namespace pia::cli
