#include "pia/robustness/robustness.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <sstream>

#include "pia/common/error.hpp"

namespace pia {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool has_step_bound(const pctl::PathFormula& p) {
    if (p.bound) return true;
    return (p.left && has_step_bound(*p.left)) || (p.right && has_step_bound(*p.right));
}

std::string offset_features(const FeatureSchema& schema, const std::vector<int>& offset, bool values) {
    std::string out;
    for (std::size_t i = 0; i < offset.size(); ++i) {
        if (offset[i] == 0) continue;
        if (!out.empty()) out += ';';
        out += values ? std::to_string(offset[i]) : schema.feature(i).name;
    }
    return out.empty() ? (values ? "0" : "none") : out;
}

}  // namespace

std::vector<AttackMapEntry> extract_optimal_attack(const ExplicitModel& permissive, const std::vector<ActionId>& scheduler,
                                                   const Policy& policy, const PermissiveSpec& spec) {
    const std::size_t n = permissive.num_states();
    if (scheduler.size() != n) throw ConfigError("scheduler does not cover the permissive model");
    std::vector<char> seen(n, 0);
    std::deque<StateId> queue{permissive.initial};
    seen[permissive.initial] = 1;
    std::vector<AttackMapEntry> out;
    while (!queue.empty()) {
        const StateId s = queue.front();
        queue.pop_front();
        const ActionId a = scheduler[s];
        const auto ci = permissive.choice_index(s, a);
        if (!ci) throw Error(ErrorCategory::Internal, "scheduler picks an action outside the permissive set");
        const FactoredState& state = permissive.states[s];
        bool found = false;
        for (auto& c : attack_candidates(permissive.schema, state, spec)) {
            if (policy.act(c.observation) != a) continue;
            out.push_back({state, std::move(c.observation), std::move(c.offset), a});
            found = true;
            break;
        }
        if (!found) throw Error(ErrorCategory::Internal, "no attack realises action at " + to_string(state));
        for (const auto& t : permissive.choices[s][*ci].row) {
            if (!seen[t.target]) {
                seen[t.target] = 1;
                queue.push_back(t.target);
            }
        }
    }
    return out;
}

TableAttack attack_from_map(const FeatureSchema& schema, const std::vector<AttackMapEntry>& map, int epsilon) {
    TableAttack attack(schema, epsilon);
    for (const auto& e : map) {
        if (e.observation != e.state) attack.set(e.state, e.observation);
    }
    return attack;
}

double verify_extracted_attack(const ModelProvider& provider, const Policy& policy, const pctl::Query& query,
                               const std::vector<AttackMapEntry>& map, int epsilon, std::optional<double> expected,
                               const RobustnessOptions& options) {
    const TableAttack attack = attack_from_map(provider.schema(), map, epsilon);
    const ExplicitModel dtmc = induce_dtmc(provider, policy, &attack, options.build);
    const double value = pctl::check(dtmc, query, options.check).value;
    if (expected && pctl::classify(query) == pctl::FragmentClass::ExactCore && !has_step_bound(*query.path) &&
        std::abs(value - *expected) > kVerifyTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "extracted attack yields " << value << " but the optimum is " << *expected;
        throw MismatchAgainstPStar(os.str());
    }
    return value;
}

RobustnessReport check_robustness(const ModelProvider& provider, const Policy& policy, const pctl::Query& query,
                                  const PermissiveSpec& spec, double alpha, pctl::Direction direction,
                                  const RobustnessOptions& options) {
    if (spec.epsilon < 0) throw ConfigError("epsilon must be nonnegative");
    if (!(alpha >= 0.0)) throw ConfigError("alpha must be nonnegative");
    if (spec.scope == PermissiveSpec::Scope::SingleFeature && spec.feature >= provider.schema().num_features()) {
        throw ConfigError("feature index out of range");
    }
    RobustnessReport rep;
    rep.formula = pctl::to_string(query);
    rep.direction = direction;
    rep.spec = spec;
    rep.alpha = alpha;
    rep.engine = pctl::classify(query);
    rep.feature = spec.scope == PermissiveSpec::Scope::SingleFeature ? provider.schema().feature(spec.feature).name : "*";

    auto t0 = Clock::now();
    const ExplicitModel clean = induce_dtmc(provider, policy, nullptr, options.build);
    rep.timings.build_clean = seconds_since(t0);
    rep.clean_states = clean.num_states();
    rep.clean_transitions = clean.num_transitions();

    t0 = Clock::now();
    rep.P = pctl::check_dtmc_exact(clean, query, options.check).value;
    rep.timings.check_clean = seconds_since(t0);

    t0 = Clock::now();
    const ExplicitModel mdp = induce_permissive_mdp(provider, policy, spec, options.build);
    rep.timings.build_permissive = seconds_since(t0);
    rep.permissive_states = mdp.num_states();
    rep.permissive_choices = mdp.num_choices();
    rep.permissive_transitions = mdp.num_transitions();

    t0 = Clock::now();
    const pctl::CheckResult star = pctl::check_mdp_extremal(mdp, query, direction, options.check);
    rep.timings.check_permissive = seconds_since(t0);
    rep.P_star = star.value;
    rep.impact_star = std::abs(rep.P_star - rep.P);
    rep.robust = rep.impact_star <= alpha;

    t0 = Clock::now();
    rep.attack_map = extract_optimal_attack(mdp, star.scheduler, policy, spec);
    rep.timings.extract = seconds_since(t0);

    if (options.verify) {
        t0 = Clock::now();
        rep.verified = verify_extracted_attack(provider, policy, query, rep.attack_map, spec.epsilon, rep.P_star, options);
        rep.timings.verify = seconds_since(t0);
    }
    return rep;
}

nlohmann::json report_to_json(const RobustnessReport& r, const FeatureSchema& schema, bool with_timings) {
    nlohmann::json attack = nlohmann::json::array();
    for (const auto& e : r.attack_map) {
        attack.push_back({{"state", e.state.vector()},
                          {"observation", e.observation.vector()},
                          {"offset", e.offset},
                          {"action", schema.action_names().at(e.action)}});
    }
    nlohmann::json j = {
        {"formula", r.formula},
        {"direction", pctl::to_string(r.direction)},
        {"scope", r.spec.scope == PermissiveSpec::Scope::SingleFeature ? "single_feature" : "all_features_box"},
        {"feature", r.feature},
        {"epsilon", r.spec.epsilon},
        {"alpha", r.alpha},
        {"P", r.P},
        {"P_star", r.P_star},
        {"impact_star", r.impact_star},
        {"robust", r.robust},
        {"engine", pctl::to_string(r.engine)},
        {"verified", r.verified ? nlohmann::json(*r.verified) : nlohmann::json(nullptr)},
        {"sizes",
         {{"clean_states", r.clean_states},
          {"clean_transitions", r.clean_transitions},
          {"permissive_states", r.permissive_states},
          {"permissive_choices", r.permissive_choices},
          {"permissive_transitions", r.permissive_transitions}}},
        {"attack_map", std::move(attack)},
    };
    if (with_timings) {
        j["timings"] = {{"build_clean", r.timings.build_clean},
                        {"check_clean", r.timings.check_clean},
                        {"build_permissive", r.timings.build_permissive},
                        {"check_permissive", r.timings.check_permissive},
                        {"extract", r.timings.extract},
                        {"verify", r.timings.verify},
                        {"total", r.timings.total()}};
    }
    return j;
}

std::string attack_map_csv(const RobustnessReport& report, const FeatureSchema& schema) {
    std::ostringstream os;
    for (const auto& f : schema.features()) os << f.name << ',';
    os << "offset_feature,offset,action\n";
    for (const auto& e : report.attack_map) {
        for (const int v : e.state) os << v << ',';
        os << offset_features(schema, e.offset, false) << ',' << offset_features(schema, e.offset, true) << ','
           << schema.action_names().at(e.action) << '\n';
    }
    return os.str();
}

}  // namespace pia
