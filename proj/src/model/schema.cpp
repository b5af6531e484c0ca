#include "pia/model/schema.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <unordered_set>

#include "pia/common/error.hpp"

namespace pia {

int FactoredState::linf_distance(const FactoredState& other) const {
    int d = 0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        d = std::max(d, std::abs(values_[i] - other.values_[i]));
    }
    return d;
}

std::size_t FactoredStateHash::operator()(const FactoredState& s) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (int v : s) {
        h ^= static_cast<std::uint32_t>(v);
        h *= 1099511628211ull;
        h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
}

FeatureSchema::FeatureSchema(std::vector<Feature> features, std::vector<std::string> action_names)
    : features_(std::move(features)), actions_(std::move(action_names)) {
    std::unordered_set<std::string> seen;
    for (const auto& f : features_) {
        if (f.name.empty()) throw ConfigError("feature with empty name");
        if (!seen.insert(f.name).second) throw ConfigError("duplicate feature name '" + f.name + "'");
        if (f.lo > f.hi) throw ConfigError("feature '" + f.name + "' has lo > hi");
    }
    if (actions_.empty()) throw ConfigError("schema declares no actions");
    seen.clear();
    for (const auto& a : actions_) {
        if (a.empty()) throw ConfigError("action with empty name");
        if (!seen.insert(a).second) throw ConfigError("duplicate action name '" + a + "'");
    }
}

std::optional<std::size_t> FeatureSchema::feature_index(std::string_view name) const {
    for (std::size_t i = 0; i < features_.size(); ++i) {
        if (features_[i].name == name) return i;
    }
    return std::nullopt;
}

std::optional<ActionId> FeatureSchema::action_index(std::string_view name) const {
    for (std::size_t i = 0; i < actions_.size(); ++i) {
        if (actions_[i] == name) return static_cast<ActionId>(i);
    }
    return std::nullopt;
}

std::size_t FeatureSchema::require_feature(std::string_view name) const {
    auto idx = feature_index(name);
    if (!idx) throw ConfigError("unknown feature '" + std::string(name) + "'");
    return *idx;
}

bool FeatureSchema::contains(const FactoredState& s) const {
    if (s.size() != features_.size()) return false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] < features_[i].lo || s[i] > features_[i].hi) return false;
    }
    return true;
}

void FeatureSchema::check(const FactoredState& s) const {
    if (s.size() != features_.size()) {
        throw ShapeMismatch("state has " + std::to_string(s.size()) + " features, schema has " +
                            std::to_string(features_.size()));
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] < features_[i].lo || s[i] > features_[i].hi) {
            throw ShapeMismatch("feature '" + features_[i].name + "' value " + std::to_string(s[i]) +
                                " outside [" + std::to_string(features_[i].lo) + ", " +
                                std::to_string(features_[i].hi) + "]");
        }
    }
}

FactoredState FeatureSchema::clip(FactoredState s) const {
    for (std::size_t i = 0; i < s.size() && i < features_.size(); ++i) {
        s[i] = std::clamp(s[i], features_[i].lo, features_[i].hi);
    }
    return s;
}

std::string FeatureSchema::hash() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::string_view text) {
        for (unsigned char c : text) {
            h ^= c;
            h *= 1099511628211ull;
        }
        h ^= 0xff;
        h *= 1099511628211ull;
    };
    for (const auto& f : features_) {
        mix(f.name);
        mix(std::to_string(f.lo));
        mix(std::to_string(f.hi));
    }
    mix("|");
    for (const auto& a : actions_) mix(a);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string to_string(const FactoredState& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + ")";
}

void check_distribution(const Distribution& d) {
    if (d.empty()) throw InvalidDistribution("empty distribution");
    double total = 0.0;
    std::unordered_set<FactoredState, FactoredStateHash> seen;
    for (const auto& o : d) {
        if (!(o.prob > 0.0) || o.prob > 1.0 + kProbabilityTolerance) {
            throw InvalidDistribution("probability " + std::to_string(o.prob) + " for " + to_string(o.state) +
                                      " outside (0, 1]");
        }
        if (!seen.insert(o.state).second) {
            throw InvalidDistribution("duplicate successor " + to_string(o.state));
        }
        total += o.prob;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
        throw InvalidDistribution("distribution sums to " + std::to_string(total));
    }
}

}  // namespace pia
