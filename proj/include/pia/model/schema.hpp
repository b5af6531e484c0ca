#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pia {

using ActionId = std::uint32_t;
using StateId = std::uint32_t;

struct Feature {
    std::string name;
    int lo = 0;
    int hi = 0;

    bool operator==(const Feature&) const = default;
};

/// An integer feature vector. The unit of observation, attack, and transition.
class FactoredState {
public:
    FactoredState() = default;
    explicit FactoredState(std::vector<int> values) : values_(std::move(values)) {}
    FactoredState(std::initializer_list<int> values) : values_(values) {}

    std::size_t size() const noexcept { return values_.size(); }
    int operator[](std::size_t i) const { return values_[i]; }
    int& operator[](std::size_t i) { return values_[i]; }
    std::span<const int> values() const noexcept { return values_; }
    const std::vector<int>& vector() const noexcept { return values_; }

    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }

    bool operator==(const FactoredState&) const = default;
    auto operator<=>(const FactoredState&) const = default;

    /// l-infinity distance; both states must have equal length.
    int linf_distance(const FactoredState& other) const;

private:
    std::vector<int> values_;
};

struct FactoredStateHash {
    std::size_t operator()(const FactoredState& s) const noexcept;
};

/// Ordered feature list with integer domains, plus the action alphabet.
class FeatureSchema {
public:
    FeatureSchema() = default;
    /// Throws ConfigError when names repeat, a domain is empty or an action name is empty.
    FeatureSchema(std::vector<Feature> features, std::vector<std::string> action_names);

    const std::vector<Feature>& features() const noexcept { return features_; }
    const std::vector<std::string>& action_names() const noexcept { return actions_; }
    std::size_t num_features() const noexcept { return features_.size(); }
    std::size_t num_actions() const noexcept { return actions_.size(); }
    const Feature& feature(std::size_t i) const { return features_.at(i); }

    std::optional<std::size_t> feature_index(std::string_view name) const;
    std::optional<ActionId> action_index(std::string_view name) const;
    /// Like feature_index but throws ConfigError naming the missing feature.
    std::size_t require_feature(std::string_view name) const;

    bool contains(const FactoredState& s) const;
    /// Throws ShapeMismatch if |s| differs from the schema length or a value is out of range.
    void check(const FactoredState& s) const;
    FactoredState clip(FactoredState s) const;

    /// Stable 64-bit FNV-1a digest of names, bounds, and actions, as 16 hex digits.
    std::string hash() const;

    bool operator==(const FeatureSchema&) const = default;

private:
    std::vector<Feature> features_;
    std::vector<std::string> actions_;
};

std::string to_string(const FactoredState& s);

struct Outcome {
    FactoredState state;
    double prob = 0.0;
};

/// Sparse distribution over successor states.
using Distribution = std::vector<Outcome>;

inline constexpr double kProbabilityTolerance = 1e-9;

/// Throws InvalidDistribution on empty support, a probability outside (0,1],
/// duplicate states, or a total mass off by more than kProbabilityTolerance.
void check_distribution(const Distribution& d);

}  // namespace pia
