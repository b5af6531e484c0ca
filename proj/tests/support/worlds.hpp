#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "pia/model/provider.hpp"
#include "pia/policy/policy.hpp"

namespace pia::oracle {

// Random dynamics over x in [0, n-1]; "t" marks target states, which absorb.
class RandomWorld final : public ModelProvider {
public:
    RandomWorld(std::mt19937_64& rng, int n, std::size_t actions)
        : schema_({{"x", 0, n - 1}}, names(actions)), rows_(static_cast<std::size_t>(n)) {
        std::uniform_int_distribution<int> pick(0, n - 1);
        std::uniform_real_distribution<double> u(0.05, 1.0);
        for (int s = 0; s < n; ++s) target_.push_back(s > 0 && rng() % 3 == 0);
        for (auto& row : rows_) {
            for (std::size_t a = 0; a < actions; ++a) {
                std::map<int, double> w;
                const int k = 1 + static_cast<int>(rng() % 2);
                for (int i = 0; i < k; ++i) w[pick(rng)] += u(rng);
                double total = 0.0;
                for (const auto& [t, p] : w) total += p;
                Distribution d;
                for (const auto& [t, p] : w) d.push_back({FactoredState{t}, p / total});
                row.push_back(std::move(d));
            }
        }
    }
    const FeatureSchema& schema() const override { return schema_; }
    FactoredState initial_state() const override { return FactoredState{0}; }
    std::vector<ActionId> available_actions(const FactoredState&) const override {
        std::vector<ActionId> a(schema_.num_actions());
        for (ActionId i = 0; i < a.size(); ++i) a[i] = i;
        return a;
    }
    Distribution transition(const FactoredState& s, ActionId a) const override {
        if (is_target(s)) return {{s, 1.0}};
        return rows_[static_cast<std::size_t>(s[0])][a];
    }
    double reward(const FactoredState&, ActionId) const override { return 0.0; }
    std::vector<std::string> labels(const FactoredState& s) const override {
        if (is_target(s)) return {"t"};
        return {};
    }
    std::vector<std::string> label_names() const override { return {"t"}; }
    bool is_target(const FactoredState& s) const { return target_[static_cast<std::size_t>(s[0])]; }

private:
    static std::vector<std::string> names(std::size_t k) {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < k; ++i) out.push_back("a" + std::to_string(i));
        return out;
    }
    FeatureSchema schema_;
    std::vector<std::vector<Distribution>> rows_;
    std::vector<bool> target_;
};

TablePolicy random_policy(std::mt19937_64& rng, const FeatureSchema& schema) {
    TablePolicy p(schema, 0);
    const auto& f = schema.feature(0);
    for (int x = f.lo; x <= f.hi; ++x) p.set(FactoredState{x}, static_cast<ActionId>(rng() % schema.num_actions()));
    return p;
}

}  // namespace pia::oracle
