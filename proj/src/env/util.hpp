#pragma once

#include <algorithm>
#include <unordered_map>

#include "pia/model/schema.hpp"

namespace pia::env::detail {

/// Merges repeated successors, keeping first-occurrence order.
inline Distribution merge(Distribution d) {
    Distribution out;
    std::unordered_map<FactoredState, std::size_t, FactoredStateHash> at;
    for (auto& o : d) {
        if (o.prob <= 0.0) continue;
        auto [it, fresh] = at.emplace(o.state, out.size());
        if (fresh) {
            out.push_back(std::move(o));
        } else {
            out[it->second].prob += o.prob;
        }
    }
    return out;
}

inline std::vector<ActionId> all_actions(const FeatureSchema& schema) {
    std::vector<ActionId> out(schema.num_actions());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<ActionId>(i);
    return out;
}

/// One step of a walk on [lo, hi] that bounces off the walls.
inline int reflect(int v, int lo, int hi) {
    if (lo == hi) return lo;
    if (v < lo) v = lo + (lo - v);
    if (v > hi) v = hi - (v - hi);
    return std::clamp(v, lo, hi);
}

}  // namespace pia::env::detail
