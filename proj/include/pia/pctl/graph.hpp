#pragma once

#include <vector>

#include "pia/model/explicit_model.hpp"

namespace pia::pctl {

using StateSet = std::vector<StateId>;

/// Strongly connected components of the graph induced by `successors` on the
/// nodes with active[s] != 0 (all nodes when active is empty). Components are
/// returned sorted by their smallest member; members are sorted.
std::vector<StateSet> strongly_connected_components(const std::vector<std::vector<StateId>>& successors,
                                                    const std::vector<char>& active = {});

/// Bottom SCCs of a DTMC: components without an edge leaving them.
std::vector<StateSet> decompose_bsccs(const ExplicitModel& dtmc);

struct EndComponent {
    StateSet states;                          // sorted
    std::vector<std::vector<ActionId>> actions;  // parallel to states, sorted
};

/// Maximal end components. With a non-empty `restrict_to`, the MDP is first
/// restricted to those states and to the choices that stay inside them.
std::vector<EndComponent> decompose_mecs(const ExplicitModel& mdp, const std::vector<char>& restrict_to = {});

}  // namespace pia::pctl
