#pragma once

#include "scenesmith/action_schema.hpp"

#include <random>
#include <string>
#include <vector>

namespace gen {

// Random action list that satisfies the full field matrix: consecutive
// local ids, backward "#" references, plain references drawn from `scene`.
scenesmith::ActionList valid_actions(std::mt19937_64& rng, std::size_t max_len,
                                     const std::vector<std::string>& scene = {"table.001", "chair.001", "sofa.001"});

// Finite value with a short decimal form.
double nice(std::mt19937_64& rng, double lo, double hi);

}  // namespace gen
