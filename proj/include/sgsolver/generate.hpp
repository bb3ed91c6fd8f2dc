#pragma once

#include <cstdint>

#include "sgsolver/model.hpp"

namespace sgsolver {

struct GeneratorConfig {
    int max_states = 5;
    int max_actions = 3;
    bool two_player = true;   // false forces a single Maximizer owner
    bool rewards = true;      // zero rewards everywhere when false
};

/// Deterministic random game: probabilities are drawn from {1/4, 1/2, 3/4, 1}
/// and renormalized, owners and rewards are randomized. The same seed always
/// produces the same game.
StochasticGame generate_random_game(std::uint64_t seed, const GeneratorConfig& config = {});

}  // namespace sgsolver
