#pragma once

#include <utility>
#include <vector>

#include "sgsolver/model.hpp"

namespace sgsolver {

/// End component: a state set R plus a set B of (state, action-index) pairs
/// such that every B-action stays inside R and R is strongly connected using
/// only B-actions. Both parts are sorted and non-empty.
struct EndComponent {
    std::vector<int> states;
    std::vector<std::pair<int, int>> actions;

    bool contains(int s) const;
    bool has_action(int s, int a) const;
};

/// Checks the closure + connectivity invariant of an EC in the given game.
/// Independent of the algorithms that produce ECs; used as a validator.
bool is_valid_ec(const StochasticGame& g, const EndComponent& ec);

/// All inclusion-maximal end components, pairwise disjoint in states, ordered
/// by minimal state index. Standard iterative SCC-pruning algorithm.
std::vector<EndComponent> mecs(const StochasticGame& g);

/// Bottom strongly connected components of a Markov chain, ordered by minimal
/// state index. Throws if some state has more than one action.
std::vector<std::vector<int>> bsccs(const StochasticGame& chain);

/// States from which `player` can ensure positive probability of reaching
/// `target` against any opponent strategy: least fixpoint of the one-step
/// backward closure (player states need some action into the set, opponent
/// states need all actions into the set).
std::vector<int> positive_attractor(const StochasticGame& g, const std::vector<int>& target,
                                    Player player);

/// States that can reach some target state in the underlying graph (any
/// action, any successor). Helper for qualitative preprocessing.
std::vector<char> can_reach(const StochasticGame& g, const std::vector<int>& target);

/**
 * Maximal simple-end-component candidates of a single-owner game, where
 * `optimizer` is the player still making choices (Maximizer for an MDP
 * obtained by fixing the Minimizer and vice versa). For reachability, safety
 * and mean payoff these are exactly the MECs. For total reward with the
 * Minimizer optimizing they are the MECs of the sub-MDP left after deleting
 * all states with positive reward; with the Maximizer optimizing every MEC
 * qualifies. Throws if the other player has a state with several actions.
 */
std::vector<EndComponent> msecs(const StochasticGame& mdp, const Objective& obj, Player optimizer);

/// States with infinite total-reward value: the complement of the region
/// where the Minimizer almost-surely confines the play, from some point on,
/// to reward-free states (iterated arena pruning; equivalently, the states
/// where the Maximizer sees positive-reward states infinitely often with
/// positive probability).
std::vector<int> infinite_total_reward_states(const StochasticGame& g);

/// Game restricted to an end component: states = R, actions(s) = A(s) n B.
/// State order follows the sorted member indices, so position k corresponds
/// to ec.states[k]. Throws if the EC is not closed in the game.
StochasticGame restrict_to(const StochasticGame& g, const EndComponent& ec);

}  // namespace sgsolver
