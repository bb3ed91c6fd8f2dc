#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace sgsolver {

using Value = double;
inline constexpr Value kInf = std::numeric_limits<Value>::infinity();

/// Per-state value vector (value iterates and bound vectors).
using Assignment = std::vector<Value>;

/// Joint memoryless deterministic action choice, one entry per state.
/// Entries of the other player are present but ignored by induce(); -1 marks
/// "undefined".
using StrategyProfile = std::vector<int>;

enum class Player { Maximizer, Minimizer };

inline Player opponent(Player p) {
    return p == Player::Maximizer ? Player::Minimizer : Player::Maximizer;
}

/// An available action: optional name plus a sparse distribution over
/// successor state indices. Entries are sorted by successor and sum to one
/// (renormalized at construction).
struct ActionRecord {
    std::string name;
    std::vector<std::pair<int, double>> dist;
};

struct StateRecord {
    std::string label;
    Player owner = Player::Maximizer;
    double reward = 0.0;
    std::vector<ActionRecord> actions;
};

/**
 * Finite turn-based two-player stochastic game. MDPs (one player everywhere)
 * and Markov chains (one action everywhere) are degenerate cases.
 *
 * State and action identity is the positional index; labels are metadata.
 * Instances are immutable after construction and safe to share across
 * threads; all transforms return fresh games.
 */
class StochasticGame {
  public:
    /// Validates and normalizes the given states. Throws std::invalid_argument
    /// on an empty state list, empty action lists, out-of-range successors,
    /// or distributions whose sum is off by more than 1e-9. Distributions are
    /// renormalized so that they sum to one exactly.
    explicit StochasticGame(std::vector<StateRecord> states);

    int num_states() const { return static_cast<int>(states_.size()); }
    const StateRecord& state(int s) const { return states_[s]; }
    const std::vector<StateRecord>& states() const { return states_; }

    Player owner(int s) const { return states_[s].owner; }
    double reward(int s) const { return states_[s].reward; }
    int num_actions(int s) const { return static_cast<int>(states_[s].actions.size()); }
    const ActionRecord& action(int s, int a) const { return states_[s].actions[a]; }
    const std::vector<std::pair<int, double>>& dist(int s, int a) const {
        return states_[s].actions[a].dist;
    }
    const std::string& label(int s) const { return states_[s].label; }

    /// Index of the state with the given label, or -1.
    int find_label(const std::string& label) const;

    /// True if every state has exactly one action.
    bool is_markov_chain() const;

    /// True if all states with more than one action belong to the given
    /// player, i.e. the game is an MDP from that player's perspective.
    bool is_mdp_for(Player p) const;

    /// Smallest positive transition probability.
    double min_positive_probability() const;
    double max_reward() const;

  private:
    std::vector<StateRecord> states_;
};

enum class ObjectiveKind { Reachability, Safety, TotalReward, MeanPayoff };

/// Objective = kind plus parameters. The target set is meaningful for
/// reachability/safety only. The per-state offset off(s) equals reward(s)
/// for total reward and 0 otherwise.
struct Objective {
    ObjectiveKind kind = ObjectiveKind::Reachability;
    std::vector<int> target;  // sorted state indices

    static Objective reachability(std::vector<int> target);
    static Objective safety(std::vector<int> avoid);
    static Objective total_reward() { return Objective{ObjectiveKind::TotalReward, {}}; }
    static Objective mean_payoff() { return Objective{ObjectiveKind::MeanPayoff, {}}; }

    bool is_target(int s) const;
    double offset(const StochasticGame& g, int s) const {
        return kind == ObjectiveKind::TotalReward ? g.reward(s) : 0.0;
    }
    bool uses_reward() const {
        return kind == ObjectiveKind::TotalReward || kind == ObjectiveKind::MeanPayoff;
    }
};

const char* to_string(ObjectiveKind kind);

/// Parses the repository's JSON game format. Throws std::invalid_argument
/// with a human-readable message on malformed documents, bad distributions,
/// dangling successor labels, empty action lists, or negative rewards.
StochasticGame parse_game(const std::string& text);

/// Renders a game back into the JSON file format; parse_game(render_game(g))
/// is structurally equal to g.
std::string render_game(const StochasticGame& g);

/// Report produced by canonicalize().
struct CanonReport {
    /// original index -> canonical index, -1 for removed states.
    std::vector<int> index_map;
    /// original indices removed because their total-reward value is +inf.
    std::vector<int> removed_infinite;
    /// mean payoff only: canonical reward = original reward + shift.
    double reward_shift = 0.0;
    /// reach/safety targets whose actions were replaced by a self-loop.
    std::vector<int> made_absorbing;

    bool unchanged() const {
        return removed_infinite.empty() && reward_shift == 0.0 && made_absorbing.empty();
    }
};

/**
 * Brings a game into the canonical form the solvers expect: reach/safety
 * targets become absorbing, total-reward states with infinite value are
 * removed (and reported), negative mean-payoff rewards are shifted to be
 * non-negative (shift recorded; solvers report un-shifted values through the
 * CLI). Idempotent. The objective's target indices stay valid because
 * removals only happen for total reward, which has no target set.
 */
std::pair<StochasticGame, CanonReport> canonicalize(const StochasticGame& g, const Objective& obj);

/// reward'(s) = a * reward(s) + b with a > 0; transitions unchanged. The
/// caller inverts mean-payoff values via V' = a*V + b.
StochasticGame rescale_rewards(const StochasticGame& g, double a, double b);

/// Reduction of discounted total reward to plain total reward: adds one
/// absorbing zero-reward trap state, scales every transition by (1-gamma)
/// and gives each action a gamma-probability edge to the trap.
StochasticGame discount_to_total_reward(const StochasticGame& g, double gamma);

/// dist'(s,a,s') = (1-alpha)*dist(s,a,s') plus self-loop mass alpha at s;
/// rewards unchanged. Preserves mean-payoff values and optimal actions.
/// Not idempotent.
StochasticGame aperiodicity_transform(const StochasticGame& g, double alpha);

/// MDP obtained by fixing the given player's choices: their states keep only
/// the chosen action, other states are untouched. Throws if the profile is
/// undefined (or out of range) on some owned state.
StochasticGame induce(const StochasticGame& g, const StrategyProfile& profile, Player player);

/// Fixes both players; the result is a Markov chain.
StochasticGame induce_chain(const StochasticGame& g, const StrategyProfile& profile);

}  // namespace sgsolver
