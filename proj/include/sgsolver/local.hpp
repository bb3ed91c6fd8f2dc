#pragma once

#include <optional>
#include <vector>

#include "sgsolver/global.hpp"
#include "sgsolver/graph.hpp"
#include "sgsolver/mdpsolve.hpp"
#include "sgsolver/model.hpp"

namespace sgsolver {

/// Objective value of staying inside an EC forever; a degenerate pair when
/// known exactly.
struct StayValue {
    Value lower = 0.0;
    Value upper = 0.0;
    bool converged = true;  // false when the mean-payoff iteration hit its cap
};

/// A guessed simple end component: an EC of an induced MDP together with the
/// player whose strategy was fixed and the owned exiting state-action pairs.
struct SecCandidate {
    EndComponent ec;
    Player fixed_player = Player::Minimizer;
    std::vector<std::pair<int, int>> max_exits;
    std::vector<std::pair<int, int>> min_exits;
};

SecCandidate make_sec_candidate(const StochasticGame& g, EndComponent ec, Player fixed_player);

/// Best exit value of the given player from the EC under assignment f:
/// max (Maximizer) or min (Minimizer) of q-values over the player's owned
/// exiting pairs; -inf / +inf when the player has no exit.
Value exit_value(const StochasticGame& g, const Assignment& f, const EndComponent& ec,
                 Player player);

enum class StayMode { Exact, Bounds };

struct StayBoundsParams {
    double eps = 1e-6;
    const Assignment* warm_start = nullptr;  // on the restricted EC states
    std::optional<StopThreshold> stop;
};

/**
 * Per-state staying values stay(E,s) = value of the game restricted to E,
 * aligned with ec.states. Reachability/safety/total reward use graph rules
 * (total reward from the perspective of `optimizer`, the player free in the
 * MDP). Mean payoff runs span iteration in Bounds mode (single-owner only;
 * constant interval across the EC) and evaluates the restriction exactly in
 * Exact mode, which also supports two-owner restrictions. `iterate_out`
 * receives the final span iterate for warm-starting revisits.
 */
std::vector<StayValue> staying_value(const StochasticGame& g, const EndComponent& ec,
                                     const Objective& obj, Player optimizer,
                                     StayMode mode = StayMode::Exact,
                                     const StayBoundsParams* params = nullptr,
                                     Assignment* iterate_out = nullptr);

/// U(s) = min(U_hat(s), max(stay[i].upper, exit_max)) on the candidate's
/// states; never increases an entry. Sound whenever U_hat over-approximates
/// the value.
Assignment deflate(const StochasticGame& g, const Assignment& u_hat, const SecCandidate& cand,
                   const std::vector<StayValue>& stay);

/// Dual of deflate: L(s) = max(L_hat(s), min(stay[i].lower, exit_min)).
Assignment inflate(const StochasticGame& g, const Assignment& l_hat, const SecCandidate& cand,
                   const std::vector<StayValue>& stay);

/// SEC-for-f predicate: f(s) = off(s) + q(f,s,a) within 1e-9 for every state
/// and interior action of the EC.
bool is_sec_for(const StochasticGame& g, const Assignment& f, const Objective& obj,
                const EndComponent& ec);

/// Equivalent formulation: all f-values equal and zero offset on the EC.
bool is_sec_for_equal_values(const StochasticGame& g, const Assignment& f, const Objective& obj,
                             const EndComponent& ec);

/**
 * Localizes a spurious fixpoint: given a fixpoint f of the fixpoint update
 * (within 1e-9) and a reference value, returns a SEC-for-f on which f and
 * the reference differ in every state, or nothing when they agree within
 * 1e-6 everywhere. Throws std::invalid_argument when f is not a fixpoint.
 */
std::optional<EndComponent> find_spurious_fixpoint_sec(const StochasticGame& g,
                                                       const Objective& obj, const Assignment& f,
                                                       const Assignment& reference);

/// Bounded value iteration with local reasoning: fixpoint updates on the
/// bounds in the induced MDPs plus deflate/inflate on MSEC candidates.
SolveResult bvi_local(const StochasticGame& g, const Objective& obj, int s0, double eps,
                      const SolveConfig& config = {});

}  // namespace sgsolver
