#pragma once

#include <functional>

#include "sgsolver/model.hpp"

namespace sgsolver {

/// Initial vector of classical value iteration: 1 on the target for
/// reachability (0 elsewhere), 0 on the avoid set for safety (1 elsewhere),
/// all zeros for total reward and mean payoff.
Assignment init_vi(const StochasticGame& g, const Objective& obj);

/// Constant upper bound on the value: 1 for reachability/safety, the maximal
/// reward for mean payoff, and for total reward the geometric-series bound
/// R_max / q with q = p_min^|S| and R_max = |S| * max reward (assumes
/// infinite-value states were removed).
Assignment init_upper(const StochasticGame& g, const Objective& obj);

/// Expected value of f after playing action a once: sum_s' delta(s,a,s')*f(s').
/// Any +inf successor with positive weight yields +inf.
Value q_value(const StochasticGame& g, const Assignment& f, int s, int a);

/// One Bellman sweep (Jacobi: reads only the input). Reachability, safety and
/// mean payoff optimize plain q-values; total reward and the mean-payoff
/// iterates add the state reward.
Assignment bellman_update(const StochasticGame& g, const Objective& obj, const Assignment& x);

/// Right-hand side of the optimality equation: off(s) + opt_a q(f,s,a).
/// Identical to bellman_update except for mean payoff, where no reward is
/// added.
Assignment fixpoint_update(const StochasticGame& g, const Objective& obj, const Assignment& f);

/// In-place Gauss-Seidel variant of bellman_update: states read values
/// already updated in this sweep. Often converges in fewer sweeps but is
/// excluded from the correctness claims of the bound computations, which
/// stay on Jacobi sweeps.
void bellman_update_gauss_seidel(const StochasticGame& g, const Objective& obj, Assignment& x);

/// Recommender state: the current strategy profile doubles as the memory of
/// previously chosen actions.
struct RecommenderState {
    StrategyProfile profile;
};

/// Profile choosing the smallest action index everywhere.
StrategyProfile initial_profile(const StochasticGame& g);

/// Absolute tolerance for membership in the argopt set.
inline constexpr double kArgoptTol = 1e-12;

/// One step of the keep-previous strategy recommender. `x` is the iterate
/// entering the sweep, so the computed sets are exactly the actions that
/// witness the upcoming update. The previous choice is kept when it still
/// witnesses; otherwise the witness with the smallest index is taken.
void recommend(const StochasticGame& g, const Objective& obj, const Assignment& x,
               RecommenderState& state);

/// Pluggable recommender hook used by the solvers; the default forwards to
/// recommend().
using RecommenderFn = std::function<void(const StochasticGame&, const Objective&,
                                         const Assignment&, RecommenderState&)>;

}  // namespace sgsolver
