#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "sgsolver/graph.hpp"
#include "sgsolver/model.hpp"

namespace sgsolver {

struct CertifiedInterval {
    Assignment lower, upper;
    /// False when an internal sweep cap (or the floating-point resolution)
    /// was reached before the requested width; the bounds remain sound.
    bool precise = true;

    Value width(int s) const { return upper[s] - lower[s]; }
    Value max_width() const;
};

enum class NumberMode { Float64, Rational };

/// Exact per-state values of a Markov chain via direct linear solves
/// (Gaussian elimination with partial pivoting). Reachability yields hitting
/// probabilities, safety their complement, total reward the expected
/// accumulated reward (+inf where a positive-reward BSCC is reachable), mean
/// payoff the BSCC gains weighted by absorption probabilities. Rational mode
/// reconstructs small-denominator fractions from the stored probabilities
/// and solves exactly, rounding the result to double at the end.
Assignment solve_mc(const StochasticGame& chain, const Objective& obj,
                    NumberMode mode = NumberMode::Float64);

/// Early-stopping rule for mean_payoff_span: abort once the span upper bound
/// drops below / the lower bound rises above the given value.
struct StopThreshold {
    enum class Kind { UpperBelow, LowerAbove };
    Kind kind;
    double value;
};

struct SpanResult {
    double lower = 0.0;
    double upper = 0.0;
    bool converged = false;      // width <= eps was reached
    bool early_stopped = false;  // a stop threshold fired first
    Assignment iterate;          // final iterate; reusable as warm start
    long sweeps = 0;
};

/**
 * Difference-vector bounds on the gain of a communicating single-owner game
 * (e.g. a restricted MEC): iterates accumulated-reward sweeps on the
 * aperiodicity-transformed game (alpha = 0.5) and reports
 * [min_s Delta_i(s), max_s Delta_i(s)], which brackets the gain at every
 * sweep. Stops at width <= eps, earlier if the threshold fires, or after
 * sweep_cap sweeps (result flagged non-converged).
 */
SpanResult mean_payoff_span(const StochasticGame& mdp, double eps,
                            const Assignment* warm_start = nullptr,
                            std::optional<StopThreshold> stop = std::nullopt,
                            long sweep_cap = 1000000);

/// Quotient of an MDP with the given disjoint ECs collapsed. Every EC becomes
/// a representative state keeping all exiting actions plus one "stay" action
/// leading to a fresh absorbing terminal whose value interval is pinned to
/// the EC's staying value. Non-collapsed states keep their actions 1:1.
struct MecQuotient {
    StochasticGame game;
    std::vector<int> state_map;  // original state -> quotient state
    std::vector<int> rep_of_ec;
    std::vector<int> terminal_of_ec;
    std::vector<std::pair<double, double>> terminal_value;  // [lower, upper] per EC
    /// Per quotient state and action: originating (state, action) in the MDP,
    /// or (-1, ec index) for stay actions, or (-2, -2) for terminal loops.
    std::vector<std::vector<std::pair<int, int>>> action_source;

    bool is_terminal(int qs) const;
};

MecQuotient mec_quotient(const StochasticGame& mdp, const std::vector<EndComponent>& ecs,
                         const std::vector<std::pair<double, double>>& stay, Player optimizer);

/// Certified interval bracketing the MDP value, with max-width <= eps when
/// the iteration converges (precise flag). Reachability/safety collapse all
/// MECs, total reward removes infinite states (reported as [+inf,+inf]) and
/// collapses the objective's MSECs, mean payoff computes per-MEC gains by
/// span iteration and solves weighted reachability on the quotient. Throws
/// on a two-owner input or eps <= 0.
CertifiedInterval solve_mdp(const StochasticGame& mdp, const Objective& obj, double eps);

struct MdpSolution {
    CertifiedInterval interval;
    /// Optimizing player's policy, extracted with absorption-rank tie-breaks
    /// on the quotient and attractor navigation inside collapsed ECs.
    StrategyProfile policy;
};

MdpSolution solve_mdp_with_policy(const StochasticGame& mdp, const Objective& obj, double eps);

}  // namespace sgsolver
