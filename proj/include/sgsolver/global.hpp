#pragma once

#include <vector>

#include "sgsolver/bellman.hpp"
#include "sgsolver/mdpsolve.hpp"
#include "sgsolver/model.hpp"

namespace sgsolver {

enum class SolveStatus { Converged, IterationCapped };

struct TracePoint {
    long iteration;
    double lower, upper;  // bounds at s0
};

struct SolveConfig {
    long iteration_cap = 1000000;
    /// Clamp bound updates monotonically against the previous iteration
    /// (local algorithm; not required for correctness with a stable
    /// recommender).
    bool monotone = true;
    bool record_trace = false;
    /// >1 solves the two induced MDPs of an iteration concurrently.
    int workers = 1;
    /// Gauss-Seidel sweeps for the recommender's value iterates instead of
    /// the default Jacobi sweeps (excluded from the correctness claims).
    bool gauss_seidel = false;
    /// Strategy recommender; empty uses the keep-previous rule.
    RecommenderFn recommender;
    /// Anytime inspection hook, called after every iteration's bound update.
    std::function<void(long, const Assignment& lower, const Assignment& upper)> inspect;
};

struct SolveResult {
    Assignment lower, upper;
    long iterations = 0;
    StrategyProfile profile;  // final recommended (sigma, tau)
    std::vector<TracePoint> trace;
    double epsilon = 0.0;
    SolveStatus status = SolveStatus::Converged;

    double gap(int s0) const {
        if (upper[s0] == lower[s0]) return 0.0;
        return upper[s0] - lower[s0];
    }
};

/// Bounded value iteration via global reduction to MDPs: classical VI
/// recommends a strategy pair each iteration, the two induced MDPs are
/// solved to a vanishing precision, and their values tighten the bounds
/// monotonically until the gap at s0 is at most eps.
SolveResult bvi_global(const StochasticGame& g, const Objective& obj, int s0, double eps,
                       const SolveConfig& config = {});

/// Strategy-iteration anytime variant: evaluates the Maximizer's current
/// strategy exactly-ish, extracts the Minimizer best response from that
/// solve, improves the Maximizer locally (keeping previous choices on ties),
/// and uses the induced MDPs for the bounds. Total reward is not supported.
SolveResult si_anytime(const StochasticGame& g, const Objective& obj, int s0, double eps,
                       const SolveConfig& config = {});

}  // namespace sgsolver
