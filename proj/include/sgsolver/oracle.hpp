#pragma once

#include "sgsolver/mdpsolve.hpp"
#include "sgsolver/model.hpp"

namespace sgsolver {

struct OracleResult {
    Assignment value;             // possibly +inf entries (total reward)
    StrategyProfile max_witness;  // sigma* attaining sup-inf at every state
    StrategyProfile min_witness;  // tau* attaining inf-sup at every state
    long profiles_evaluated = 0;
};

/**
 * Brute-force exact solver: enumerates all MD strategy profiles, evaluates
 * every induced Markov chain exactly, and takes sup-inf per state. The
 * transposed order (inf-sup) is computed as well and asserted equal within
 * 1e-9 (determinacy); a violation throws std::logic_error. Rational mode
 * evaluates the chains with exact arithmetic. Throws std::invalid_argument
 * when the profile count exceeds `limit`.
 */
OracleResult exact_value(const StochasticGame& g, const Objective& obj, long limit = 1000000,
                         NumberMode mode = NumberMode::Float64);

/// Exact k-step optimal value by backward recursion over (state, steps-left);
/// independent of the solver's sweep machinery. k <= 12.
Assignment finite_horizon_value(const StochasticGame& g, const Objective& obj, int k);

}  // namespace sgsolver
