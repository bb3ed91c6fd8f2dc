#include "sgsolver/global.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

namespace sgsolver {

namespace {

void check_solve_args(const StochasticGame& g, int s0, double eps) {
    if (s0 < 0 || s0 >= g.num_states())
        throw std::invalid_argument("initial state index out of range");
    if (!(eps > 0.0)) throw std::invalid_argument("epsilon must be positive");
}

void clamp_bounds(Assignment& lower, Assignment& upper, const Assignment& new_lower,
                  const Assignment& new_upper) {
    for (size_t s = 0; s < lower.size(); ++s) {
        lower[s] = std::max(lower[s], new_lower[s]);
        upper[s] = std::min(upper[s], new_upper[s]);
    }
}

// Halves the sub-solver precision whenever the gap at s0 fails to shrink by
// eps_mdp over ten iterations, so termination is inherited from the
// recommender's stability.
struct PrecisionSchedule {
    double eps_mdp;
    double window_gap = kInf;
    long window_start = 0;

    void observe(long iteration, double gap) {
        if (iteration - window_start < 10) return;
        if (window_gap - gap < eps_mdp) eps_mdp *= 0.5;
        window_start = iteration;
        window_gap = gap;
    }
};

}  // namespace

SolveResult bvi_global(const StochasticGame& g, const Objective& obj, int s0, double eps,
                       const SolveConfig& config) {
    check_solve_args(g, s0, eps);
    const int n = g.num_states();

    Assignment x = init_vi(g, obj);
    RecommenderState rec{initial_profile(g)};
    RecommenderFn recommender = config.recommender
                                    ? config.recommender
                                    : [](const StochasticGame& gg, const Objective& oo,
                                         const Assignment& xx,
                                         RecommenderState& st) { recommend(gg, oo, xx, st); };

    SolveResult res;
    res.epsilon = eps;
    res.lower.assign(n, 0.0);
    res.upper.assign(n, kInf);
    PrecisionSchedule schedule{eps / 4.0};

    for (long i = 1; i <= config.iteration_cap; ++i) {
        res.iterations = i;
        recommender(g, obj, x, rec);  // witnesses of the upcoming sweep
        if (config.gauss_seidel)
            bellman_update_gauss_seidel(g, obj, x);
        else
            x = bellman_update(g, obj, x);

        StochasticGame max_fixed = induce(g, rec.profile, Player::Maximizer);
        StochasticGame min_fixed = induce(g, rec.profile, Player::Minimizer);
        CertifiedInterval lower_solve, upper_solve;
        if (config.workers > 1) {
            auto fut = std::async(std::launch::async, [&] {
                return solve_mdp(max_fixed, obj, schedule.eps_mdp);
            });
            upper_solve = solve_mdp(min_fixed, obj, schedule.eps_mdp);
            lower_solve = fut.get();
        } else {
            lower_solve = solve_mdp(max_fixed, obj, schedule.eps_mdp);
            upper_solve = solve_mdp(min_fixed, obj, schedule.eps_mdp);
        }
        clamp_bounds(res.lower, res.upper, lower_solve.lower, upper_solve.upper);

        if (config.record_trace) res.trace.push_back({i, res.lower[s0], res.upper[s0]});
        if (config.inspect) config.inspect(i, res.lower, res.upper);
        double gap = res.gap(s0);
        if (gap <= eps) {
            res.status = SolveStatus::Converged;
            res.profile = rec.profile;
            return res;
        }
        schedule.observe(i, gap);
    }
    res.status = SolveStatus::IterationCapped;
    res.profile = rec.profile;
    return res;
}

SolveResult si_anytime(const StochasticGame& g, const Objective& obj, int s0, double eps,
                       const SolveConfig& config) {
    check_solve_args(g, s0, eps);
    if (obj.kind == ObjectiveKind::TotalReward)
        throw std::invalid_argument("SI unsupported for total reward");
    const int n = g.num_states();

    StrategyProfile profile = initial_profile(g);
    SolveResult res;
    res.epsilon = eps;
    res.lower.assign(n, 0.0);
    res.upper.assign(n, kInf);
    PrecisionSchedule schedule{eps / 4.0};

    for (long i = 1; i <= config.iteration_cap; ++i) {
        res.iterations = i;

        StochasticGame max_fixed = induce(g, profile, Player::Maximizer);
        MdpSolution eval = solve_mdp_with_policy(max_fixed, obj, schedule.eps_mdp);
        // Minimizer best response extracted from inside the solve.
        for (int s = 0; s < n; ++s)
            if (g.owner(s) == Player::Minimizer) profile[s] = eval.policy[s];
        const Assignment& x = eval.interval.lower;

        StochasticGame min_fixed = induce(g, profile, Player::Minimizer);
        CertifiedInterval upper_solve = solve_mdp(min_fixed, obj, schedule.eps_mdp);

        clamp_bounds(res.lower, res.upper, x, upper_solve.upper);

        // Local improvement of the Maximizer against tau: switch only on a
        // strict improvement, keeping the previous choice on ties.
        const double margin = kArgoptTol + schedule.eps_mdp;
        for (int s = 0; s < n; ++s) {
            if (g.owner(s) != Player::Maximizer) continue;
            Value current = q_value(g, x, s, profile[s]);
            Value best = current;
            int best_a = profile[s];
            for (int a = 0; a < g.num_actions(s); ++a) {
                Value v = q_value(g, x, s, a);
                if (v > best + margin) {
                    best = v;
                    best_a = a;
                }
            }
            profile[s] = best_a;
        }

        if (config.record_trace) res.trace.push_back({i, res.lower[s0], res.upper[s0]});
        if (config.inspect) config.inspect(i, res.lower, res.upper);
        double gap = res.gap(s0);
        if (gap <= eps) {
            res.status = SolveStatus::Converged;
            res.profile = profile;
            return res;
        }
        schedule.observe(i, gap);
    }
    res.status = SolveStatus::IterationCapped;
    res.profile = profile;
    return res;
}

}  // namespace sgsolver
