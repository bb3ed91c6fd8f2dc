#include "sgsolver/bellman.hpp"

#include <cmath>

namespace sgsolver {

Assignment init_vi(const StochasticGame& g, const Objective& obj) {
    Assignment x(g.num_states(), 0.0);
    switch (obj.kind) {
        case ObjectiveKind::Reachability:
            for (int t : obj.target) x[t] = 1.0;
            break;
        case ObjectiveKind::Safety:
            x.assign(g.num_states(), 1.0);
            for (int t : obj.target) x[t] = 0.0;
            break;
        case ObjectiveKind::TotalReward:
        case ObjectiveKind::MeanPayoff:
            break;
    }
    return x;
}

Assignment init_upper(const StochasticGame& g, const Objective& obj) {
    double bound = 1.0;
    switch (obj.kind) {
        case ObjectiveKind::Reachability:
        case ObjectiveKind::Safety:
            bound = 1.0;
            break;
        case ObjectiveKind::MeanPayoff:
            bound = g.max_reward();
            break;
        case ObjectiveKind::TotalReward: {
            double r_max = g.num_states() * g.max_reward();
            if (r_max == 0.0) {
                bound = 0.0;
            } else {
                // Every |S|-step epoch pays at most R_max and survives with
                // probability at most 1-q, so the total is bounded by the
                // geometric series over all epochs including the first.
                double q = std::pow(g.min_positive_probability(), g.num_states());
                bound = r_max / q;
            }
            break;
        }
    }
    return Assignment(g.num_states(), bound);
}

Value q_value(const StochasticGame& g, const Assignment& f, int s, int a) {
    Value sum = 0.0;
    for (const auto& [succ, p] : g.dist(s, a)) {
        if (f[succ] == kInf) return kInf;  // p > 0 by construction
        sum += p * f[succ];
    }
    return sum;
}

namespace {

Assignment sweep(const StochasticGame& g, const Assignment& x, bool add_reward) {
    Assignment out(g.num_states());
    for (int s = 0; s < g.num_states(); ++s) {
        const bool maximize = g.owner(s) == Player::Maximizer;
        Value best = q_value(g, x, s, 0);
        for (int a = 1; a < g.num_actions(s); ++a) {
            Value v = q_value(g, x, s, a);
            if (maximize ? v > best : v < best) best = v;
        }
        out[s] = add_reward ? g.reward(s) + best : best;
    }
    return out;
}

}  // namespace

Assignment bellman_update(const StochasticGame& g, const Objective& obj, const Assignment& x) {
    return sweep(g, x, obj.uses_reward());
}

Assignment fixpoint_update(const StochasticGame& g, const Objective& obj, const Assignment& f) {
    return sweep(g, f, obj.kind == ObjectiveKind::TotalReward);
}

void bellman_update_gauss_seidel(const StochasticGame& g, const Objective& obj, Assignment& x) {
    const bool add_reward = obj.uses_reward();
    for (int s = 0; s < g.num_states(); ++s) {
        const bool maximize = g.owner(s) == Player::Maximizer;
        Value best = q_value(g, x, s, 0);
        for (int a = 1; a < g.num_actions(s); ++a) {
            Value v = q_value(g, x, s, a);
            if (maximize ? v > best : v < best) best = v;
        }
        x[s] = add_reward ? g.reward(s) + best : best;
    }
}

StrategyProfile initial_profile(const StochasticGame& g) {
    return StrategyProfile(g.num_states(), 0);
}

void recommend(const StochasticGame& g, const Objective& obj, const Assignment& x,
               RecommenderState& state) {
    if (state.profile.empty()) state.profile = initial_profile(g);
    for (int s = 0; s < g.num_states(); ++s) {
        const bool maximize = g.owner(s) == Player::Maximizer;
        Value best = q_value(g, x, s, 0);
        for (int a = 1; a < g.num_actions(s); ++a) {
            Value v = q_value(g, x, s, a);
            if (maximize ? v > best : v < best) best = v;
        }
        int prev = state.profile[s];
        Value prev_v = q_value(g, x, s, prev);
        bool prev_ok;
        if (best == kInf)
            prev_ok = prev_v == kInf;
        else
            prev_ok = std::abs(prev_v - best) <= kArgoptTol;
        if (!prev_ok) {
            // Smallest index in the argopt set.
            for (int a = 0; a < g.num_actions(s); ++a) {
                Value v = q_value(g, x, s, a);
                bool member = best == kInf ? v == kInf : std::abs(v - best) <= kArgoptTol;
                if (member) {
                    state.profile[s] = a;
                    break;
                }
            }
        }
    }
    (void)obj;  // the offset is uniform per state, so argopt is offset-invariant
}

}  // namespace sgsolver
