#include "sgsolver/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgsolver {

namespace {

// Odometer over the action counts of the given states.
struct ProfileIterator {
    std::vector<int> states;
    std::vector<int> counts;
    std::vector<int> current;
    bool done = false;

    ProfileIterator(const StochasticGame& g, Player player) {
        for (int s = 0; s < g.num_states(); ++s) {
            if (g.owner(s) != player) continue;
            states.push_back(s);
            counts.push_back(g.num_actions(s));
        }
        current.assign(states.size(), 0);
    }

    long count() const {
        long c = 1;
        for (int k : counts) c *= k;
        return c;
    }

    void write_into(StrategyProfile& profile) const {
        for (size_t i = 0; i < states.size(); ++i) profile[states[i]] = current[i];
    }

    void advance() {
        for (size_t i = 0; i < current.size(); ++i) {
            if (++current[i] < counts[i]) return;
            current[i] = 0;
        }
        done = true;
    }
};

bool close_or_both_inf(double a, double b, double tol) {
    if (a == kInf || b == kInf) return a == b;
    return std::abs(a - b) <= tol;
}

// Pointwise min/max with +inf awareness.
void pointwise_min(Assignment& into, const Assignment& other) {
    for (size_t s = 0; s < into.size(); ++s) into[s] = std::min(into[s], other[s]);
}
void pointwise_max(Assignment& into, const Assignment& other) {
    for (size_t s = 0; s < into.size(); ++s) into[s] = std::max(into[s], other[s]);
}

}  // namespace

OracleResult exact_value(const StochasticGame& g, const Objective& obj, long limit,
                         NumberMode mode) {
    const int n = g.num_states();
    long total = 1;
    for (int s = 0; s < n; ++s) {
        total *= g.num_actions(s);
        if (total > limit)
            throw std::invalid_argument("exact_value: profile count exceeds limit");
    }

    ProfileIterator sigma(g, Player::Maximizer);
    std::vector<Assignment> min_over_tau;   // per sigma: inf_tau v
    std::vector<Assignment> max_over_sigma; // per tau: sup_sigma v
    std::vector<StrategyProfile> sigmas, taus;

    StrategyProfile profile(n, 0);
    long evaluated = 0;
    for (; !sigma.done; sigma.advance()) {
        sigma.write_into(profile);
        Assignment m(n, kInf);
        ProfileIterator tau(g, Player::Minimizer);
        for (size_t ti = 0; !tau.done; tau.advance(), ++ti) {
            tau.write_into(profile);
            Assignment v = solve_mc(induce_chain(g, profile), obj, mode);
            ++evaluated;
            pointwise_min(m, v);
            if (sigmas.empty()) {
                StrategyProfile t(n, 0);
                tau.write_into(t);
                taus.push_back(t);
                max_over_sigma.emplace_back(n, -kInf);
            }
            pointwise_max(max_over_sigma[ti], v);
        }
        min_over_tau.push_back(std::move(m));
        StrategyProfile sp(n, 0);
        sigma.write_into(sp);
        sigmas.push_back(std::move(sp));
    }

    OracleResult res;
    res.profiles_evaluated = evaluated;
    res.value.assign(n, -kInf);
    for (const auto& m : min_over_tau) pointwise_max(res.value, m);
    Assignment infsup(n, kInf);
    for (const auto& m : max_over_sigma) pointwise_min(infsup, m);
    for (int s = 0; s < n; ++s)
        if (!close_or_both_inf(res.value[s], infsup[s], 1e-9))
            throw std::logic_error("exact_value: sup-inf and inf-sup disagree at state " +
                                   g.label(s));

    auto attains_lower = [&](const Assignment& m) {
        for (int s = 0; s < n; ++s) {
            if (res.value[s] == kInf) {
                if (m[s] != kInf) return false;
            } else if (m[s] < res.value[s] - 1e-9) {
                return false;
            }
        }
        return true;
    };
    auto attains_upper = [&](const Assignment& m) {
        for (int s = 0; s < n; ++s) {
            if (m[s] == kInf && res.value[s] != kInf) return false;
            if (m[s] != kInf && res.value[s] != kInf && m[s] > res.value[s] + 1e-9) return false;
        }
        return true;
    };
    res.max_witness.assign(n, 0);
    res.min_witness.assign(n, 0);
    bool found_sigma = false, found_tau = false;
    for (size_t i = 0; i < sigmas.size(); ++i)
        if (attains_lower(min_over_tau[i])) {
            res.max_witness = sigmas[i];
            found_sigma = true;
            break;
        }
    for (size_t i = 0; i < taus.size(); ++i)
        if (attains_upper(max_over_sigma[i])) {
            res.min_witness = taus[i];
            found_tau = true;
            break;
        }
    if (!found_sigma || !found_tau)
        throw std::logic_error("exact_value: no single witness profile attains the value");
    return res;
}

Assignment finite_horizon_value(const StochasticGame& g, const Objective& obj, int k) {
    if (k < 0 || k > 12)
        throw std::invalid_argument("finite_horizon_value: k must be in [0, 12]");
    const int n = g.num_states();
    const bool add_reward = obj.uses_reward();

    Assignment v(n, 0.0);
    switch (obj.kind) {
        case ObjectiveKind::Reachability:
            for (int t : obj.target) v[t] = 1.0;
            break;
        case ObjectiveKind::Safety:
            v.assign(n, 1.0);
            for (int t : obj.target) v[t] = 0.0;
            break;
        default:
            break;
    }
    for (int step = 0; step < k; ++step) {
        Assignment next(n, 0.0);
        for (int s = 0; s < n; ++s) {
            const bool maximize = g.owner(s) == Player::Maximizer;
            Value best = 0.0;
            for (int a = 0; a < g.num_actions(s); ++a) {
                Value q = 0.0;
                bool inf = false;
                for (const auto& [succ, p] : g.dist(s, a)) {
                    if (v[succ] == kInf) { inf = true; break; }
                    q += p * v[succ];
                }
                if (inf) q = kInf;
                if (a == 0 || (maximize ? q > best : q < best)) best = q;
            }
            next[s] = add_reward ? g.reward(s) + best : best;
        }
        v = std::move(next);
    }
    return v;
}

}  // namespace sgsolver
