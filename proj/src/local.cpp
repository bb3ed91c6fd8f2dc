#include "sgsolver/local.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "sgsolver/bellman.hpp"
#include "sgsolver/oracle.hpp"

namespace sgsolver {

namespace {

bool close_or_both_inf(Value a, Value b, double tol) {
    if (a == kInf || b == kInf) return a == b;
    return std::abs(a - b) <= tol;
}

}  // namespace

SecCandidate make_sec_candidate(const StochasticGame& g, EndComponent ec, Player fixed_player) {
    SecCandidate cand;
    cand.fixed_player = fixed_player;
    for (int s : ec.states) {
        for (int a = 0; a < g.num_actions(s); ++a) {
            bool exits = false;
            for (const auto& [succ, p] : g.dist(s, a))
                if (!ec.contains(succ)) { exits = true; break; }
            if (!exits) continue;
            if (g.owner(s) == Player::Maximizer)
                cand.max_exits.emplace_back(s, a);
            else
                cand.min_exits.emplace_back(s, a);
        }
    }
    cand.ec = std::move(ec);
    return cand;
}

Value exit_value(const StochasticGame& g, const Assignment& f, const EndComponent& ec,
                 Player player) {
    Value best = player == Player::Maximizer ? -kInf : kInf;
    for (int s : ec.states) {
        if (g.owner(s) != player) continue;
        for (int a = 0; a < g.num_actions(s); ++a) {
            bool exits = false;
            for (const auto& [succ, p] : g.dist(s, a))
                if (!ec.contains(succ)) { exits = true; break; }
            if (!exits) continue;
            Value v = q_value(g, f, s, a);
            best = player == Player::Maximizer ? std::max(best, v) : std::min(best, v);
        }
    }
    return best;
}

std::vector<StayValue> staying_value(const StochasticGame& g, const EndComponent& ec,
                                     const Objective& obj, Player optimizer, StayMode mode,
                                     const StayBoundsParams* params, Assignment* iterate_out) {
    if (!is_valid_ec(g, ec))
        throw std::invalid_argument("staying_value: not a valid end component");
    const size_t m = ec.states.size();
    auto constant = [m](Value v) { return std::vector<StayValue>(m, StayValue{v, v, true}); };

    switch (obj.kind) {
        case ObjectiveKind::Reachability: {
            bool has_target = false;
            for (int s : ec.states)
                if (obj.is_target(s)) has_target = true;
            return constant(has_target ? 1.0 : 0.0);
        }
        case ObjectiveKind::Safety: {
            bool has_avoid = false;
            for (int s : ec.states)
                if (obj.is_target(s)) has_avoid = true;
            return constant(has_avoid ? 0.0 : 1.0);
        }
        case ObjectiveKind::TotalReward: {
            bool positive = false;
            for (int s : ec.states)
                if (g.reward(s) > 0.0) positive = true;
            if (optimizer == Player::Maximizer) return constant(positive ? kInf : 0.0);
            if (!positive) return constant(0.0);
            // Minimizer perspective: finite iff the Minimizer can confine the
            // play to a zero-reward sub-EC of the restriction.
            auto restricted = restrict_to(g, ec);
            bool avoidable = !msecs(restricted, obj, Player::Minimizer).empty();
            return constant(avoidable ? 0.0 : kInf);
        }
        case ObjectiveKind::MeanPayoff: {
            auto restricted = restrict_to(g, ec);
            if (mode == StayMode::Bounds) {
                StayBoundsParams defaults;
                const StayBoundsParams& p = params ? *params : defaults;
                auto span = mean_payoff_span(restricted, p.eps, p.warm_start, p.stop);
                if (iterate_out) *iterate_out = std::move(span.iterate);
                return std::vector<StayValue>(
                    m, StayValue{span.lower, span.upper, span.converged || span.early_stopped});
            }
            // Exact mode supports two-owner restrictions via the brute-force
            // oracle (desk scale by construction).
            auto oracle = exact_value(restricted, obj);
            std::vector<StayValue> out(m);
            for (size_t i = 0; i < m; ++i)
                out[i] = StayValue{oracle.value[i], oracle.value[i], true};
            return out;
        }
    }
    throw std::logic_error("unreachable");
}

Assignment deflate(const StochasticGame& g, const Assignment& u_hat, const SecCandidate& cand,
                   const std::vector<StayValue>& stay) {
    Assignment u = u_hat;
    Value exit_max = exit_value(g, u_hat, cand.ec, Player::Maximizer);
    for (size_t i = 0; i < cand.ec.states.size(); ++i) {
        int s = cand.ec.states[i];
        u[s] = std::min(u_hat[s], std::max(stay[i].upper, exit_max));
    }
    return u;
}

Assignment inflate(const StochasticGame& g, const Assignment& l_hat, const SecCandidate& cand,
                   const std::vector<StayValue>& stay) {
    Assignment l = l_hat;
    Value exit_min = exit_value(g, l_hat, cand.ec, Player::Minimizer);
    for (size_t i = 0; i < cand.ec.states.size(); ++i) {
        int s = cand.ec.states[i];
        l[s] = std::max(l_hat[s], std::min(stay[i].lower, exit_min));
    }
    return l;
}

bool is_sec_for(const StochasticGame& g, const Assignment& f, const Objective& obj,
                const EndComponent& ec) {
    bool fixpoint_form = true;
    for (const auto& [s, a] : ec.actions) {
        Value rhs = obj.offset(g, s) + q_value(g, f, s, a);
        if (!close_or_both_inf(f[s], rhs, 1e-9)) {
            fixpoint_form = false;
            break;
        }
    }
    assert(fixpoint_form == is_sec_for_equal_values(g, f, obj, ec));
    return fixpoint_form;
}

bool is_sec_for_equal_values(const StochasticGame& g, const Assignment& f, const Objective& obj,
                             const EndComponent& ec) {
    for (int s : ec.states)
        if (std::abs(obj.offset(g, s)) > 1e-9) return false;
    for (size_t i = 1; i < ec.states.size(); ++i)
        if (!close_or_both_inf(f[ec.states[i]], f[ec.states[0]], 1e-9)) return false;
    return true;
}

std::optional<EndComponent> find_spurious_fixpoint_sec(const StochasticGame& g,
                                                       const Objective& obj, const Assignment& f,
                                                       const Assignment& reference) {
    const int n = g.num_states();
    Assignment fixed = fixpoint_update(g, obj, f);
    for (int s = 0; s < n; ++s)
        if (!close_or_both_inf(f[s], fixed[s], 1e-9))
            throw std::invalid_argument("find_spurious_fixpoint_sec: f is not a fixpoint");

    // Differences; +inf disagreements dominate.
    std::vector<double> d(n);
    for (int s = 0; s < n; ++s) {
        if (f[s] == kInf || reference[s] == kInf)
            d[s] = f[s] == reference[s] ? 0.0 : (f[s] == kInf ? kInf : -kInf);
        else
            d[s] = f[s] - reference[s];
    }
    double d_max = *std::max_element(d.begin(), d.end());
    double d_min = *std::min_element(d.begin(), d.end());
    if (std::max(d_max, -d_min) <= 1e-6) return std::nullopt;

    const bool upper_side = d_max > 1e-6;
    const double extreme = upper_side ? d_max : d_min;
    std::vector<char> in_set(n, 0);
    for (int s = 0; s < n; ++s) {
        if (extreme == kInf || extreme == -kInf)
            in_set[s] = d[s] == extreme;
        else
            in_set[s] = std::abs(d[s] - extreme) <= 1e-9;
    }

    // Witness action per member: the proof construction uses f-witnesses for
    // the player whose optimum f overestimates and reference-witnesses for
    // the other; both stay inside the extremal set.
    std::vector<int> witness(n, -1);
    for (int s = 0; s < n; ++s) {
        if (!in_set[s]) continue;
        const bool use_f_witness = (g.owner(s) == Player::Maximizer) == upper_side;
        const Assignment& base = use_f_witness ? f : reference;
        int inside = -1;
        for (int a = 0; a < g.num_actions(s); ++a) {
            Value rhs = obj.offset(g, s) + q_value(g, base, s, a);
            if (!close_or_both_inf(base[s], rhs, 1e-9)) continue;
            bool stays = true;
            for (const auto& [succ, p] : g.dist(s, a))
                if (!in_set[succ]) { stays = false; break; }
            if (stays) {
                inside = a;
                break;
            }
        }
        if (inside < 0)
            throw std::logic_error("find_spurious_fixpoint_sec: no interior witness action");
        witness[s] = inside;
    }

    // The witness choices form a chain on the extremal set; its bottom SCCs
    // are SECs for f.
    std::vector<int> members, to_sub(n, -1);
    for (int s = 0; s < n; ++s) {
        if (!in_set[s]) continue;
        to_sub[s] = static_cast<int>(members.size());
        members.push_back(s);
    }
    std::vector<StateRecord> chain_states;
    for (int s : members) {
        StateRecord st;
        st.label = g.label(s);
        ActionRecord act;
        for (const auto& [succ, p] : g.dist(s, witness[s])) act.dist.emplace_back(to_sub[succ], p);
        st.actions.push_back(std::move(act));
        chain_states.push_back(std::move(st));
    }
    auto bottoms = bsccs(StochasticGame(std::move(chain_states)));
    if (bottoms.empty())
        throw std::logic_error("find_spurious_fixpoint_sec: witness chain has no bottom component");
    EndComponent ec;
    for (int sub : bottoms[0]) {
        int s = members[sub];
        ec.states.push_back(s);
        ec.actions.emplace_back(s, witness[s]);
    }
    std::sort(ec.states.begin(), ec.states.end());
    std::sort(ec.actions.begin(), ec.actions.end());
    return ec;
}

namespace {

// Per-EC precision schedule and warm starts, keyed by the EC's state set.
struct EcMemory {
    std::map<std::vector<int>, double> precision;
    std::map<std::vector<int>, Assignment> warm;

    double next_precision(const std::vector<int>& key, double initial) {
        auto [it, fresh] = precision.try_emplace(key, initial);
        double use = it->second;
        // Finer on the next revisit; floored at the resolution the span
        // iteration can actually certify in 64-bit floats.
        it->second = std::max(use * 0.5, 1e-12);
        return use;
    }
};

Assignment restrict_assignment(const Assignment& full, const EndComponent& ec) {
    Assignment out(ec.states.size());
    for (size_t i = 0; i < ec.states.size(); ++i) out[i] = full[ec.states[i]];
    return out;
}

}  // namespace

SolveResult bvi_local(const StochasticGame& g, const Objective& obj, int s0, double eps,
                      const SolveConfig& config) {
    if (s0 < 0 || s0 >= g.num_states())
        throw std::invalid_argument("initial state index out of range");
    if (!(eps > 0.0)) throw std::invalid_argument("epsilon must be positive");
    const int n = g.num_states();

    // VI iterates double as one of the bounds except for mean payoff.
    const bool vi_is_lower =
        obj.kind == ObjectiveKind::Reachability || obj.kind == ObjectiveKind::TotalReward;
    const bool vi_is_upper = obj.kind == ObjectiveKind::Safety;
    const bool run_upper_side = !vi_is_upper;
    const bool run_lower_side = !vi_is_lower;

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
    res.upper = init_upper(g, obj);

    // Qualitative preprocessing: reachability values are 0 outside the
    // Maximizer's positive attractor of the target; dually safety values are
    // 1 where the Minimizer cannot reach the avoid set at all.
    if (obj.kind == ObjectiveKind::Reachability) {
        std::vector<char> can(n, 0);
        for (int s : positive_attractor(g, obj.target, Player::Maximizer)) can[s] = 1;
        for (int s = 0; s < n; ++s)
            if (!can[s]) res.upper[s] = 0.0;
    } else if (obj.kind == ObjectiveKind::Safety) {
        std::vector<char> can(n, 0);
        for (int s : positive_attractor(g, obj.target, Player::Minimizer)) can[s] = 1;
        for (int s = 0; s < n; ++s)
            if (!can[s]) res.lower[s] = 1.0;
    }

    EcMemory upper_memory, lower_memory;

    for (long i = 1; i <= config.iteration_cap; ++i) {
        res.iterations = i;
        recommender(g, obj, x, rec);  // witnesses of the upcoming sweep
        if (config.gauss_seidel)
            bellman_update_gauss_seidel(g, obj, x);
        else
            x = bellman_update(g, obj, x);

        if (vi_is_lower)
            res.lower = x;
        else if (vi_is_upper)
            res.upper = x;

        if (run_upper_side) {
            StochasticGame min_fixed = induce(g, rec.profile, Player::Minimizer);
            Assignment u_hat = fixpoint_update(min_fixed, obj, res.upper);
            if (config.monotone)
                for (int s = 0; s < n; ++s) u_hat[s] = std::min(u_hat[s], res.upper[s]);
            Assignment u_next = u_hat;
            for (auto& ec : msecs(min_fixed, obj, Player::Maximizer)) {
                SecCandidate cand = make_sec_candidate(min_fixed, ec, Player::Minimizer);
                std::vector<StayValue> stay;
                if (obj.kind == ObjectiveKind::MeanPayoff) {
                    StayBoundsParams params;
                    params.eps = upper_memory.next_precision(cand.ec.states, eps);
                    Assignment warm;
                    auto it = upper_memory.warm.find(cand.ec.states);
                    warm = it != upper_memory.warm.end() ? it->second
                                                         : restrict_assignment(x, cand.ec);
                    params.warm_start = &warm;
                    params.stop = StopThreshold{StopThreshold::Kind::UpperBelow,
                                                exit_value(min_fixed, u_hat, cand.ec,
                                                           Player::Maximizer)};
                    Assignment iterate;
                    stay = staying_value(min_fixed, cand.ec, obj, Player::Maximizer,
                                         StayMode::Bounds, &params, &iterate);
                    upper_memory.warm[cand.ec.states] = std::move(iterate);
                } else {
                    stay = staying_value(min_fixed, cand.ec, obj, Player::Maximizer);
                    if (stay[0].upper == kInf) continue;  // deflation would be a no-op
                }
                Assignment deflated = deflate(min_fixed, u_hat, cand, stay);
                for (int s : cand.ec.states) u_next[s] = deflated[s];
            }
            res.upper = std::move(u_next);
        }

        if (run_lower_side) {
            StochasticGame max_fixed = induce(g, rec.profile, Player::Maximizer);
            Assignment l_hat = fixpoint_update(max_fixed, obj, res.lower);
            if (config.monotone)
                for (int s = 0; s < n; ++s) l_hat[s] = std::max(l_hat[s], res.lower[s]);
            Assignment l_next = l_hat;
            for (auto& ec : msecs(max_fixed, obj, Player::Minimizer)) {
                SecCandidate cand = make_sec_candidate(max_fixed, ec, Player::Maximizer);
                std::vector<StayValue> stay;
                if (obj.kind == ObjectiveKind::MeanPayoff) {
                    StayBoundsParams params;
                    params.eps = lower_memory.next_precision(cand.ec.states, eps);
                    Assignment warm;
                    auto it = lower_memory.warm.find(cand.ec.states);
                    warm = it != lower_memory.warm.end() ? it->second
                                                         : restrict_assignment(x, cand.ec);
                    params.warm_start = &warm;
                    params.stop = StopThreshold{StopThreshold::Kind::LowerAbove,
                                                exit_value(max_fixed, l_hat, cand.ec,
                                                           Player::Minimizer)};
                    Assignment iterate;
                    stay = staying_value(max_fixed, cand.ec, obj, Player::Minimizer,
                                         StayMode::Bounds, &params, &iterate);
                    lower_memory.warm[cand.ec.states] = std::move(iterate);
                } else {
                    stay = staying_value(max_fixed, cand.ec, obj, Player::Minimizer);
                }
                Assignment inflated = inflate(max_fixed, l_hat, cand, stay);
                for (int s : cand.ec.states) l_next[s] = inflated[s];
            }
            res.lower = std::move(l_next);
        }

        if (config.record_trace) res.trace.push_back({i, res.lower[s0], res.upper[s0]});
        if (config.inspect) config.inspect(i, res.lower, res.upper);
        if (res.gap(s0) <= eps) {
            res.status = SolveStatus::Converged;
            res.profile = rec.profile;
            return res;
        }
    }
    res.status = SolveStatus::IterationCapped;
    res.profile = rec.profile;
    return res;
}

}  // namespace sgsolver
