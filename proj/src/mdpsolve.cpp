#include "sgsolver/mdpsolve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

#include "sgsolver/bellman.hpp"

namespace sgsolver {

namespace {

using Rational = boost::multiprecision::cpp_rational;

double habs(double x) { return std::abs(x); }
Rational habs(const Rational& x) { return x < 0 ? Rational(-x) : x; }

/// Best rational approximation with bounded denominator (continued
/// fractions); falls back to the exact binary expansion of the double when
/// the input is not a small fraction.
Rational to_rational(double x, long long max_den = 1000000) {
    if (!std::isfinite(x)) throw std::invalid_argument("to_rational: non-finite input");
    if (x == 0.0) return Rational(0);
    const bool neg = x < 0.0;
    const double v = neg ? -x : x;

    long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double frac = v;
    for (int it = 0; it < 64; ++it) {
        double fl = std::floor(frac);
        if (fl > 4.0e18) break;
        long long a = static_cast<long long>(fl);
        if (q1 != 0 && a > (4000000000000000000LL) / q1) break;
        long long p2 = a * p1 + p0;
        long long q2 = a * q1 + q0;
        if (q2 > max_den) break;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        double rem = frac - fl;
        if (rem < 1e-12) break;
        frac = 1.0 / rem;
    }
    if (q1 > 0) {
        double approx = static_cast<double>(p1) / static_cast<double>(q1);
        if (std::abs(approx - v) <= 1e-12 * std::max(1.0, v)) {
            Rational r(p1, q1);
            return neg ? Rational(-r) : r;
        }
    }
    // Exact binary representation of the double.
    int exp = 0;
    double m = std::frexp(v, &exp);
    auto mantissa = static_cast<long long>(std::ldexp(m, 53));
    exp -= 53;
    Rational r(mantissa);
    boost::multiprecision::cpp_int two(2);
    if (exp >= 0)
        r *= Rational(boost::multiprecision::pow(two, exp));
    else
        r /= Rational(boost::multiprecision::pow(two, -exp));
    return neg ? Rational(-r) : r;
}

template <class T>
std::vector<T> linear_solve(std::vector<std::vector<T>> a, std::vector<T> b) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (habs(a[r][col]) > habs(a[pivot][col])) pivot = r;
        if (habs(a[pivot][col]) <= T(0))
            throw std::runtime_error("linear_solve: singular system");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (int r = col + 1; r < n; ++r) {
            if (a[r][col] == T(0)) continue;
            T f = a[r][col] / a[col][col];
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<T> x(n, T(0));
    for (int r = n - 1; r >= 0; --r) {
        T acc = b[r];
        for (int c = r + 1; c < n; ++c) acc -= a[r][c] * x[c];
        x[r] = acc / a[r][r];
    }
    return x;
}

// Double pivots below this threshold count as singular; the mean-payoff path
// then falls back to power iteration.
constexpr double kPivotTol = 1e-12;

std::vector<double> linear_solve_checked(std::vector<std::vector<double>> a, std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < kPivotTol)
            throw std::runtime_error("linear_solve: singular system");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (int r = col + 1; r < n; ++r) {
            if (a[r][col] == 0.0) continue;
            double f = a[r][col] / a[col][col];
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[r];
        for (int c = r + 1; c < n; ++c) acc -= a[r][c] * x[c];
        x[r] = acc / a[r][r];
    }
    return x;
}

template <class T>
struct TChain {
    std::vector<std::vector<std::pair<int, T>>> succ;
    std::vector<T> reward;
};

TChain<double> make_chain_view_double(const StochasticGame& g) {
    TChain<double> c;
    c.succ.resize(g.num_states());
    c.reward.resize(g.num_states());
    for (int s = 0; s < g.num_states(); ++s) {
        c.reward[s] = g.reward(s);
        for (const auto& [succ, p] : g.dist(s, 0)) c.succ[s].emplace_back(succ, p);
    }
    return c;
}

TChain<Rational> make_chain_view_rational(const StochasticGame& g) {
    TChain<Rational> c;
    c.succ.resize(g.num_states());
    c.reward.resize(g.num_states());
    for (int s = 0; s < g.num_states(); ++s) {
        c.reward[s] = to_rational(g.reward(s));
        Rational sum(0);
        for (const auto& [succ, p] : g.dist(s, 0)) {
            Rational w = to_rational(p);
            c.succ[s].emplace_back(succ, w);
            sum += w;
        }
        for (auto& [succ, w] : c.succ[s]) w /= sum;  // sums to one exactly
    }
    return c;
}

template <class T>
T transition(const TChain<T>& c, int from, int to) {
    for (const auto& [succ, p] : c.succ[from])
        if (succ == to) return p;
    return T(0);
}

/// Hitting probabilities of `value_one` states, given `value_zero` states
/// (probability 0); every remaining state must be transient w.r.t. the two
/// boundary sets.
template <class T>
std::vector<T> chain_hitting(const TChain<T>& c, const std::vector<char>& value_one,
                             const std::vector<char>& value_zero) {
    const int n = static_cast<int>(c.succ.size());
    std::vector<int> tr;
    for (int s = 0; s < n; ++s)
        if (!value_one[s] && !value_zero[s]) tr.push_back(s);
    std::vector<T> x(n, T(0));
    for (int s = 0; s < n; ++s)
        if (value_one[s]) x[s] = T(1);
    if (tr.empty()) return x;
    const int m = static_cast<int>(tr.size());
    std::vector<std::vector<T>> a(m, std::vector<T>(m, T(0)));
    std::vector<T> b(m, T(0));
    for (int i = 0; i < m; ++i) {
        a[i][i] = T(1);
        for (const auto& [succ, p] : c.succ[tr[i]]) {
            if (value_one[succ]) {
                b[i] += p;
            } else if (!value_zero[succ]) {
                int j = static_cast<int>(std::lower_bound(tr.begin(), tr.end(), succ) - tr.begin());
                a[i][j] -= p;
            }
        }
    }
    auto sol = linear_solve(a, b);
    for (int i = 0; i < m; ++i) x[tr[i]] = sol[i];
    return x;
}

/// Expected accumulated value until absorption: x = reward + Q x with the
/// given boundary values on `fixed` states.
template <class T>
std::vector<T> chain_accumulate(const TChain<T>& c, const std::vector<char>& fixed,
                                const std::vector<T>& fixed_value, bool use_reward) {
    const int n = static_cast<int>(c.succ.size());
    std::vector<int> tr;
    for (int s = 0; s < n; ++s)
        if (!fixed[s]) tr.push_back(s);
    std::vector<T> x(n, T(0));
    for (int s = 0; s < n; ++s)
        if (fixed[s]) x[s] = fixed_value[s];
    if (tr.empty()) return x;
    const int m = static_cast<int>(tr.size());
    std::vector<std::vector<T>> a(m, std::vector<T>(m, T(0)));
    std::vector<T> b(m, T(0));
    for (int i = 0; i < m; ++i) {
        a[i][i] = T(1);
        if (use_reward) b[i] = c.reward[tr[i]];
        for (const auto& [succ, p] : c.succ[tr[i]]) {
            if (fixed[succ]) {
                b[i] += p * fixed_value[succ];
            } else {
                int j = static_cast<int>(std::lower_bound(tr.begin(), tr.end(), succ) - tr.begin());
                a[i][j] -= p;
            }
        }
    }
    auto sol = linear_solve(a, b);
    for (int i = 0; i < m; ++i) x[tr[i]] = sol[i];
    return x;
}

/// Stationary distribution of a single BSCC, exact version.
std::vector<Rational> stationary_rational(const TChain<Rational>& c, const std::vector<int>& bscc) {
    const int m = static_cast<int>(bscc.size());
    std::vector<std::vector<Rational>> a(m, std::vector<Rational>(m, Rational(0)));
    std::vector<Rational> b(m, Rational(0));
    for (int i = 0; i + 1 < m; ++i) {
        for (int j = 0; j < m; ++j) a[i][j] = transition(c, bscc[j], bscc[i]);
        a[i][i] -= Rational(1);
    }
    for (int j = 0; j < m; ++j) a[m - 1][j] = Rational(1);
    b[m - 1] = Rational(1);
    return linear_solve(a, b);
}

std::vector<double> stationary_double(const TChain<double>& c, const std::vector<int>& bscc) {
    const int m = static_cast<int>(bscc.size());
    std::vector<std::vector<double>> a(m, std::vector<double>(m, 0.0));
    std::vector<double> b(m, 0.0);
    for (int i = 0; i + 1 < m; ++i) {
        for (int j = 0; j < m; ++j) a[i][j] = transition(c, bscc[j], bscc[i]);
        a[i][i] -= 1.0;
    }
    for (int j = 0; j < m; ++j) a[m - 1][j] = 1.0;
    b[m - 1] = 1.0;
    try {
        return linear_solve_checked(a, b);
    } catch (const std::runtime_error&) {
        // Power iteration on the lazy chain (I+P)/2, which is aperiodic and
        // has the same stationary distribution.
        std::vector<double> pi(m, 1.0 / m), next(m, 0.0);
        for (long it = 0; it < 2000000; ++it) {
            std::fill(next.begin(), next.end(), 0.0);
            for (int j = 0; j < m; ++j) {
                next[j] += 0.5 * pi[j];
                for (int i = 0; i < m; ++i)
                    next[i] += 0.5 * pi[j] * transition(c, bscc[j], bscc[i]);
            }
            double delta = 0.0;
            for (int i = 0; i < m; ++i) delta = std::max(delta, std::abs(next[i] - pi[i]));
            pi.swap(next);
            if (delta < 1e-12) break;
        }
        return pi;
    }
}

template <class T>
std::vector<T> solve_mc_impl(const StochasticGame& chain, const TChain<T>& c, const Objective& obj,
                             std::vector<char>* infinite_out) {
    const int n = chain.num_states();
    switch (obj.kind) {
        case ObjectiveKind::Reachability:
        case ObjectiveKind::Safety: {
            std::vector<char> one(n, 0), zero(n, 0);
            auto reachable = can_reach(chain, obj.target);
            for (int t : obj.target) one[t] = 1;
            for (int s = 0; s < n; ++s)
                if (!reachable[s]) zero[s] = 1;
            auto x = chain_hitting(c, one, zero);
            if (obj.kind == ObjectiveKind::Safety)
                for (auto& v : x) v = T(1) - v;
            return x;
        }
        case ObjectiveKind::TotalReward: {
            auto comps = bsccs(chain);
            std::vector<char> in_pos(n, 0), in_zero(n, 0);
            for (const auto& comp : comps) {
                bool pos = false;
                for (int s : comp)
                    if (chain.reward(s) > 0.0) pos = true;
                for (int s : comp) (pos ? in_pos : in_zero)[s] = 1;
            }
            std::vector<int> pos_states;
            for (int s = 0; s < n; ++s)
                if (in_pos[s]) pos_states.push_back(s);
            auto divergent = can_reach(chain, pos_states);
            if (infinite_out) *infinite_out = divergent;
            std::vector<char> fixed(n, 0);
            std::vector<T> fixed_value(n, T(0));
            for (int s = 0; s < n; ++s)
                if (divergent[s] || in_zero[s]) fixed[s] = 1;  // divergent handled by caller
            auto x = chain_accumulate(c, fixed, fixed_value, true);
            return x;
        }
        case ObjectiveKind::MeanPayoff: {
            auto comps = bsccs(chain);
            std::vector<char> fixed(n, 0);
            std::vector<T> fixed_value(n, T(0));
            for (const auto& comp : comps) {
                std::vector<T> pi;
                if constexpr (std::is_same_v<T, double>)
                    pi = stationary_double(c, comp);
                else
                    pi = stationary_rational(c, comp);
                T gain(0);
                for (size_t i = 0; i < comp.size(); ++i) gain += pi[i] * c.reward[comp[i]];
                for (int s : comp) {
                    fixed[s] = 1;
                    fixed_value[s] = gain;
                }
            }
            return chain_accumulate(c, fixed, fixed_value, false);
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace

Value CertifiedInterval::max_width() const {
    Value w = 0.0;
    for (size_t s = 0; s < lower.size(); ++s) {
        if (lower[s] == upper[s]) continue;  // covers the +inf == +inf case
        w = std::max(w, upper[s] - lower[s]);
    }
    return w;
}

Assignment solve_mc(const StochasticGame& chain, const Objective& obj, NumberMode mode) {
    if (!chain.is_markov_chain())
        throw std::invalid_argument("solve_mc: input has a state with multiple actions");
    std::vector<char> infinite;
    Assignment out(chain.num_states());
    if (mode == NumberMode::Float64) {
        auto c = make_chain_view_double(chain);
        auto x = solve_mc_impl(chain, c, obj, &infinite);
        for (int s = 0; s < chain.num_states(); ++s) out[s] = x[s];
    } else {
        auto c = make_chain_view_rational(chain);
        auto x = solve_mc_impl(chain, c, obj, &infinite);
        for (int s = 0; s < chain.num_states(); ++s) out[s] = x[s].convert_to<double>();
    }
    if (obj.kind == ObjectiveKind::TotalReward)
        for (int s = 0; s < chain.num_states(); ++s)
            if (infinite[s]) out[s] = kInf;
    return out;
}

SpanResult mean_payoff_span(const StochasticGame& mdp, double eps, const Assignment* warm_start,
                            std::optional<StopThreshold> stop, long sweep_cap) {
    if (!(eps > 0.0)) throw std::invalid_argument("mean_payoff_span: eps must be positive");
    if (!mdp.is_mdp_for(Player::Maximizer) && !mdp.is_mdp_for(Player::Minimizer))
        throw std::invalid_argument("mean_payoff_span: two-owner input");
    if (warm_start && static_cast<int>(warm_start->size()) != mdp.num_states())
        throw std::invalid_argument("mean_payoff_span: warm start has wrong dimension");

    const StochasticGame transformed = aperiodicity_transform(mdp, 0.5);
    const Objective mp = Objective::mean_payoff();
    SpanResult res;
    res.iterate = warm_start ? *warm_start : Assignment(mdp.num_states(), 0.0);
    for (res.sweeps = 1; res.sweeps <= sweep_cap; ++res.sweeps) {
        Assignment next = bellman_update(transformed, mp, res.iterate);
        double lo = kInf, hi = -kInf;
        for (int s = 0; s < mdp.num_states(); ++s) {
            double d = next[s] - res.iterate[s];
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        // Relative value iteration: renormalize against a reference state.
        // The update commutes with uniform shifts, so the difference vector
        // is unchanged while the iterate magnitudes stay bounded (long runs
        // would otherwise drown the differences in rounding noise).
        const double shift = next[0];
        for (auto& v : next) v -= shift;
        res.iterate = std::move(next);
        res.lower = lo;
        res.upper = hi;
        if (hi - lo <= eps) {
            res.converged = true;
            return res;
        }
        if (stop) {
            if (stop->kind == StopThreshold::Kind::UpperBelow && hi < stop->value) {
                res.early_stopped = true;
                return res;
            }
            if (stop->kind == StopThreshold::Kind::LowerAbove && lo > stop->value) {
                res.early_stopped = true;
                return res;
            }
        }
    }
    res.sweeps = sweep_cap;
    return res;  // non-converged
}

bool MecQuotient::is_terminal(int qs) const {
    for (int t : terminal_of_ec)
        if (t == qs) return true;
    return false;
}

MecQuotient mec_quotient(const StochasticGame& mdp, const std::vector<EndComponent>& ecs,
                         const std::vector<std::pair<double, double>>& stay, Player optimizer) {
    if (ecs.size() != stay.size())
        throw std::invalid_argument("mec_quotient: one staying value per EC required");
    const int n = mdp.num_states();
    std::vector<int> state_map(n, -1);
    std::vector<int> rep_of_ec(ecs.size(), -1);
    std::vector<int> terminal_of_ec(ecs.size(), -1);

    std::vector<int> ec_of(n, -1);
    for (size_t k = 0; k < ecs.size(); ++k)
        for (int s : ecs[k].states) ec_of[s] = static_cast<int>(k);

    std::vector<StateRecord> states;
    for (int s = 0; s < n; ++s) {
        int k = ec_of[s];
        if (k < 0) {
            state_map[s] = static_cast<int>(states.size());
            StateRecord st;
            st.label = mdp.label(s);
            st.owner = mdp.owner(s);
            st.reward = mdp.reward(s);
            states.push_back(std::move(st));
        } else if (rep_of_ec[k] < 0) {
            rep_of_ec[k] = static_cast<int>(states.size());
            StateRecord st;
            st.label = "ec" + std::to_string(k);
            st.owner = optimizer;
            st.reward = 0.0;
            states.push_back(std::move(st));
        }
    }
    for (int s = 0; s < n; ++s)
        if (ec_of[s] >= 0) state_map[s] = rep_of_ec[ec_of[s]];
    for (size_t k = 0; k < ecs.size(); ++k) {
        terminal_of_ec[k] = static_cast<int>(states.size());
        StateRecord st;
        st.label = "stay" + std::to_string(k);
        st.owner = optimizer;
        st.reward = 0.0;
        states.push_back(std::move(st));
    }

    std::vector<std::vector<std::pair<int, int>>> action_source(states.size());
    auto redirect = [&](int s, int a) {
        ActionRecord act;
        act.name = mdp.action(s, a).name;
        std::vector<double> mass(states.size(), 0.0);
        for (const auto& [succ, p] : mdp.dist(s, a)) mass[state_map[succ]] += p;
        for (size_t t = 0; t < mass.size(); ++t)
            if (mass[t] > 0.0) act.dist.emplace_back(static_cast<int>(t), mass[t]);
        return act;
    };

    for (int s = 0; s < n; ++s) {
        if (ec_of[s] >= 0) continue;
        int qs = state_map[s];
        for (int a = 0; a < mdp.num_actions(s); ++a) {
            states[qs].actions.push_back(redirect(s, a));
            action_source[qs].emplace_back(s, a);
        }
    }
    for (size_t k = 0; k < ecs.size(); ++k) {
        int rep = rep_of_ec[k];
        for (int s : ecs[k].states) {
            for (int a = 0; a < mdp.num_actions(s); ++a) {
                bool exits = false;
                for (const auto& [succ, p] : mdp.dist(s, a))
                    if (ec_of[succ] != static_cast<int>(k)) { exits = true; break; }
                if (!exits) continue;
                states[rep].actions.push_back(redirect(s, a));
                action_source[rep].emplace_back(s, a);
            }
        }
        ActionRecord stay_act;
        stay_act.name = "stay";
        stay_act.dist.emplace_back(terminal_of_ec[k], 1.0);
        states[rep].actions.push_back(std::move(stay_act));
        action_source[rep].emplace_back(-1, static_cast<int>(k));

        auto& term = states[terminal_of_ec[k]];
        term.actions.push_back({"", {{terminal_of_ec[k], 1.0}}});
        action_source[terminal_of_ec[k]].emplace_back(-2, -2);
    }
    return MecQuotient{StochasticGame(std::move(states)), std::move(state_map),
                       std::move(rep_of_ec), std::move(terminal_of_ec), stay,
                       std::move(action_source)};
}

namespace {

Player mdp_optimizer(const StochasticGame& g) {
    bool maxi = false, mini = false;
    for (int s = 0; s < g.num_states(); ++s) {
        if (g.num_actions(s) <= 1) continue;
        (g.owner(s) == Player::Maximizer ? maxi : mini) = true;
    }
    if (maxi && mini) throw std::invalid_argument("solve_mdp: two-owner input");
    return mini ? Player::Minimizer : Player::Maximizer;
}

struct CoreResult {
    CertifiedInterval interval;  // on original states
    bool chain_delegate = false;
    Player optimizer = Player::Maximizer;
    std::vector<char> infinite;  // total reward only
    std::optional<MecQuotient> quotient;
    Assignment qlower, qupper;
    std::vector<EndComponent> collapsed;
    std::vector<Assignment> span_iterates;  // mean payoff, per collapsed EC
};

constexpr long kQuotientSweepCap = 10000000;

/// Returns true when the requested width was reached, false when the sweep
/// cap was exhausted or the iterates stopped moving at the floating-point
/// resolution. The bounds are sound either way.
bool iterate_quotient(const StochasticGame& qg, bool add_reward, const std::vector<char>& frozen,
                      double eps, Assignment& lower, Assignment& upper) {
    const int n = qg.num_states();
    auto width_ok = [&]() {
        for (int s = 0; s < n; ++s) {
            if (lower[s] == upper[s]) continue;
            if (upper[s] - lower[s] > eps) return false;
        }
        return true;
    };
    for (long sweep = 0; sweep < kQuotientSweepCap; ++sweep) {
        if (width_ok()) return true;
        Assignment nl(n), nu(n);
        for (int s = 0; s < n; ++s) {
            if (frozen[s]) {
                nl[s] = lower[s];
                nu[s] = upper[s];
                continue;
            }
            const bool maximize = qg.owner(s) == Player::Maximizer;
            Value bl = q_value(qg, lower, s, 0), bu = q_value(qg, upper, s, 0);
            for (int a = 1; a < qg.num_actions(s); ++a) {
                Value vl = q_value(qg, lower, s, a), vu = q_value(qg, upper, s, a);
                if (maximize ? vl > bl : vl < bl) bl = vl;
                if (maximize ? vu > bu : vu < bu) bu = vu;
            }
            double r = add_reward ? qg.reward(s) : 0.0;
            nl[s] = r + bl;
            nu[s] = r + bu;
        }
        if (nl == lower && nu == upper) return false;  // stalled at float resolution
        lower = std::move(nl);
        upper = std::move(nu);
    }
    return false;
}

CoreResult solve_mdp_core(const StochasticGame& mdp, const Objective& obj, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("solve_mdp: eps must be positive");
    CoreResult res;
    res.optimizer = mdp_optimizer(mdp);
    const int n = mdp.num_states();

    if (mdp.is_markov_chain()) {
        res.chain_delegate = true;
        Assignment v = solve_mc(mdp, obj);
        res.interval = {v, v};
        return res;
    }

    std::vector<EndComponent> ecs;
    std::vector<std::pair<double, double>> stay;

    switch (obj.kind) {
        case ObjectiveKind::Reachability:
        case ObjectiveKind::Safety: {
            ecs = mecs(mdp);
            for (const auto& ec : ecs) {
                bool has_target = false;
                for (int s : ec.states)
                    if (obj.is_target(s)) has_target = true;
                double v = obj.kind == ObjectiveKind::Reachability ? (has_target ? 1.0 : 0.0)
                                                                   : (has_target ? 0.0 : 1.0);
                stay.emplace_back(v, v);
            }
            break;
        }
        case ObjectiveKind::TotalReward: {
            auto inf_states = infinite_total_reward_states(mdp);
            res.infinite.assign(n, 0);
            for (int s : inf_states) res.infinite[s] = 1;
            for (auto& ec : msecs(mdp, obj, res.optimizer)) {
                if (res.infinite[ec.states[0]]) continue;  // pinned to +inf as states
                ecs.push_back(std::move(ec));
                stay.emplace_back(0.0, 0.0);
            }
            break;
        }
        case ObjectiveKind::MeanPayoff: {
            ecs = mecs(mdp);
            for (const auto& ec : ecs) {
                auto restricted = restrict_to(mdp, ec);
                auto span = mean_payoff_span(restricted, eps / 2.0);
                if (!span.converged) res.interval.precise = false;  // sound, just wider
                stay.emplace_back(span.lower, span.upper);
                res.span_iterates.push_back(std::move(span.iterate));
            }
            break;
        }
    }

    res.quotient = mec_quotient(mdp, ecs, stay, res.optimizer);
    res.collapsed = std::move(ecs);
    const auto& q = *res.quotient;
    const int qn = q.game.num_states();

    std::vector<char> frozen(qn, 0);
    Assignment lower(qn, 0.0), upper(qn, 0.0);
    double cap;
    switch (obj.kind) {
        case ObjectiveKind::Reachability:
        case ObjectiveKind::Safety: cap = 1.0; break;
        case ObjectiveKind::MeanPayoff: cap = mdp.max_reward(); break;
        case ObjectiveKind::TotalReward: cap = init_upper(mdp, obj)[0]; break;
    }
    std::fill(upper.begin(), upper.end(), cap);
    for (size_t k = 0; k < res.collapsed.size(); ++k) {
        int t = q.terminal_of_ec[k];
        frozen[t] = 1;
        lower[t] = q.terminal_value[k].first;
        upper[t] = q.terminal_value[k].second;
    }
    for (int s = 0; s < n; ++s) {
        if (!res.infinite.empty() && res.infinite[s]) {
            int qs = q.state_map[s];
            frozen[qs] = 1;
            lower[qs] = kInf;
            upper[qs] = kInf;
        }
    }

    // Qualitative preprocessing: value can only originate at terminals, so
    // quotient states that cannot reach a positive (resp. sub-one) terminal
    // are exactly 0 (resp. 1).
    if (obj.kind == ObjectiveKind::Reachability || obj.kind == ObjectiveKind::Safety) {
        std::vector<int> sources;
        for (size_t k = 0; k < res.collapsed.size(); ++k) {
            if (obj.kind == ObjectiveKind::Reachability && q.terminal_value[k].second > 0.0)
                sources.push_back(q.terminal_of_ec[k]);
            if (obj.kind == ObjectiveKind::Safety && q.terminal_value[k].first < 1.0)
                sources.push_back(q.terminal_of_ec[k]);
        }
        auto touched = can_reach(q.game, sources);
        for (int qs = 0; qs < qn; ++qs) {
            if (frozen[qs] || touched[qs]) continue;
            if (obj.kind == ObjectiveKind::Reachability)
                upper[qs] = 0.0;
            else
                lower[qs] = 1.0;
            frozen[qs] = 1;
        }
    }

    if (!iterate_quotient(q.game, obj.kind == ObjectiveKind::TotalReward, frozen, eps, lower,
                          upper))
        res.interval.precise = false;
    res.qlower = lower;
    res.qupper = upper;

    res.interval.lower.resize(n);
    res.interval.upper.resize(n);
    for (int s = 0; s < n; ++s) {
        res.interval.lower[s] = lower[q.state_map[s]];
        res.interval.upper[s] = upper[q.state_map[s]];
    }
    return res;  // interval.precise was cleared above if anything capped
}

/// Layered positive-progress ranks towards `targets` following only actions
/// in `usable`; rank[s] = least k such that some usable action has a
/// successor of rank < k. Unreachable states keep rank INT_MAX.
std::vector<int> progress_ranks(const StochasticGame& g,
                                const std::vector<std::vector<char>>& usable,
                                const std::vector<char>& targets) {
    const int n = g.num_states();
    constexpr int kUnranked = std::numeric_limits<int>::max();
    std::vector<int> rank(n, kUnranked);
    for (int s = 0; s < n; ++s)
        if (targets[s]) rank[s] = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int s = 0; s < n; ++s) {
            if (targets[s]) continue;
            int best = rank[s];
            for (int a = 0; a < g.num_actions(s); ++a) {
                if (!usable[s][a]) continue;
                int succ_best = kUnranked;
                for (const auto& [succ, p] : g.dist(s, a))
                    succ_best = std::min(succ_best, rank[succ]);
                if (succ_best != kUnranked) best = std::min(best, succ_best + 1);
            }
            if (best < rank[s]) {
                rank[s] = best;
                changed = true;
            }
        }
    }
    return rank;
}

StrategyProfile extract_policy(const StochasticGame& mdp, const Objective& obj,
                               const CoreResult& core) {
    const int n = mdp.num_states();
    StrategyProfile policy(n, 0);
    if (core.chain_delegate) return policy;

    const auto& q = *core.quotient;
    const StochasticGame& qg = q.game;
    const int qn = qg.num_states();

    double maxw = 0.0;
    for (int qs = 0; qs < qn; ++qs)
        if (core.qlower[qs] != core.qupper[qs])
            maxw = std::max(maxw, core.qupper[qs] - core.qlower[qs]);
    const double tol = 1e-9 + 2.0 * maxw;

    Assignment mid(qn);
    for (int qs = 0; qs < qn; ++qs)
        mid[qs] = core.qupper[qs] == kInf ? (core.qlower[qs] == kInf ? kInf : core.qlower[qs])
                                          : 0.5 * (core.qlower[qs] + core.qupper[qs]);

    // Optimal action sets w.r.t. the midpoint values.
    std::vector<std::vector<char>> optimal(qn);
    std::vector<char> targets(qn, 0);
    for (int qs = 0; qs < qn; ++qs) {
        optimal[qs].assign(qg.num_actions(qs), 0);
        if (q.is_terminal(qs) || qg.num_actions(qs) == 1) {
            optimal[qs].assign(qg.num_actions(qs), 1);
            if (q.is_terminal(qs)) targets[qs] = 1;
            continue;
        }
        const bool maximize = qg.owner(qs) == Player::Maximizer;
        Value best = q_value(qg, mid, qs, 0);
        for (int a = 1; a < qg.num_actions(qs); ++a) {
            Value v = q_value(qg, mid, qs, a);
            if (maximize ? v > best : v < best) best = v;
        }
        for (int a = 0; a < qg.num_actions(qs); ++a) {
            Value v = q_value(qg, mid, qs, a);
            optimal[qs][a] = best == kInf ? (v == kInf) : (std::abs(v - best) <= tol);
        }
    }

    auto rank = progress_ranks(qg, optimal, targets);
    std::vector<int> chosen(qn, 0);
    for (int qs = 0; qs < qn; ++qs) {
        int best_a = -1;
        long best_key = std::numeric_limits<long>::max();
        for (int a = 0; a < qg.num_actions(qs); ++a) {
            if (!optimal[qs][a]) continue;
            int succ_best = std::numeric_limits<int>::max();
            for (const auto& [succ, p] : qg.dist(qs, a))
                succ_best = std::min(succ_best, rank[succ]);
            long key = succ_best == std::numeric_limits<int>::max()
                           ? std::numeric_limits<long>::max() - 1
                           : succ_best;
            if (key < best_key) {
                best_key = key;
                best_a = a;
            }
        }
        if (best_a < 0)
            for (int a = 0; a < qg.num_actions(qs); ++a)
                if (optimal[qs][a]) { best_a = a; break; }
        chosen[qs] = best_a < 0 ? 0 : best_a;
    }

    // Map the quotient choice back to original states.
    std::vector<int> ec_of(n, -1);
    for (size_t k = 0; k < core.collapsed.size(); ++k)
        for (int s : core.collapsed[k].states) ec_of[s] = static_cast<int>(k);

    for (int s = 0; s < n; ++s) {
        if (ec_of[s] >= 0) continue;
        int qs = q.state_map[s];
        auto [os, oa] = q.action_source[qs][chosen[qs]];
        policy[s] = os == s ? oa : 0;
    }
    for (size_t k = 0; k < core.collapsed.size(); ++k) {
        const auto& ec = core.collapsed[k];
        int rep = q.rep_of_ec[k];
        auto [os, oa] = q.action_source[rep][chosen[rep]];
        if (os >= 0) {
            // Exit chosen: exit state plays it, everyone else navigates there.
            policy[os] = oa;
            std::vector<std::vector<char>> usable(n);
            std::vector<char> goal(n, 0);
            goal[os] = 1;
            for (int s = 0; s < n; ++s) usable[s].assign(mdp.num_actions(s), 0);
            for (const auto& [es, ea] : ec.actions) usable[es][ea] = 1;
            auto ranks = progress_ranks(mdp, usable, goal);
            for (int s : ec.states) {
                if (s == os) continue;
                int best_a = -1, best_rank = std::numeric_limits<int>::max();
                for (int a = 0; a < mdp.num_actions(s); ++a) {
                    if (!ec.has_action(s, a)) continue;
                    int succ_best = std::numeric_limits<int>::max();
                    for (const auto& [succ, p] : mdp.dist(s, a))
                        succ_best = std::min(succ_best, ranks[succ]);
                    if (succ_best < best_rank) {
                        best_rank = succ_best;
                        best_a = a;
                    }
                }
                policy[s] = best_a < 0 ? 0 : best_a;
            }
        } else if (os == -1) {
            // Stay chosen: remain inside the EC.
            if (obj.kind == ObjectiveKind::MeanPayoff && k < core.span_iterates.size()) {
                auto restricted = restrict_to(mdp, ec);
                const Assignment& it = core.span_iterates[k];
                for (size_t i = 0; i < ec.states.size(); ++i) {
                    int s = ec.states[i];
                    const bool maximize = restricted.owner(static_cast<int>(i)) == Player::Maximizer;
                    int best_a = -1;
                    Value best = 0.0;
                    int ri = static_cast<int>(i);
                    int local = 0;
                    for (int a = 0; a < mdp.num_actions(s); ++a) {
                        if (!ec.has_action(s, a)) continue;
                        Value v = q_value(restricted, it, ri, local);
                        if (best_a < 0 || (maximize ? v > best : v < best)) {
                            best = v;
                            best_a = a;
                        }
                        ++local;
                    }
                    policy[s] = best_a < 0 ? 0 : best_a;
                }
            } else {
                for (int s : ec.states)
                    for (int a = 0; a < mdp.num_actions(s); ++a)
                        if (ec.has_action(s, a)) {
                            policy[s] = a;
                            break;
                        }
            }
        }
    }
    return policy;
}

}  // namespace

CertifiedInterval solve_mdp(const StochasticGame& mdp, const Objective& obj, double eps) {
    return solve_mdp_core(mdp, obj, eps).interval;
}

MdpSolution solve_mdp_with_policy(const StochasticGame& mdp, const Objective& obj, double eps) {
    auto core = solve_mdp_core(mdp, obj, eps);
    MdpSolution sol;
    sol.policy = extract_policy(mdp, obj, core);
    sol.interval = std::move(core.interval);
    return sol;
}

}  // namespace sgsolver
