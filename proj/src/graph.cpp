#include "sgsolver/graph.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <stdexcept>

namespace sgsolver {

namespace {

// Tarjan over an explicit adjacency list restricted to `alive` nodes.
std::vector<std::vector<int>> sccs(const std::vector<std::vector<int>>& adj,
                                   const std::vector<char>& alive) {
    const int n = static_cast<int>(adj.size());
    std::vector<int> index(n, -1), low(n, 0), stack;
    std::vector<char> on_stack(n, 0);
    std::vector<std::vector<int>> out;
    int counter = 0;

    // Iterative Tarjan to avoid deep recursion on long chains.
    struct Frame {
        int v;
        size_t edge;
    };
    for (int root = 0; root < n; ++root) {
        if (!alive[root] || index[root] != -1) continue;
        std::vector<Frame> frames{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!frames.empty()) {
            Frame& f = frames.back();
            if (f.edge < adj[f.v].size()) {
                int w = adj[f.v][f.edge++];
                if (!alive[w]) continue;
                if (index[w] == -1) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
            } else {
                if (low[f.v] == index[f.v]) {
                    std::vector<int> comp;
                    int w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                        comp.push_back(w);
                    } while (w != f.v);
                    std::sort(comp.begin(), comp.end());
                    out.push_back(std::move(comp));
                }
                int v = f.v;
                frames.pop_back();
                if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
            }
        }
    }
    return out;
}

std::vector<char> mask_of(const std::vector<int>& states, int n) {
    std::vector<char> m(n, 0);
    for (int s : states) m[s] = 1;
    return m;
}

}  // namespace

bool EndComponent::contains(int s) const {
    return std::binary_search(states.begin(), states.end(), s);
}

bool EndComponent::has_action(int s, int a) const {
    return std::binary_search(actions.begin(), actions.end(), std::make_pair(s, a));
}

bool is_valid_ec(const StochasticGame& g, const EndComponent& ec) {
    if (ec.states.empty() || ec.actions.empty()) return false;
    const int n = g.num_states();
    auto in = mask_of(ec.states, n);
    std::vector<char> has_act(n, 0);
    for (const auto& [s, a] : ec.actions) {
        if (s < 0 || s >= n || a < 0 || a >= g.num_actions(s)) return false;
        if (!in[s]) return false;
        for (const auto& [succ, p] : g.dist(s, a))
            if (!in[succ]) return false;  // closure
        has_act[s] = 1;
    }
    for (int s : ec.states)
        if (!has_act[s]) return false;
    // Strong connectivity using only B-actions.
    std::vector<std::vector<int>> adj(n);
    for (const auto& [s, a] : ec.actions)
        for (const auto& [succ, p] : g.dist(s, a)) adj[s].push_back(succ);
    auto comps = sccs(adj, in);
    return comps.size() == 1 && comps[0] == ec.states;
}

std::vector<EndComponent> mecs(const StochasticGame& g) {
    const int n = g.num_states();
    std::deque<std::vector<int>> work;
    {
        std::vector<int> all(n);
        for (int s = 0; s < n; ++s) all[s] = s;
        work.push_back(std::move(all));
    }
    std::vector<EndComponent> result;

    while (!work.empty()) {
        std::vector<int> cand = std::move(work.front());
        work.pop_front();

        // Prune states without an internal action until stable.
        auto in = mask_of(cand, n);
        bool changed = true;
        while (changed) {
            changed = false;
            for (int s : cand) {
                if (!in[s]) continue;
                bool has_internal = false;
                for (int a = 0; a < g.num_actions(s) && !has_internal; ++a) {
                    bool stays = true;
                    for (const auto& [succ, p] : g.dist(s, a))
                        if (!in[succ]) { stays = false; break; }
                    has_internal = stays;
                }
                if (!has_internal) {
                    in[s] = 0;
                    changed = true;
                }
            }
        }
        std::vector<int> pruned;
        for (int s : cand)
            if (in[s]) pruned.push_back(s);
        if (pruned.empty()) continue;

        std::vector<std::vector<int>> adj(n);
        for (int s : pruned) {
            for (int a = 0; a < g.num_actions(s); ++a) {
                bool stays = true;
                for (const auto& [succ, p] : g.dist(s, a))
                    if (!in[succ]) { stays = false; break; }
                if (stays)
                    for (const auto& [succ, p] : g.dist(s, a)) adj[s].push_back(succ);
            }
        }
        auto comps = sccs(adj, in);
        if (comps.size() == 1 && comps[0] == pruned && pruned == cand) {
            EndComponent ec;
            ec.states = pruned;
            for (int s : pruned) {
                for (int a = 0; a < g.num_actions(s); ++a) {
                    bool stays = true;
                    for (const auto& [succ, p] : g.dist(s, a))
                        if (!in[succ]) { stays = false; break; }
                    if (stays) ec.actions.emplace_back(s, a);
                }
            }
            result.push_back(std::move(ec));
        } else {
            for (auto& c : comps) work.push_back(std::move(c));
        }
    }
    std::sort(result.begin(), result.end(),
              [](const EndComponent& a, const EndComponent& b) { return a.states[0] < b.states[0]; });
    return result;
}

std::vector<std::vector<int>> bsccs(const StochasticGame& chain) {
    const int n = chain.num_states();
    for (int s = 0; s < n; ++s)
        if (chain.num_actions(s) != 1)
            throw std::invalid_argument("bsccs: state " + chain.label(s) +
                                        " has more than one action");
    std::vector<std::vector<int>> adj(n);
    for (int s = 0; s < n; ++s)
        for (const auto& [succ, p] : chain.dist(s, 0)) adj[s].push_back(succ);
    std::vector<char> alive(n, 1);
    auto comps = sccs(adj, alive);
    std::vector<std::vector<int>> out;
    for (auto& comp : comps) {
        auto in = mask_of(comp, n);
        bool bottom = true;
        for (int s : comp)
            for (int succ : adj[s])
                if (!in[succ]) { bottom = false; break; }
        // A singleton without a self-loop is not strongly connected.
        if (comp.size() == 1) {
            bool self = false;
            for (int succ : adj[comp[0]])
                if (succ == comp[0]) self = true;
            if (!self) continue;
        }
        if (bottom) out.push_back(std::move(comp));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> positive_attractor(const StochasticGame& g, const std::vector<int>& target,
                                    Player player) {
    const int n = g.num_states();
    std::vector<char> in = mask_of(target, n);
    bool changed = true;
    while (changed) {
        changed = false;
        for (int s = 0; s < n; ++s) {
            if (in[s]) continue;
            bool add;
            if (g.owner(s) == player) {
                add = false;
                for (int a = 0; a < g.num_actions(s) && !add; ++a)
                    for (const auto& [succ, p] : g.dist(s, a))
                        if (in[succ]) { add = true; break; }
            } else {
                add = true;
                for (int a = 0; a < g.num_actions(s) && add; ++a) {
                    bool hits = false;
                    for (const auto& [succ, p] : g.dist(s, a))
                        if (in[succ]) { hits = true; break; }
                    add = hits;
                }
            }
            if (add) {
                in[s] = 1;
                changed = true;
            }
        }
    }
    std::vector<int> out;
    for (int s = 0; s < n; ++s)
        if (in[s]) out.push_back(s);
    return out;
}

std::vector<char> can_reach(const StochasticGame& g, const std::vector<int>& target) {
    const int n = g.num_states();
    std::vector<char> in = mask_of(target, n);
    bool changed = true;
    while (changed) {
        changed = false;
        for (int s = 0; s < n; ++s) {
            if (in[s]) continue;
            for (int a = 0; a < g.num_actions(s) && !in[s]; ++a)
                for (const auto& [succ, p] : g.dist(s, a))
                    if (in[succ]) {
                        in[s] = 1;
                        changed = true;
                        break;
                    }
        }
    }
    return in;
}

namespace {

// MECs of the sub-structure spanned by `allowed` states. Actions leaving the
// set are redirected to a fresh absorbing sink, which keeps every state's
// action list non-empty and automatically disqualifies leaving actions from
// any EC. Used for MSEC computation.
std::vector<EndComponent> mecs_within(const StochasticGame& g, const std::vector<char>& allowed) {
    const int n = g.num_states();
    std::vector<int> to_sub(n, -1), to_orig;
    for (int s = 0; s < n; ++s) {
        if (!allowed[s]) continue;
        to_sub[s] = static_cast<int>(to_orig.size());
        to_orig.push_back(s);
    }
    if (to_orig.empty()) return {};
    const int sink = static_cast<int>(to_orig.size());
    std::vector<StateRecord> states;
    for (int s : to_orig) {
        StateRecord st;
        st.label = g.label(s);
        st.owner = g.owner(s);
        for (int a = 0; a < g.num_actions(s); ++a) {
            ActionRecord act;
            double leak = 0.0;
            for (const auto& [succ, p] : g.dist(s, a)) {
                if (allowed[succ])
                    act.dist.emplace_back(to_sub[succ], p);
                else
                    leak += p;
            }
            if (leak > 0.0) act.dist.emplace_back(sink, leak);
            st.actions.push_back(std::move(act));
        }
        states.push_back(std::move(st));
    }
    StateRecord sk;
    sk.label = "__sink";
    sk.actions.push_back({"", {{sink, 1.0}}});
    states.push_back(std::move(sk));

    StochasticGame sub(std::move(states));
    std::vector<EndComponent> out;
    for (auto& m : mecs(sub)) {
        if (m.contains(sink)) continue;
        EndComponent ec;
        for (int s : m.states) ec.states.push_back(to_orig[s]);
        for (const auto& [s, a] : m.actions) ec.actions.emplace_back(to_orig[s], a);
        std::sort(ec.states.begin(), ec.states.end());
        std::sort(ec.actions.begin(), ec.actions.end());
        out.push_back(std::move(ec));
    }
    std::sort(out.begin(), out.end(),
              [](const EndComponent& a, const EndComponent& b) { return a.states[0] < b.states[0]; });
    return out;
}

}  // namespace

std::vector<EndComponent> msecs(const StochasticGame& mdp, const Objective& obj, Player optimizer) {
    for (int s = 0; s < mdp.num_states(); ++s)
        if (mdp.owner(s) != optimizer && mdp.num_actions(s) > 1)
            throw std::invalid_argument("msecs: input is not an induced MDP for the given player");
    if (obj.kind != ObjectiveKind::TotalReward || optimizer == Player::Maximizer) return mecs(mdp);
    // Total reward, Minimizer optimizing: MECs after deleting positive-reward
    // states.
    std::vector<char> allowed(mdp.num_states(), 0);
    for (int s = 0; s < mdp.num_states(); ++s) allowed[s] = mdp.reward(s) == 0.0;
    return mecs_within(mdp, allowed);
}

namespace {

// Sub-arena in which the protagonist only uses actions that stay inside and
// the antagonist cannot leave at all: protagonist states keep at least one
// inside action (else they are removed), antagonist states must have every
// action inside (else they are removed). Removal iterates to a fixpoint.
struct Arena {
    std::vector<char> states;                // membership
    std::vector<std::vector<char>> actions;  // usable actions per state
};

Arena make_arena(const StochasticGame& g, std::vector<char> states, Player protagonist) {
    const int n = g.num_states();
    bool changed = true;
    while (changed) {
        changed = false;
        for (int s = 0; s < n; ++s) {
            if (!states[s]) continue;
            bool any_inside = false, all_inside = true;
            for (int act = 0; act < g.num_actions(s); ++act) {
                bool stays = true;
                for (const auto& [succ, p] : g.dist(s, act))
                    if (!states[succ]) { stays = false; break; }
                any_inside |= stays;
                all_inside &= stays;
            }
            bool keep = g.owner(s) == protagonist ? any_inside : all_inside;
            if (!keep) {
                states[s] = 0;
                changed = true;
            }
        }
    }
    Arena a;
    a.actions.assign(n, {});
    for (int s = 0; s < n; ++s) {
        if (!states[s]) continue;
        a.actions[s].assign(g.num_actions(s), 0);
        for (int act = 0; act < g.num_actions(s); ++act) {
            bool stays = true;
            for (const auto& [succ, p] : g.dist(s, act))
                if (!states[succ]) { stays = false; break; }
            a.actions[s][act] = stays;
        }
    }
    a.states = std::move(states);
    return a;
}

// Positive attractor of `target` for `player` using only usable actions.
std::vector<char> arena_positive_attractor(const StochasticGame& g, const Arena& arena,
                                           const std::vector<char>& target, Player player) {
    const int n = g.num_states();
    std::vector<char> in(n, 0);
    for (int s = 0; s < n; ++s) in[s] = arena.states[s] && target[s];
    bool changed = true;
    while (changed) {
        changed = false;
        for (int s = 0; s < n; ++s) {
            if (!arena.states[s] || in[s]) continue;
            bool add;
            if (g.owner(s) == player) {
                add = false;
                for (int a = 0; a < g.num_actions(s) && !add; ++a) {
                    if (!arena.actions[s][a]) continue;
                    for (const auto& [succ, p] : g.dist(s, a))
                        if (in[succ]) { add = true; break; }
                }
            } else {
                add = true;
                for (int a = 0; a < g.num_actions(s) && add; ++a) {
                    if (!arena.actions[s][a]) continue;
                    bool hits = false;
                    for (const auto& [succ, p] : g.dist(s, a))
                        if (in[succ]) { hits = true; break; }
                    add = hits;
                }
            }
            if (add) {
                in[s] = 1;
                changed = true;
            }
        }
    }
    return in;
}

// States of the arena from which the protagonist almost-surely reaches
// `target`: repeatedly remove the antagonist's positive attractor of the
// zero-probability region.
std::vector<char> arena_almost_sure_reach(const StochasticGame& g, Arena arena,
                                          const std::vector<char>& target, Player protagonist) {
    const int n = g.num_states();
    while (true) {
        auto can = arena_positive_attractor(g, arena, target, protagonist);
        std::vector<char> zero(n, 0);
        bool any_zero = false;
        for (int s = 0; s < n; ++s)
            if (arena.states[s] && !can[s]) { zero[s] = 1; any_zero = true; }
        if (!any_zero) return arena.states;
        auto bad = arena_positive_attractor(g, arena, zero, opponent(protagonist));
        std::vector<char> remaining = arena.states;
        for (int s = 0; s < n; ++s)
            if (bad[s]) remaining[s] = 0;
        arena = make_arena(g, std::move(remaining), protagonist);
    }
}

}  // namespace

namespace {

// Materialized sub-game spanned by `keep`, with the Minimizer restricted to
// actions that stay inside (the Maximizer must have no leaving action, which
// callers guarantee by passing attractor complements).
struct Subgame {
    StochasticGame game;
    std::vector<int> to_orig;
};

Subgame make_min_trimmed_subgame(const StochasticGame& g, const std::vector<char>& keep) {
    const int n = g.num_states();
    std::vector<int> to_sub(n, -1), to_orig;
    for (int s = 0; s < n; ++s) {
        if (!keep[s]) continue;
        to_sub[s] = static_cast<int>(to_orig.size());
        to_orig.push_back(s);
    }
    std::vector<StateRecord> states;
    for (int s : to_orig) {
        StateRecord st;
        st.label = g.label(s);
        st.owner = g.owner(s);
        st.reward = g.reward(s);
        for (int a = 0; a < g.num_actions(s); ++a) {
            bool stays = true;
            for (const auto& [succ, p] : g.dist(s, a))
                if (!keep[succ]) { stays = false; break; }
            if (!stays) continue;  // only Minimizer actions can leave here
            ActionRecord act;
            act.name = g.action(s, a).name;
            for (const auto& [succ, p] : g.dist(s, a)) act.dist.emplace_back(to_sub[succ], p);
            st.actions.push_back(std::move(act));
        }
        states.push_back(std::move(st));
    }
    return Subgame{StochasticGame(std::move(states)), std::move(to_orig)};
}

// Region where the Maximizer wins "visit `target` infinitely often" with
// probability one: shrink the candidate set to the states that almost-surely
// re-reach the target inside the closed arena, to a fixpoint.
std::vector<char> almost_sure_buechi_max(const StochasticGame& g,
                                         const std::vector<char>& target) {
    const int n = g.num_states();
    std::vector<char> candidate(n, 1);
    while (true) {
        Arena arena = make_arena(g, candidate, Player::Maximizer);
        std::vector<char> live(n, 0);
        for (int s = 0; s < n; ++s) live[s] = arena.states[s] && target[s];
        auto winning = arena_almost_sure_reach(g, arena, live, Player::Maximizer);
        if (winning == candidate) return candidate;
        candidate = std::move(winning);
    }
}

}  // namespace

std::vector<int> infinite_total_reward_states(const StochasticGame& g) {
    // The total reward is infinite exactly where the Maximizer can make the
    // play visit positive-reward states infinitely often with positive
    // probability. Least fixpoint: repeatedly carve out the positive
    // attractor of the region won so far, and inside the remainder (with the
    // Minimizer restricted to staying, since leaving enters the attractor
    // and is already a positive win for the Maximizer) add the almost-sure
    // recurrence core.
    const int n = g.num_states();
    std::vector<char> won(n, 0);
    while (true) {
        std::vector<int> won_list;
        for (int s = 0; s < n; ++s)
            if (won[s]) won_list.push_back(s);
        std::vector<char> attractor(n, 0);
        for (int s : positive_attractor(g, won_list, Player::Maximizer)) attractor[s] = 1;

        std::vector<char> remainder(n, 0);
        bool any = false;
        for (int s = 0; s < n; ++s) {
            remainder[s] = !attractor[s];
            any |= remainder[s];
        }
        if (!any) break;

        Subgame sub = make_min_trimmed_subgame(g, remainder);
        std::vector<char> target(sub.game.num_states(), 0);
        for (int i = 0; i < sub.game.num_states(); ++i)
            target[i] = sub.game.reward(i) > 0.0;
        auto core = almost_sure_buechi_max(sub.game, target);
        bool grew = false;
        for (int i = 0; i < sub.game.num_states(); ++i) {
            if (core[i] && !won[sub.to_orig[i]]) {
                won[sub.to_orig[i]] = 1;
                grew = true;
            }
        }
        if (!grew) break;
    }
    std::vector<int> won_list;
    for (int s = 0; s < n; ++s)
        if (won[s]) won_list.push_back(s);
    if (won_list.empty()) return {};
    return positive_attractor(g, won_list, Player::Maximizer);
}

StochasticGame restrict_to(const StochasticGame& g, const EndComponent& ec) {
    if (!is_valid_ec(g, ec)) throw std::invalid_argument("restrict_to: not a valid end component");
    const int n = g.num_states();
    std::vector<int> to_sub(n, -1);
    for (size_t i = 0; i < ec.states.size(); ++i) to_sub[ec.states[i]] = static_cast<int>(i);
    std::vector<StateRecord> states;
    for (int s : ec.states) {
        StateRecord st;
        st.label = g.label(s);
        st.owner = g.owner(s);
        st.reward = g.reward(s);
        for (int a = 0; a < g.num_actions(s); ++a) {
            if (!ec.has_action(s, a)) continue;
            ActionRecord act;
            act.name = g.action(s, a).name;
            for (const auto& [succ, p] : g.dist(s, a)) act.dist.emplace_back(to_sub[succ], p);
            st.actions.push_back(std::move(act));
        }
        states.push_back(std::move(st));
    }
    return StochasticGame(std::move(states));
}

}  // namespace sgsolver
