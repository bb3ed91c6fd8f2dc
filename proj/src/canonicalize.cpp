#include <algorithm>
#include <stdexcept>

#include "sgsolver/graph.hpp"
#include "sgsolver/model.hpp"

namespace sgsolver {

namespace {

std::pair<StochasticGame, CanonReport> canonicalize_targets(const StochasticGame& g,
                                                            const Objective& obj) {
    if (obj.target.empty())
        throw std::invalid_argument("reachability/safety objective needs a non-empty target set");
    CanonReport report;
    report.index_map.resize(g.num_states());
    for (int s = 0; s < g.num_states(); ++s) report.index_map[s] = s;

    std::vector<StateRecord> states = g.states();
    for (int t : obj.target) {
        if (t < 0 || t >= g.num_states())
            throw std::invalid_argument("target state index out of range");
        auto& st = states[t];
        bool absorbing = st.actions.size() == 1 && st.actions[0].dist.size() == 1 &&
                         st.actions[0].dist[0].first == t;
        if (!absorbing) {
            st.actions = {ActionRecord{"loop", {{t, 1.0}}}};
            report.made_absorbing.push_back(t);
        }
    }
    return {StochasticGame(std::move(states)), std::move(report)};
}

std::pair<StochasticGame, CanonReport> canonicalize_total_reward(const StochasticGame& g) {
    CanonReport report;
    auto infinite = infinite_total_reward_states(g);
    const int n = g.num_states();
    std::vector<char> removed(n, 0);
    for (int s : infinite) removed[s] = 1;
    report.removed_infinite = infinite;
    report.index_map.assign(n, -1);
    if (infinite.empty()) {
        for (int s = 0; s < n; ++s) report.index_map[s] = s;
        return {g, std::move(report)};
    }
    if (static_cast<int>(infinite.size()) == n) {
        // Nothing finite remains; a trivial zero state keeps the canonical
        // game well-formed while every query answers +inf via the report.
        StateRecord sink;
        sink.label = "__finite";
        sink.actions.push_back({"loop", {{0, 1.0}}});
        return {StochasticGame({sink}), std::move(report)};
    }

    std::vector<StateRecord> states;
    for (int s = 0; s < n; ++s) {
        if (removed[s]) continue;
        report.index_map[s] = static_cast<int>(states.size());
        states.push_back(g.state(s));
    }
    for (auto& st : states) {
        std::vector<ActionRecord> kept;
        for (auto& act : st.actions) {
            bool touches = false;
            for (auto& [succ, p] : act.dist)
                if (removed[succ]) { touches = true; break; }
            if (!touches) kept.push_back(std::move(act));
        }
        // A surviving Maximizer state never has an action into the removed
        // set (it would be in the attractor); a surviving Minimizer state
        // keeps at least one avoiding action for the same reason.
        if (kept.empty())
            throw std::logic_error("infinite-state removal left a state without actions");
        st.actions = std::move(kept);
        for (auto& act : st.actions)
            for (auto& [succ, p] : act.dist) succ = report.index_map[succ];
    }
    return {StochasticGame(std::move(states)), std::move(report)};
}

}  // namespace

std::pair<StochasticGame, CanonReport> canonicalize(const StochasticGame& g, const Objective& obj) {
    switch (obj.kind) {
        case ObjectiveKind::Reachability:
        case ObjectiveKind::Safety:
            return canonicalize_targets(g, obj);
        case ObjectiveKind::TotalReward:
            return canonicalize_total_reward(g);
        case ObjectiveKind::MeanPayoff: {
            CanonReport report;
            report.index_map.resize(g.num_states());
            for (int s = 0; s < g.num_states(); ++s) report.index_map[s] = s;
            double min_reward = 0.0;
            for (int s = 0; s < g.num_states(); ++s)
                min_reward = std::min(min_reward, g.reward(s));
            if (min_reward >= 0.0) return {g, std::move(report)};
            report.reward_shift = -min_reward;
            return {rescale_rewards(g, 1.0, report.reward_shift), std::move(report)};
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace sgsolver
