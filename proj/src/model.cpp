#include "sgsolver/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "json.hpp"

namespace sgsolver {

namespace {

std::string format_double(double v, const char* fmt = "%.4g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

void normalize_dist(ActionRecord& action, const std::string& where) {
    if (action.dist.empty())
        throw std::invalid_argument("empty distribution at " + where);
    std::sort(action.dist.begin(), action.dist.end());
    double sum = 0.0;
    for (auto& [succ, p] : action.dist) {
        if (!(p >= 0.0 && p <= 1.0 + 1e-9))
            throw std::invalid_argument("probability " + format_double(p, "%.17g") +
                                        " outside [0,1] at " + where);
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("distribution sums to " + format_double(sum) + " at " + where);
    // Renormalize and pin the largest entry so the index-ordered sum is
    // exactly one.
    size_t largest = 0;
    for (size_t i = 1; i < action.dist.size(); ++i)
        if (action.dist[i].second > action.dist[largest].second) largest = i;
    double rest = 0.0;
    for (size_t i = 0; i < action.dist.size(); ++i) {
        if (i == largest) continue;
        action.dist[i].second /= sum;
        rest += action.dist[i].second;
    }
    action.dist[largest].second = 1.0 - rest;
    // Drop zero-probability entries (but never the pinned one).
    std::erase_if(action.dist, [](const auto& e) { return e.second == 0.0; });
}

}  // namespace

StochasticGame::StochasticGame(std::vector<StateRecord> states) : states_(std::move(states)) {
    if (states_.empty()) throw std::invalid_argument("empty game");
    const int n = num_states();
    for (int s = 0; s < n; ++s) {
        auto& st = states_[s];
        if (st.actions.empty())
            throw std::invalid_argument("state " + (st.label.empty() ? std::to_string(s) : st.label) +
                                        " has no actions");
        for (size_t a = 0; a < st.actions.size(); ++a) {
            for (auto& [succ, p] : st.actions[a].dist)
                if (succ < 0 || succ >= n)
                    throw std::invalid_argument("successor index " + std::to_string(succ) +
                                                " out of range at state " + std::to_string(s));
            normalize_dist(st.actions[a], st.label + "/" +
                                              (st.actions[a].name.empty() ? std::to_string(a)
                                                                          : st.actions[a].name));
        }
    }
}

int StochasticGame::find_label(const std::string& label) const {
    for (int s = 0; s < num_states(); ++s)
        if (states_[s].label == label) return s;
    return -1;
}

bool StochasticGame::is_markov_chain() const {
    for (const auto& st : states_)
        if (st.actions.size() != 1) return false;
    return true;
}

bool StochasticGame::is_mdp_for(Player p) const {
    for (const auto& st : states_)
        if (st.owner != p && st.actions.size() > 1) return false;
    return true;
}

double StochasticGame::min_positive_probability() const {
    double m = 1.0;
    for (const auto& st : states_)
        for (const auto& act : st.actions)
            for (const auto& [succ, pr] : act.dist)
                if (pr > 0.0) m = std::min(m, pr);
    return m;
}

double StochasticGame::max_reward() const {
    double m = 0.0;
    for (const auto& st : states_) m = std::max(m, st.reward);
    return m;
}

Objective Objective::reachability(std::vector<int> target) {
    std::sort(target.begin(), target.end());
    return Objective{ObjectiveKind::Reachability, std::move(target)};
}

Objective Objective::safety(std::vector<int> avoid) {
    std::sort(avoid.begin(), avoid.end());
    return Objective{ObjectiveKind::Safety, std::move(avoid)};
}

bool Objective::is_target(int s) const {
    return std::binary_search(target.begin(), target.end(), s);
}

const char* to_string(ObjectiveKind kind) {
    switch (kind) {
        case ObjectiveKind::Reachability: return "reachability";
        case ObjectiveKind::Safety: return "safety";
        case ObjectiveKind::TotalReward: return "total-reward";
        case ObjectiveKind::MeanPayoff: return "mean-payoff";
    }
    return "?";
}

StochasticGame parse_game(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed document: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("states") || !doc["states"].is_array())
        throw std::invalid_argument("malformed document: expected top-level \"states\" array");
    const auto& jstates = doc["states"];
    if (jstates.empty()) throw std::invalid_argument("empty game");

    std::vector<StateRecord> states;
    std::vector<std::string> labels;
    for (const auto& js : jstates) {
        StateRecord st;
        if (!js.contains("id") || !js["id"].is_string())
            throw std::invalid_argument("malformed document: state without string \"id\"");
        st.label = js["id"].get<std::string>();
        std::string player = js.value("player", std::string("max"));
        if (player == "max")
            st.owner = Player::Maximizer;
        else if (player == "min")
            st.owner = Player::Minimizer;
        else
            throw std::invalid_argument("unknown player \"" + player + "\" at state " + st.label);
        st.reward = js.value("reward", 0.0);
        if (st.reward < 0.0)
            throw std::invalid_argument("negative reward at state " + st.label);
        labels.push_back(st.label);
        states.push_back(std::move(st));
    }
    auto index_of = [&](const std::string& label) {
        for (size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == label) return static_cast<int>(i);
        return -1;
    };
    for (size_t s = 0; s < states.size(); ++s) {
        const auto& js = jstates[s];
        if (!js.contains("actions") || !js["actions"].is_array() || js["actions"].empty())
            throw std::invalid_argument("state " + states[s].label + " has no actions");
        for (const auto& ja : js["actions"]) {
            ActionRecord act;
            act.name = ja.value("name", std::string());
            if (!ja.contains("dist") || !ja["dist"].is_object() || ja["dist"].empty())
                throw std::invalid_argument("action without distribution at state " +
                                            states[s].label);
            for (const auto& [key, val] : ja["dist"].items()) {
                int succ = index_of(key);
                if (succ < 0)
                    throw std::invalid_argument("dangling successor \"" + key + "\" at state " +
                                                states[s].label);
                act.dist.emplace_back(succ, val.get<double>());
            }
            states[s].actions.push_back(std::move(act));
        }
    }
    return StochasticGame(std::move(states));
}

std::string render_game(const StochasticGame& g) {
    nlohmann::ordered_json doc;
    auto& jstates = doc["states"] = nlohmann::ordered_json::array();
    for (int s = 0; s < g.num_states(); ++s) {
        const auto& st = g.state(s);
        nlohmann::ordered_json js;
        js["id"] = st.label;
        js["player"] = st.owner == Player::Maximizer ? "max" : "min";
        if (st.reward != 0.0) js["reward"] = st.reward;
        auto& jacts = js["actions"] = nlohmann::ordered_json::array();
        for (const auto& act : st.actions) {
            nlohmann::ordered_json ja;
            if (!act.name.empty()) ja["name"] = act.name;
            auto& jd = ja["dist"] = nlohmann::ordered_json::object();
            for (const auto& [succ, p] : act.dist) jd[g.label(succ)] = p;
            jacts.push_back(std::move(ja));
        }
        jstates.push_back(std::move(js));
    }
    return doc.dump(2) + "\n";
}

StochasticGame rescale_rewards(const StochasticGame& g, double a, double b) {
    if (!(a > 0.0)) throw std::invalid_argument("rescale factor must be positive");
    std::vector<StateRecord> states = g.states();
    for (auto& st : states) st.reward = a * st.reward + b;
    return StochasticGame(std::move(states));
}

StochasticGame discount_to_total_reward(const StochasticGame& g, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("discount factor must be in (0,1)");
    std::vector<StateRecord> states = g.states();
    const int trap = static_cast<int>(states.size());
    for (auto& st : states) {
        for (auto& act : st.actions) {
            for (auto& [succ, p] : act.dist) p *= 1.0 - gamma;
            act.dist.emplace_back(trap, gamma);
        }
    }
    StateRecord t;
    t.label = "__trap";
    t.owner = Player::Maximizer;
    t.reward = 0.0;
    t.actions.push_back({"loop", {{trap, 1.0}}});
    states.push_back(std::move(t));
    return StochasticGame(std::move(states));
}

StochasticGame aperiodicity_transform(const StochasticGame& g, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("aperiodicity parameter must be in (0,1)");
    std::vector<StateRecord> states = g.states();
    for (int s = 0; s < g.num_states(); ++s) {
        for (auto& act : states[s].actions) {
            bool has_self = false;
            for (auto& [succ, p] : act.dist) {
                p *= 1.0 - alpha;
                if (succ == s) {
                    p += alpha;
                    has_self = true;
                }
            }
            if (!has_self) act.dist.emplace_back(s, alpha);
        }
    }
    return StochasticGame(std::move(states));
}

StochasticGame induce(const StochasticGame& g, const StrategyProfile& profile, Player player) {
    std::vector<StateRecord> states = g.states();
    for (int s = 0; s < g.num_states(); ++s) {
        if (g.owner(s) != player) continue;
        int choice = s < static_cast<int>(profile.size()) ? profile[s] : -1;
        if (choice < 0 || choice >= g.num_actions(s))
            throw std::invalid_argument("strategy undefined at state " + g.label(s));
        states[s].actions = {states[s].actions[choice]};
    }
    return StochasticGame(std::move(states));
}

StochasticGame induce_chain(const StochasticGame& g, const StrategyProfile& profile) {
    return induce(induce(g, profile, Player::Maximizer), profile, Player::Minimizer);
}

}  // namespace sgsolver
