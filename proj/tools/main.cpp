#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sgsolver/bellman.hpp"
#include "sgsolver/generate.hpp"
#include "sgsolver/global.hpp"
#include "sgsolver/graph.hpp"
#include "sgsolver/local.hpp"
#include "sgsolver/mdpsolve.hpp"
#include "sgsolver/model.hpp"
#include "sgsolver/oracle.hpp"

namespace {

using namespace sgsolver;

// 17 significant digits so serialized doubles round-trip exactly.
std::string fmt(double v) {
    if (v == kInf) return "\"inf\"";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_plain(double v) {
    if (v == kInf) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

struct RunConfig {
    std::string model_path;
    std::string objective = "reachability";
    std::vector<std::string> targets;
    std::string algorithm = "local";
    double epsilon = 1e-6;
    std::string s0_label;
    long iteration_cap = 1000000;
    bool monotone = true;
    bool gauss_seidel = false;
    bool trace = false;
    int workers = 1;
    bool timing = false;
    std::string format = "json";
    long oracle_limit = 1000000;
    bool rational = false;
};

ObjectiveKind objective_kind(const std::string& name) {
    if (name == "reach" || name == "reachability") return ObjectiveKind::Reachability;
    if (name == "safety" || name == "safe") return ObjectiveKind::Safety;
    if (name == "total-reward" || name == "total_reward") return ObjectiveKind::TotalReward;
    if (name == "mean-payoff" || name == "mean_payoff") return ObjectiveKind::MeanPayoff;
    throw std::invalid_argument("unknown objective \"" + name + "\"");
}

StochasticGame load_game(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open model file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_game(buf.str());
}

Objective build_objective(const StochasticGame& g, const RunConfig& cfg) {
    ObjectiveKind kind = objective_kind(cfg.objective);
    if (kind == ObjectiveKind::Reachability || kind == ObjectiveKind::Safety) {
        if (cfg.targets.empty())
            throw std::invalid_argument("objective needs at least one --target label");
        std::vector<int> targets;
        for (const auto& label : cfg.targets) {
            int s = g.find_label(label);
            if (s < 0) throw std::invalid_argument("unknown state label \"" + label + "\"");
            targets.push_back(s);
        }
        return kind == ObjectiveKind::Reachability ? Objective::reachability(std::move(targets))
                                                   : Objective::safety(std::move(targets));
    }
    if (!cfg.targets.empty())
        throw std::invalid_argument("--target is only meaningful for reachability/safety");
    return kind == ObjectiveKind::TotalReward ? Objective::total_reward()
                                              : Objective::mean_payoff();
}

struct SolveDocument {
    const StochasticGame& game;  // original indexing
    const RunConfig& cfg;
    Assignment lower, upper;     // original indexing
    long iterations;
    std::string status;
    int s0;
    StrategyProfile max_strategy, min_strategy;  // -1 where unavailable
    double wall_ms;
};

void print_document(const SolveDocument& doc) {
    double gap = doc.upper[doc.s0] == doc.lower[doc.s0] ? 0.0
                                                        : doc.upper[doc.s0] - doc.lower[doc.s0];
    if (doc.cfg.format == "text") {
        std::printf("model:      %s\n", doc.cfg.model_path.c_str());
        std::printf("objective:  %s\n", doc.cfg.objective.c_str());
        std::printf("algorithm:  %s\n", doc.cfg.algorithm.c_str());
        std::printf("status:     %s (iterations: %ld)\n", doc.status.c_str(), doc.iterations);
        std::printf("gap(%s):    %s\n", doc.game.label(doc.s0).c_str(), fmt_plain(gap).c_str());
        for (int s = 0; s < doc.game.num_states(); ++s)
            std::printf("  %-12s lower=%-22s upper=%s\n", doc.game.label(s).c_str(),
                        fmt_plain(doc.lower[s]).c_str(), fmt_plain(doc.upper[s]).c_str());
        auto print_strategy = [&](const char* name, const StrategyProfile& strat, Player player) {
            std::printf("%s:", name);
            bool any = false;
            for (int s = 0; s < doc.game.num_states(); ++s) {
                if (doc.game.owner(s) != player || strat[s] < 0 || doc.game.num_actions(s) < 2)
                    continue;
                const auto& act = doc.game.action(s, strat[s]);
                std::printf(" %s->%s", doc.game.label(s).c_str(),
                            act.name.empty() ? std::to_string(strat[s]).c_str()
                                             : act.name.c_str());
                any = true;
            }
            std::printf(any ? "\n" : " (none)\n");
        };
        print_strategy("max strategy", doc.max_strategy, Player::Maximizer);
        print_strategy("min strategy", doc.min_strategy, Player::Minimizer);
        std::printf("wall time:  %.3f ms\n", doc.wall_ms);
        return;
    }

    std::string out;
    out += "{\"format\":1";
    out += ",\"model\":\"" + json_escape(doc.cfg.model_path) + "\"";
    out += ",\"objective\":\"" + doc.cfg.objective + "\"";
    out += ",\"algorithm\":\"" + doc.cfg.algorithm + "\"";
    out += ",\"epsilon\":" + fmt(doc.cfg.epsilon);
    out += ",\"s0\":\"" + json_escape(doc.game.label(doc.s0)) + "\"";
    out += ",\"status\":\"" + doc.status + "\"";
    out += ",\"iterations\":" + std::to_string(doc.iterations);
    out += ",\"gap\":" + fmt(gap);
    out += ",\"states\":[";
    for (int s = 0; s < doc.game.num_states(); ++s) {
        if (s) out += ",";
        out += "{\"id\":\"" + json_escape(doc.game.label(s)) + "\",\"lower\":" + fmt(doc.lower[s]) +
               ",\"upper\":" + fmt(doc.upper[s]) + "}";
    }
    out += "]";
    auto strategy_json = [&](const StrategyProfile& strat, Player player) {
        std::string j = "{";
        bool first = true;
        for (int s = 0; s < doc.game.num_states(); ++s) {
            if (doc.game.owner(s) != player || strat[s] < 0) continue;
            if (!first) j += ",";
            first = false;
            const auto& act = doc.game.action(s, strat[s]);
            j += "\"" + json_escape(doc.game.label(s)) + "\":\"" +
                 json_escape(act.name.empty() ? std::to_string(strat[s]) : act.name) + "\"";
        }
        return j + "}";
    };
    out += ",\"strategy_max\":" + strategy_json(doc.max_strategy, Player::Maximizer);
    out += ",\"strategy_min\":" + strategy_json(doc.min_strategy, Player::Minimizer);
    if (doc.cfg.timing) out += ",\"wall_time_ms\":" + fmt(doc.wall_ms);
    out += "}\n";
    std::fputs(out.c_str(), stdout);
}

int cmd_solve(const RunConfig& cfg) {
    StochasticGame game = load_game(cfg.model_path);
    Objective obj = build_objective(game, cfg);
    if (cfg.algorithm != "oracle" && !(cfg.epsilon > 0.0))
        throw std::invalid_argument("epsilon must be positive");
    if (cfg.algorithm == "si" && obj.kind == ObjectiveKind::TotalReward)
        throw std::invalid_argument("SI unsupported for total reward");

    int s0 = cfg.s0_label.empty() ? 0 : game.find_label(cfg.s0_label);
    if (s0 < 0) throw std::invalid_argument("unknown state label \"" + cfg.s0_label + "\"");

    auto [canon, report] = canonicalize(game, obj);

    SolveDocument doc{game,
                      cfg,
                      Assignment(game.num_states(), kInf),
                      Assignment(game.num_states(), kInf),
                      0,
                      "converged",
                      s0,
                      StrategyProfile(game.num_states(), -1),
                      StrategyProfile(game.num_states(), -1),
                      0.0};

    auto start = std::chrono::steady_clock::now();
    Assignment lower(canon.num_states()), upper(canon.num_states());
    StrategyProfile profile(canon.num_states(), -1);
    bool capped = false;

    // A removed query state has the exact answer +inf; the remainder is
    // still solved so the document carries sound bounds everywhere.
    int canon_s0 = report.index_map[s0];
    const bool query_removed = canon_s0 < 0;
    if (query_removed) canon_s0 = 0;
    if (cfg.algorithm == "oracle") {
        OracleResult res = exact_value(canon, obj, cfg.oracle_limit,
                                       cfg.rational ? NumberMode::Rational : NumberMode::Float64);
        lower = res.value;
        upper = res.value;
        for (int s = 0; s < canon.num_states(); ++s)
            profile[s] = canon.owner(s) == Player::Maximizer ? res.max_witness[s]
                                                             : res.min_witness[s];
        doc.iterations = res.profiles_evaluated;
    } else {
        SolveConfig scfg;
        scfg.iteration_cap = cfg.iteration_cap;
        scfg.monotone = cfg.monotone;
        scfg.gauss_seidel = cfg.gauss_seidel;
        scfg.record_trace = cfg.trace;
        scfg.workers = cfg.workers;
        SolveResult res;
        if (cfg.algorithm == "global")
            res = bvi_global(canon, obj, canon_s0, cfg.epsilon, scfg);
        else if (cfg.algorithm == "local")
            res = bvi_local(canon, obj, canon_s0, cfg.epsilon, scfg);
        else if (cfg.algorithm == "si")
            res = si_anytime(canon, obj, canon_s0, cfg.epsilon, scfg);
        else
            throw std::invalid_argument("unknown algorithm \"" + cfg.algorithm + "\"");
        lower = res.lower;
        upper = res.upper;
        profile = res.profile;
        doc.iterations = res.iterations;
        capped = res.status == SolveStatus::IterationCapped;
        if (cfg.trace)
            for (const auto& t : res.trace)
                std::fprintf(stderr, "iter %ld lower=%s upper=%s\n", t.iteration,
                             fmt_plain(t.lower).c_str(), fmt_plain(t.upper).c_str());
    }
    auto end = std::chrono::steady_clock::now();
    doc.wall_ms = std::chrono::duration<double, std::milli>(end - start).count();
    if (query_removed) capped = false;  // the query itself is answered exactly
    doc.status = capped ? "iteration-capped" : "converged";

    // Map canonical results back onto the original states; removed states
    // have value +inf, and the mean-payoff shift is undone.
    for (int s = 0; s < game.num_states(); ++s) {
        int c = report.index_map[s];
        if (c < 0) {
            doc.lower[s] = kInf;
            doc.upper[s] = kInf;
            continue;
        }
        doc.lower[s] = lower[c] == kInf ? kInf : lower[c] - report.reward_shift;
        doc.upper[s] = upper[c] == kInf ? kInf : upper[c] - report.reward_shift;
        if (!profile.empty() && profile[c] >= 0 && profile[c] < game.num_actions(s)) {
            (game.owner(s) == Player::Maximizer ? doc.max_strategy : doc.min_strategy)[s] =
                profile[c];
        }
    }
    print_document(doc);
    return capped ? 2 : 0;
}

int cmd_diagnose(const RunConfig& cfg) {
    StochasticGame game = load_game(cfg.model_path);
    Objective obj = build_objective(game, cfg);
    auto [canon, report] = canonicalize(game, obj);

    std::printf("model: %s (%d states)\n", cfg.model_path.c_str(), game.num_states());
    auto print_ec = [&](const EndComponent& ec) {
        std::printf("  {");
        for (size_t i = 0; i < ec.states.size(); ++i)
            std::printf("%s%s", i ? "," : "", canon.label(ec.states[i]).c_str());
        std::printf("} actions {");
        for (size_t i = 0; i < ec.actions.size(); ++i) {
            const auto& [s, a] = ec.actions[i];
            const auto& name = canon.action(s, a).name;
            std::printf("%s%s", i ? "," : "",
                        name.empty() ? (canon.label(s) + "#" + std::to_string(a)).c_str()
                                     : name.c_str());
        }
        std::printf("}\n");
    };

    std::printf("mecs:\n");
    for (const auto& ec : mecs(canon)) print_ec(ec);

    if (obj.kind == ObjectiveKind::TotalReward) {
        std::printf("infinite-value states:");
        if (report.removed_infinite.empty()) std::printf(" (none)");
        for (int s : report.removed_infinite) std::printf(" %s", game.label(s).c_str());
        std::printf("\n");
    }

    std::optional<OracleResult> oracle;
    try {
        oracle = exact_value(canon, obj, cfg.oracle_limit);
    } catch (const std::invalid_argument&) {
        std::printf("oracle: skipped (profile limit exceeded)\n");
    }

    if (oracle) {
        std::printf("msec candidates under oracle-optimal strategies:\n");
        auto min_fixed = induce(canon, oracle->min_witness, Player::Minimizer);
        for (const auto& ec : msecs(min_fixed, obj, Player::Maximizer)) print_ec(ec);
        auto max_fixed = induce(canon, oracle->max_witness, Player::Maximizer);
        for (const auto& ec : msecs(max_fixed, obj, Player::Minimizer)) print_ec(ec);

        // Spurious fixpoint scan from the all-upper-bound start (with the
        // usual qualitative zeroing for reachability/safety).
        Assignment f = init_upper(canon, obj);
        if (obj.kind == ObjectiveKind::Reachability) {
            std::vector<char> can(canon.num_states(), 0);
            for (int s : positive_attractor(canon, obj.target, Player::Maximizer)) can[s] = 1;
            for (int s = 0; s < canon.num_states(); ++s)
                if (!can[s]) f[s] = 0.0;
        }
        bool settled = false;
        for (int sweep = 0; sweep < 100000; ++sweep) {
            Assignment next = fixpoint_update(canon, obj, f);
            double delta = 0.0;
            for (int s = 0; s < canon.num_states(); ++s)
                if (f[s] != next[s]) delta = std::max(delta, std::abs(f[s] - next[s]));
            f = std::move(next);
            if (delta <= 1e-12) {
                settled = true;
                break;
            }
        }
        if (settled) {
            auto sec = find_spurious_fixpoint_sec(canon, obj, f, oracle->value);
            if (sec) {
                std::printf("spurious fixpoint from all-upper start on:\n");
                print_ec(*sec);
            } else {
                std::printf("no spurious fixpoint from the all-upper start\n");
            }
        } else {
            std::printf("fixpoint iteration did not settle; spurious scan skipped\n");
        }
    }
    return 0;
}

int cmd_generate(std::uint64_t seed, int max_states, int max_actions, bool single_owner,
                 bool no_rewards) {
    GeneratorConfig gcfg;
    gcfg.max_states = max_states;
    gcfg.max_actions = max_actions;
    gcfg.two_player = !single_owner;
    gcfg.rewards = !no_rewards;
    std::fputs(render_game(generate_random_game(seed, gcfg)).c_str(), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anytime solver for turn-based stochastic games"};
    app.require_subcommand(1);

    RunConfig cfg;

    auto add_model_options = [&cfg](CLI::App* cmd) {
        cmd->add_option("--model", cfg.model_path, "game file (JSON)")->required();
        cmd->add_option("--objective", cfg.objective,
                        "reachability|safety|total-reward|mean-payoff");
        cmd->add_option("--target", cfg.targets, "target/avoid state label (repeatable)");
    };

    CLI::App* solve = app.add_subcommand("solve", "compute anytime value bounds");
    add_model_options(solve);
    solve->add_option("--algorithm", cfg.algorithm, "global|local|si|oracle");
    solve->add_option("--epsilon", cfg.epsilon, "required precision at s0");
    solve->add_option("--s0", cfg.s0_label, "initial state label (default: first state)");
    solve->add_option("--iteration-cap", cfg.iteration_cap, "iteration cap");
    solve->add_flag("--monotone,!--no-monotone", cfg.monotone, "clamp bounds monotonically");
    solve->add_flag("--gauss-seidel", cfg.gauss_seidel,
                    "Gauss-Seidel sweeps for the recommender iterates");
    solve->add_flag("--trace", cfg.trace, "log per-iteration bounds at s0 to stderr");
    solve->add_option("--workers", cfg.workers, "worker count for parallel sub-solves")
        ->check(CLI::Range(1, 64));
    solve->add_flag("--timing", cfg.timing, "include wall time in the JSON document");
    solve->add_option("--format", cfg.format, "json|text")
        ->check(CLI::IsMember({"json", "text"}));
    solve->add_option("--oracle-limit", cfg.oracle_limit, "profile cap for the oracle");
    solve->add_flag("--rational", cfg.rational, "exact rational arithmetic (oracle only)");

    CLI::App* oracle_cmd = app.add_subcommand("oracle", "brute-force exact values");
    add_model_options(oracle_cmd);
    oracle_cmd->add_option("--s0", cfg.s0_label, "initial state label");
    oracle_cmd->add_option("--limit", cfg.oracle_limit, "profile cap");
    oracle_cmd->add_flag("--rational", cfg.rational, "exact rational arithmetic");
    oracle_cmd->add_option("--format", cfg.format, "json|text")
        ->check(CLI::IsMember({"json", "text"}));

    CLI::App* diagnose = app.add_subcommand("diagnose", "EC/fixpoint diagnostics");
    add_model_options(diagnose);
    diagnose->add_option("--oracle-limit", cfg.oracle_limit, "profile cap for the oracle");

    std::uint64_t seed = 0;
    int max_states = 5, max_actions = 3;
    bool single_owner = false, no_rewards = false;
    CLI::App* generate = app.add_subcommand("generate", "emit a random game document");
    generate->add_option("--seed", seed, "generator seed")->required();
    generate->add_option("--max-states", max_states, "maximum state count");
    generate->add_option("--max-actions", max_actions, "maximum actions per state");
    generate->add_flag("--single-owner", single_owner, "all states belong to the Maximizer");
    generate->add_flag("--no-rewards", no_rewards, "zero rewards everywhere");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (solve->parsed()) return cmd_solve(cfg);
        if (oracle_cmd->parsed()) {
            cfg.algorithm = "oracle";
            return cmd_solve(cfg);
        }
        if (diagnose->parsed()) return cmd_diagnose(cfg);
        if (generate->parsed())
            return cmd_generate(seed, max_states, max_actions, single_owner, no_rewards);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 1;
    }
    return 1;
}
