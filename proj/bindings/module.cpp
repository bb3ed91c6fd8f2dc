#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sgsolver/generate.hpp"
#include "sgsolver/global.hpp"
#include "sgsolver/graph.hpp"
#include "sgsolver/local.hpp"
#include "sgsolver/mdpsolve.hpp"
#include "sgsolver/model.hpp"
#include "sgsolver/oracle.hpp"

namespace py = pybind11;
using namespace sgsolver;

namespace {

Objective make_objective(const StochasticGame& g, const std::string& kind,
                         const std::vector<std::string>& targets) {
    auto resolve = [&] {
        std::vector<int> idx;
        for (const auto& label : targets) {
            int s = g.find_label(label);
            if (s < 0) throw std::invalid_argument("unknown state label \"" + label + "\"");
            idx.push_back(s);
        }
        return idx;
    };
    if (kind == "reachability" || kind == "reach") return Objective::reachability(resolve());
    if (kind == "safety") return Objective::safety(resolve());
    if (kind == "total-reward") return Objective::total_reward();
    if (kind == "mean-payoff") return Objective::mean_payoff();
    throw std::invalid_argument("unknown objective \"" + kind + "\"");
}

py::dict solve_result_dict(const StochasticGame& g, const SolveResult& res) {
    py::dict d;
    d["lower"] = res.lower;
    d["upper"] = res.upper;
    d["iterations"] = res.iterations;
    d["status"] =
        res.status == SolveStatus::Converged ? "converged" : "iteration-capped";
    py::dict labels;
    for (int s = 0; s < g.num_states(); ++s) {
        py::dict entry;
        entry["lower"] = res.lower[s];
        entry["upper"] = res.upper[s];
        labels[g.label(s).c_str()] = entry;
    }
    d["states"] = labels;
    return d;
}

struct PySolveArgs {
    double epsilon = 1e-6;
    std::string s0;
    long iteration_cap = 1000000;
};

int resolve_s0(const StochasticGame& g, const std::string& label) {
    if (label.empty()) return 0;
    int s = g.find_label(label);
    if (s < 0) throw std::invalid_argument("unknown state label \"" + label + "\"");
    return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Anytime value-bound solvers for turn-based stochastic games";

    py::class_<StochasticGame>(m, "StochasticGame")
        .def_static("from_json", &parse_game, py::arg("text"))
        .def("to_json", &render_game)
        .def_property_readonly("num_states", &StochasticGame::num_states)
        .def("label", &StochasticGame::label)
        .def("labels",
             [](const StochasticGame& g) {
                 std::vector<std::string> out;
                 for (int s = 0; s < g.num_states(); ++s) out.push_back(g.label(s));
                 return out;
             })
        .def("__repr__", [](const StochasticGame& g) {
            return "<StochasticGame with " + std::to_string(g.num_states()) + " states>";
        });

    m.def("parse_game", &parse_game, py::arg("text"));
    m.def(
        "generate_random_game",
        [](std::uint64_t seed, int max_states, int max_actions, bool two_player) {
            GeneratorConfig cfg;
            cfg.max_states = max_states;
            cfg.max_actions = max_actions;
            cfg.two_player = two_player;
            return generate_random_game(seed, cfg);
        },
        py::arg("seed"), py::arg("max_states") = 5, py::arg("max_actions") = 3,
        py::arg("two_player") = true);

    m.def(
        "mecs",
        [](const StochasticGame& g) {
            std::vector<std::vector<std::string>> out;
            for (const auto& ec : mecs(g)) {
                std::vector<std::string> labels;
                for (int s : ec.states) labels.push_back(g.label(s));
                out.push_back(std::move(labels));
            }
            return out;
        },
        py::arg("game"));

    m.def(
        "exact_value",
        [](const StochasticGame& g, const std::string& objective,
           const std::vector<std::string>& targets, long limit) {
            Objective obj = make_objective(g, objective, targets);
            auto [canon, report] = canonicalize(g, obj);
            OracleResult res = exact_value(canon, obj, limit);
            py::dict out;
            for (int s = 0; s < g.num_states(); ++s) {
                int c = report.index_map[s];
                double v = c < 0 ? kInf : res.value[c] - report.reward_shift;
                out[g.label(s).c_str()] = v;
            }
            return out;
        },
        py::arg("game"), py::arg("objective"), py::arg("targets") = std::vector<std::string>{},
        py::arg("limit") = 1000000L);

    auto bind_solver = [&m](const char* name, auto solver) {
        m.def(
            name,
            [solver](const StochasticGame& g, const std::string& objective,
                     const std::vector<std::string>& targets, double epsilon,
                     const std::string& s0, long iteration_cap) {
                Objective obj = make_objective(g, objective, targets);
                auto [canon, report] = canonicalize(g, obj);
                int start = resolve_s0(g, s0);
                int canon_s0 = report.index_map[start];
                if (canon_s0 < 0)
                    throw std::invalid_argument("initial state has infinite value");
                SolveConfig cfg;
                cfg.iteration_cap = iteration_cap;
                SolveResult res = solver(canon, obj, canon_s0, epsilon, cfg);
                // Map back onto the original states.
                SolveResult full = res;
                full.lower.assign(g.num_states(), kInf);
                full.upper.assign(g.num_states(), kInf);
                for (int s = 0; s < g.num_states(); ++s) {
                    int c = report.index_map[s];
                    if (c < 0) continue;
                    full.lower[s] = res.lower[c] == kInf ? kInf
                                                         : res.lower[c] - report.reward_shift;
                    full.upper[s] = res.upper[c] == kInf ? kInf
                                                         : res.upper[c] - report.reward_shift;
                }
                return solve_result_dict(g, full);
            },
            py::arg("game"), py::arg("objective"),
            py::arg("targets") = std::vector<std::string>{}, py::arg("epsilon") = 1e-6,
            py::arg("s0") = std::string(), py::arg("iteration_cap") = 1000000L);
    };
    bind_solver("bvi_global", [](const StochasticGame& g, const Objective& o, int s0, double eps,
                                 const SolveConfig& c) { return bvi_global(g, o, s0, eps, c); });
    bind_solver("bvi_local", [](const StochasticGame& g, const Objective& o, int s0, double eps,
                                const SolveConfig& c) { return bvi_local(g, o, s0, eps, c); });
    bind_solver("si_anytime", [](const StochasticGame& g, const Objective& o, int s0, double eps,
                                 const SolveConfig& c) { return si_anytime(g, o, s0, eps, c); });
}
