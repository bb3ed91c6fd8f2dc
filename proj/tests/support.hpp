#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "sgsolver/model.hpp"

namespace sgtest {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline sgsolver::StochasticGame load_model(const std::string& name) {
    return sgsolver::parse_game(read_file(std::string(SG_MODEL_DIR) + "/" + name));
}

inline sgsolver::StochasticGame g1() { return load_model("g1_collapse.json"); }
inline sgsolver::StochasticGame g2() { return load_model("g2_car.json"); }
inline sgsolver::StochasticGame g3() { return load_model("g3_stay_exit.json"); }
inline sgsolver::StochasticGame g4() { return load_model("g4_simple_ec.json"); }
inline sgsolver::StochasticGame g5() { return load_model("g5_safe_trap.json"); }
inline sgsolver::StochasticGame g6() { return load_model("g6_cycle.json"); }

inline sgsolver::Objective reach_label(const sgsolver::StochasticGame& g,
                                       const std::string& label) {
    return sgsolver::Objective::reachability({g.find_label(label)});
}

inline sgsolver::Objective avoid_label(const sgsolver::StochasticGame& g,
                                       const std::string& label) {
    return sgsolver::Objective::safety({g.find_label(label)});
}

}  // namespace sgtest
