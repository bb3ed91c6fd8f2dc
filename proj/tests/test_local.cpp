#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "sgsolver/bellman.hpp"
#include "sgsolver/generate.hpp"
#include "sgsolver/local.hpp"
#include "sgsolver/oracle.hpp"

#include "support.hpp"

using namespace sgsolver;

namespace {

EndComponent mec_containing(const StochasticGame& g, int state) {
    for (auto& ec : mecs(g))
        if (ec.contains(state)) return ec;
    throw std::runtime_error("state not in any MEC");
}

}  // namespace

TEST_CASE("exit values on G2 and G3") {
    auto g2 = sgtest::g2();
    EndComponent e2 = mec_containing(g2, g2.find_label("p"));
    Assignment outside{0.0, 0.0, 1.0, 0.0};  // converged values outside the EC
    CHECK(exit_value(g2, outside, e2, Player::Maximizer) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(exit_value(g2, outside, e2, Player::Minimizer) == doctest::Approx(0.8).epsilon(1e-12));

    // No Maximizer exits: -inf.
    auto g6 = sgtest::g6();
    EndComponent e6 = mec_containing(g6, 0);
    Assignment zero(2, 0.0);
    CHECK(exit_value(g6, zero, e6, Player::Maximizer) == -kInf);
    CHECK(exit_value(g6, zero, e6, Player::Minimizer) == kInf);

    auto g3 = sgtest::g3();
    EndComponent e3 = mec_containing(g3, g3.find_label("p"));
    Assignment exits{0, 0, 0, 0, 0, 6};  // exit-state values
    CHECK(exit_value(g3, exits, e3, Player::Maximizer) == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(exit_value(g3, exits, e3, Player::Minimizer) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("staying values on G3's EC are (1, 3, 1)") {
    auto g3 = sgtest::g3();
    EndComponent ec = mec_containing(g3, g3.find_label("p"));
    auto stay = staying_value(g3, ec, Objective::mean_payoff(), Player::Maximizer);
    REQUIRE(stay.size() == 3);
    CHECK(stay[0].lower == doctest::Approx(1.0).epsilon(1e-6));  // p
    CHECK(stay[1].lower == doctest::Approx(3.0).epsilon(1e-6));  // q
    CHECK(stay[2].lower == doctest::Approx(1.0).epsilon(1e-6));  // s
    for (auto& sv : stay) CHECK(sv.lower == sv.upper);
}

TEST_CASE("staying values for reachability and safety ECs") {
    auto g1 = sgtest::g1();
    auto reach = sgtest::reach_label(g1, "t");
    auto avoid = sgtest::avoid_label(g1, "t");
    EndComponent pq = mec_containing(g1, 0);
    EndComponent t = mec_containing(g1, g1.find_label("t"));

    CHECK(staying_value(g1, pq, reach, Player::Maximizer)[0].upper == 0.0);
    CHECK(staying_value(g1, t, reach, Player::Maximizer)[0].lower == 1.0);
    CHECK(staying_value(g1, pq, avoid, Player::Maximizer)[0].lower == 1.0);
    CHECK(staying_value(g1, t, avoid, Player::Maximizer)[0].upper == 0.0);
}

TEST_CASE("total-reward staying values by perspective") {
    auto g = parse_game(R"({"states": [
        {"id": "u", "reward": 0, "actions": [{"name": "loop", "dist": {"u": 1.0}},
                                             {"name": "go", "dist": {"w": 1.0}}]},
        {"id": "w", "player": "min", "reward": 1, "actions": [{"name": "back", "dist": {"u": 1.0}}]}
    ]})");
    EndComponent ec = mec_containing(g, 0);
    auto tr = Objective::total_reward();
    // Maximizer optimizing: a positive reward inside means +inf.
    CHECK(staying_value(g, ec, tr, Player::Maximizer)[0].upper == kInf);
    // Minimizer optimizing: the zero-reward sub-EC {u} is an escape hatch.
    auto h = parse_game(R"({"states": [
        {"id": "u", "player": "min", "reward": 0,
         "actions": [{"name": "loop", "dist": {"u": 1.0}}, {"name": "go", "dist": {"w": 1.0}}]},
        {"id": "w", "player": "min", "reward": 1, "actions": [{"name": "back", "dist": {"u": 1.0}}]}
    ]})");
    EndComponent hc = mec_containing(h, 0);
    CHECK(staying_value(h, hc, tr, Player::Minimizer)[0].upper == 0.0);
    // Without the escape the Minimizer keeps paying: +inf.
    auto forced = parse_game(R"({"states": [
        {"id": "u", "player": "min", "reward": 0, "actions": [{"name": "go", "dist": {"w": 1.0}}]},
        {"id": "w", "player": "min", "reward": 1, "actions": [{"name": "back", "dist": {"u": 1.0}}]}
    ]})");
    EndComponent fc = mec_containing(forced, 0);
    CHECK(staying_value(forced, fc, tr, Player::Minimizer)[0].upper == kInf);
}

TEST_CASE("mean-payoff staying value in bounds mode") {
    auto g6 = sgtest::g6();
    EndComponent ec = mec_containing(g6, 0);
    StayBoundsParams params;
    params.eps = 1e-4;
    Assignment iterate;
    auto stay = staying_value(g6, ec, Objective::mean_payoff(), Player::Maximizer,
                              StayMode::Bounds, &params, &iterate);
    CHECK(stay[0].lower >= 1.0 - 1e-4);
    CHECK(stay[0].upper <= 1.0 + 1e-4);
    CHECK(iterate.size() == 2);

    // Warm start from the previous iterate converges again.
    params.warm_start = &iterate;
    auto again = staying_value(g6, ec, Objective::mean_payoff(), Player::Maximizer,
                               StayMode::Bounds, &params, nullptr);
    CHECK(again[0].lower <= 1.0);
    CHECK(again[0].upper >= 1.0);
}

TEST_CASE("deflate on the G2 example") {
    auto g2 = sgtest::g2();
    EndComponent e = mec_containing(g2, 0);
    SecCandidate cand = make_sec_candidate(g2, e, Player::Minimizer);
    // U-hat of 0.8 on the EC, converged values outside.
    Assignment u_hat{0.8, 0.8, 1.0, 0.0};
    std::vector<StayValue> stay(2, StayValue{0.0, 0.0, true});
    auto u = deflate(g2, u_hat, cand, stay);
    CHECK(u[0] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(u[1] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(u[2] == 1.0);

    // A staying value dominating U-hat leaves everything unchanged.
    std::vector<StayValue> high(2, StayValue{0.9, 0.9, true});
    CHECK(deflate(g2, u_hat, cand, high) == u_hat);
}

TEST_CASE("deflate of G3's {p,s} under tau=back stays a sound upper bound") {
    auto g3 = sgtest::g3();
    StrategyProfile tau(g3.num_states(), 0);
    tau[g3.find_label("s")] = 0;  // back
    auto mdp = induce(g3, tau, Player::Minimizer);
    EndComponent ps = mec_containing(mdp, g3.find_label("p"));
    REQUIRE(ps.states == std::vector<int>{g3.find_label("p"), g3.find_label("s")});
    SecCandidate cand = make_sec_candidate(mdp, ps, Player::Minimizer);
    auto stay = staying_value(mdp, ps, Objective::mean_payoff(), Player::Maximizer);
    CHECK(stay[0].lower == doctest::Approx(1.0).epsilon(1e-9));  // cycle rewards (0,2)

    Assignment u_hat(6, 6.0);
    u_hat[g3.find_label("Z0")] = 0.0;
    auto u = deflate(mdp, u_hat, cand, stay);
    CHECK(u[g3.find_label("p")] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(u[g3.find_label("s")] == doctest::Approx(1.0).epsilon(1e-9));
    // The oracle value 0 stays below the deflated bound.
    auto oracle = exact_value(g3, Objective::mean_payoff());
    CHECK(oracle.value[g3.find_label("p")] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("inflate on the G2 safety example") {
    auto g2 = sgtest::g2();
    EndComponent e = mec_containing(g2, 0);
    SecCandidate cand = make_sec_candidate(g2, e, Player::Maximizer);
    Assignment l_hat{0.0, 0.0, 1.0, 0.0};
    std::vector<StayValue> stay(2, StayValue{1.0, 1.0, true});
    auto l = inflate(g2, l_hat, cand, stay);
    CHECK(l[0] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(l[1] == doctest::Approx(0.8).epsilon(1e-12));

    // No Minimizer exits: inflate to the staying value.
    auto g5 = sgtest::g5();
    EndComponent cycle = mec_containing(g5, 0);
    SecCandidate c5 = make_sec_candidate(g5, cycle, Player::Maximizer);
    Assignment zeros(3, 0.0);
    std::vector<StayValue> one(2, StayValue{1.0, 1.0, true});
    auto l5 = inflate(g5, zeros, c5, one);
    CHECK(l5[0] == 1.0);
    CHECK(l5[1] == 1.0);

    // Zero staying value: no change.
    std::vector<StayValue> zero_stay(2, StayValue{0.0, 0.0, true});
    CHECK(inflate(g2, l_hat, cand, zero_stay) == l_hat);
}

TEST_CASE("deflate/inflate keep valid bounds in isolation (random)") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto g = generate_random_game(seed);
        std::mt19937_64 rng(seed * 77 + 5);
        for (auto kind : {ObjectiveKind::Reachability, ObjectiveKind::Safety,
                          ObjectiveKind::MeanPayoff}) {
            int target = static_cast<int>(seed % g.num_states());
            Objective obj = kind == ObjectiveKind::Reachability ? Objective::reachability({target})
                            : kind == ObjectiveKind::Safety    ? Objective::safety({target})
                                                               : Objective::mean_payoff();
            auto [canon, report] = canonicalize(g, obj);
            auto oracle = exact_value(canon, obj);
            double cap = obj.kind == ObjectiveKind::MeanPayoff ? canon.max_reward() : 1.0;

            // Random valid bounds around the oracle value.
            Assignment upper(canon.num_states()), lower(canon.num_states());
            for (int s = 0; s < canon.num_states(); ++s) {
                double u1 = static_cast<double>(rng() % 1000) / 999.0;
                double u2 = static_cast<double>(rng() % 1000) / 999.0;
                upper[s] = oracle.value[s] + u1 * (cap - oracle.value[s]);
                lower[s] = oracle.value[s] * u2;
            }

            StrategyProfile random_profile(canon.num_states(), 0);
            for (int s = 0; s < canon.num_states(); ++s)
                random_profile[s] = static_cast<int>(rng() % canon.num_actions(s));

            auto min_fixed = induce(canon, random_profile, Player::Minimizer);
            for (auto& ec : msecs(min_fixed, obj, Player::Maximizer)) {
                SecCandidate cand = make_sec_candidate(min_fixed, ec, Player::Minimizer);
                auto stay = staying_value(min_fixed, ec, obj, Player::Maximizer);
                auto deflated = deflate(min_fixed, upper, cand, stay);
                for (int s = 0; s < canon.num_states(); ++s) {
                    CHECK(deflated[s] <= upper[s] + 1e-12);
                    CHECK(deflated[s] + 1e-9 >= oracle.value[s]);
                }
            }
            auto max_fixed = induce(canon, random_profile, Player::Maximizer);
            for (auto& ec : msecs(max_fixed, obj, Player::Minimizer)) {
                SecCandidate cand = make_sec_candidate(max_fixed, ec, Player::Maximizer);
                auto stay = staying_value(max_fixed, ec, obj, Player::Minimizer);
                auto inflated = inflate(max_fixed, lower, cand, stay);
                for (int s = 0; s < canon.num_states(); ++s) {
                    CHECK(inflated[s] + 1e-12 >= lower[s]);
                    CHECK(inflated[s] <= oracle.value[s] + 1e-9);
                }
            }
        }
    }
}

TEST_CASE("is_sec_for on the examples") {
    auto g2 = sgtest::g2();
    auto obj = sgtest::reach_label(g2, "goal");
    EndComponent e = mec_containing(g2, 0);
    Assignment f{0.5, 0.5, 1.0, 0.0};
    CHECK(is_sec_for(g2, f, obj, e));
    CHECK(is_sec_for_equal_values(g2, f, obj, e));

    auto g3 = sgtest::g3();
    EndComponent e3 = mec_containing(g3, 0);
    Assignment mp_values{0.0, 6.0, 0.0, 0.0, 0.0, 6.0};
    CHECK_FALSE(is_sec_for_equal_values(g3, mp_values, Objective::mean_payoff(), e3));

    // A positive offset inside the EC can never satisfy the SEC equations.
    auto tr = Objective::total_reward();
    auto g = parse_game(R"({"states": [
        {"id": "u", "reward": 1, "actions": [{"dist": {"u": 1.0}}]}
    ]})");
    EndComponent u = mec_containing(g, 0);
    Assignment any{0.7};
    CHECK_FALSE(is_sec_for(g, any, tr, u));
    CHECK_FALSE(is_sec_for_equal_values(g, any, tr, u));
}

TEST_CASE("fixpoint trichotomy on G2") {
    auto g2 = sgtest::g2();
    auto obj = sgtest::reach_label(g2, "goal");
    EndComponent e = mec_containing(g2, 0);
    for (double c : {0.05, 0.5, 0.95}) {
        Assignment f{c, c, 1.0, 0.0};
        REQUIRE(is_sec_for(g2, f, obj, e));
        Assignment updated = fixpoint_update(g2, obj, f);
        bool unchanged = updated[0] == f[0] && updated[1] == f[1];
        bool within_exits = 0.1 <= c && c <= 0.8;
        CHECK(unchanged == within_exits);
    }
}

TEST_CASE("SEC formulations agree on sampled triples") {
    long agreements = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto g = generate_random_game(seed);
        auto ms = mecs(g);
        if (ms.empty()) continue;
        std::mt19937_64 rng(seed);
        for (int trial = 0; trial < 20; ++trial) {
            Assignment f(g.num_states());
            for (auto& v : f) v = 0.25 * static_cast<double>(rng() % 5);
            for (const auto& ec : ms) {
                bool a = is_sec_for(g, f, Objective::mean_payoff(), ec);
                bool b = is_sec_for_equal_values(g, f, Objective::mean_payoff(), ec);
                CHECK(a == b);
                ++agreements;
            }
        }
    }
    CHECK(agreements > 1000);
}

TEST_CASE("find_spurious_fixpoint_sec on the examples") {
    auto g2 = sgtest::g2();
    auto obj2 = sgtest::reach_label(g2, "goal");
    Assignment f2{0.5, 0.5, 1.0, 0.0};
    Assignment ref2{0.1, 0.1, 1.0, 0.0};
    auto sec2 = find_spurious_fixpoint_sec(g2, obj2, f2, ref2);
    REQUIRE(sec2.has_value());
    CHECK(sec2->states == std::vector<int>{0, 1});

    CHECK_FALSE(find_spurious_fixpoint_sec(g2, obj2, ref2, ref2).has_value());

    auto g1 = sgtest::g1();
    auto obj1 = sgtest::reach_label(g1, "t");
    Assignment f1{1.0, 1.0, 0.0, 1.0};
    Assignment ref1{0.5, 0.5, 0.0, 1.0};
    auto sec1 = find_spurious_fixpoint_sec(g1, obj1, f1, ref1);
    REQUIRE(sec1.has_value());
    CHECK(sec1->states == std::vector<int>{0, 1});
    CHECK(sec1->actions == std::vector<std::pair<int, int>>{{0, 0}, {1, 0}});

    Assignment not_fix{0.9, 0.2, 0.0, 1.0};
    CHECK_THROWS_AS(find_spurious_fixpoint_sec(g1, obj1, not_fix, ref1), std::invalid_argument);
}

TEST_CASE("bvi_local on G1 brackets one half") {
    auto g = sgtest::g1();
    auto obj = sgtest::reach_label(g, "t");
    SolveConfig cfg;
    cfg.record_trace = true;
    auto res = bvi_local(g, obj, 0, 1e-6, cfg);
    CHECK(res.status == SolveStatus::Converged);
    CHECK(res.gap(0) <= 1e-6);
    CHECK(res.lower[0] <= 0.5 + 1e-9);
    CHECK(res.upper[0] >= 0.5 - 1e-9);
    // The upper bounds on the {p,q} component follow the collapsed-MDP
    // iteration: 2/3, 5/9 after the first two deflations.
    REQUIRE(res.trace.size() >= 2);
    CHECK(res.trace[0].upper == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(res.trace[1].upper == doctest::Approx(5.0 / 9.0).epsilon(1e-15));
}

TEST_CASE("bvi_local deflates G2 in the first pass") {
    auto g = sgtest::g2();
    auto obj = sgtest::reach_label(g, "goal");
    SolveConfig cfg;
    cfg.record_trace = true;
    auto res = bvi_local(g, obj, 0, 1e-6, cfg);
    CHECK(res.status == SolveStatus::Converged);
    REQUIRE(!res.trace.empty());
    CHECK(res.trace[0].upper == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(res.lower[0] == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(res.upper[1] == doctest::Approx(0.1).epsilon(1e-6));
}

TEST_CASE("bvi_local safety on G5 via inflation") {
    auto g = sgtest::g5();
    auto obj = sgtest::avoid_label(g, "t");
    auto res = bvi_local(g, obj, 0, 1e-6);
    CHECK(res.status == SolveStatus::Converged);
    CHECK(res.lower[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(res.upper[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("bvi_local mean payoff on G3") {
    auto g = sgtest::g3();
    auto res = bvi_local(g, Objective::mean_payoff(), g.find_label("p"), 1e-4);
    CHECK(res.status == SolveStatus::Converged);
    CHECK(res.lower[g.find_label("p")] == doctest::Approx(0.0).epsilon(1e-4));
    CHECK(res.upper[g.find_label("p")] == doctest::Approx(0.0).epsilon(1e-4));

    auto from_q = bvi_local(g, Objective::mean_payoff(), g.find_label("q"), 1e-4);
    CHECK(from_q.lower[g.find_label("q")] == doctest::Approx(6.0).epsilon(1e-4));
    auto from_s = bvi_local(g, Objective::mean_payoff(), g.find_label("s"), 1e-4);
    CHECK(from_s.upper[g.find_label("s")] == doctest::Approx(0.0).epsilon(1e-4));
}

TEST_CASE("bvi_local with Gauss-Seidel recommender sweeps") {
    auto g = sgtest::g4();
    auto obj = sgtest::reach_label(g, "goal");
    SolveConfig cfg;
    cfg.gauss_seidel = true;
    auto res = bvi_local(g, obj, 0, 1e-6, cfg);
    CHECK(res.status == SolveStatus::Converged);
    CHECK(res.lower[0] == doctest::Approx(0.6).epsilon(1e-6));
    CHECK(res.upper[0] == doctest::Approx(0.6).epsilon(1e-6));
}

TEST_CASE("bvi_local without the monotone clamp still converges") {
    auto g = sgtest::g2();
    auto obj = sgtest::reach_label(g, "goal");
    SolveConfig cfg;
    cfg.monotone = false;
    auto res = bvi_local(g, obj, 0, 1e-6, cfg);
    CHECK(res.status == SolveStatus::Converged);
    CHECK(res.lower[0] == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(res.upper[0] == doctest::Approx(0.1).epsilon(1e-6));

    auto g3 = sgtest::g3();
    auto mp = bvi_local(g3, Objective::mean_payoff(), g3.find_label("q"), 1e-4, cfg);
    CHECK(mp.status == SolveStatus::Converged);
    CHECK(mp.lower[g3.find_label("q")] == doctest::Approx(6.0).epsilon(1e-4));
}

TEST_CASE("bvi_local is sound per iteration on random games") {
    for (std::uint64_t seed = 300; seed < 312; ++seed) {
        auto g = generate_random_game(seed);
        for (auto kind : {ObjectiveKind::Reachability, ObjectiveKind::Safety,
                          ObjectiveKind::TotalReward, ObjectiveKind::MeanPayoff}) {
            int target = static_cast<int>(seed % g.num_states());
            Objective obj = kind == ObjectiveKind::Reachability ? Objective::reachability({target})
                            : kind == ObjectiveKind::Safety    ? Objective::safety({target})
                            : kind == ObjectiveKind::TotalReward ? Objective::total_reward()
                                                                 : Objective::mean_payoff();
            auto [canon, report] = canonicalize(g, obj);
            auto oracle = exact_value(canon, obj);
            SolveConfig cfg;
            cfg.record_trace = true;
            cfg.iteration_cap = 20000;
            auto res = bvi_local(canon, obj, 0, 1e-5, cfg);
            CHECK(res.status == SolveStatus::Converged);
            for (int s = 0; s < canon.num_states(); ++s) {
                CHECK(res.lower[s] <= oracle.value[s] + 1e-9);
                CHECK(res.upper[s] + 1e-9 >= oracle.value[s]);
            }
            for (size_t i = 1; i < res.trace.size(); ++i) {
                CHECK(res.trace[i].lower + 1e-12 >= res.trace[i - 1].lower);
                CHECK(res.trace[i].upper <= res.trace[i - 1].upper + 1e-12);
            }
        }
    }
}
