#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "sgsolver/bellman.hpp"
#include "sgsolver/generate.hpp"
#include "sgsolver/graph.hpp"
#include "sgsolver/oracle.hpp"

#include "support.hpp"

using namespace sgsolver;

namespace {

std::vector<int> labels_to_indices(const StochasticGame& g, std::vector<std::string> labels) {
    std::vector<int> out;
    for (auto& l : labels) out.push_back(g.find_label(l));
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("mecs of G1") {
    auto g = sgtest::g1();
    auto ms = mecs(g);
    REQUIRE(ms.size() == 3);
    CHECK(ms[0].states == labels_to_indices(g, {"p", "q"}));
    CHECK(ms[0].actions == std::vector<std::pair<int, int>>{{0, 0}, {1, 0}});  // a and b
    CHECK(ms[1].states == labels_to_indices(g, {"s"}));
    CHECK(ms[2].states == labels_to_indices(g, {"t"}));
    for (const auto& ec : ms) CHECK(is_valid_ec(g, ec));
}

TEST_CASE("mecs of G3") {
    auto g = sgtest::g3();
    auto ms = mecs(g);
    REQUIRE(ms.size() == 4);
    CHECK(ms[0].states == labels_to_indices(g, {"p", "q", "s"}));
    // Interior actions only: the three exits to Z0/Z0b/Z6 are excluded.
    for (const auto& [s, a] : ms[0].actions) {
        for (const auto& [succ, prob] : g.dist(s, a)) CHECK(ms[0].contains(succ));
    }
    CHECK(ms[1].states == labels_to_indices(g, {"Z0"}));
}

TEST_CASE("single absorbing state is its own MEC") {
    auto g = parse_game(R"({"states": [{"id": "a", "actions": [{"dist": {"a": 1.0}}]}]})");
    auto ms = mecs(g);
    REQUIRE(ms.size() == 1);
    CHECK(ms[0].states == std::vector<int>{0});
}

TEST_CASE("mec disjointness and validity on random games") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto g = generate_random_game(seed);
        std::vector<char> seen(g.num_states(), 0);
        for (const auto& ec : mecs(g)) {
            CHECK(is_valid_ec(g, ec));
            for (int s : ec.states) {
                CHECK(!seen[s]);
                seen[s] = 1;
            }
        }
    }
}

TEST_CASE("bsccs of induced G1 chains") {
    auto g = sgtest::g1();
    StrategyProfile sb(g.num_states(), 0);
    sb[1] = 0;  // q plays b
    auto chain_b = induce_chain(g, sb);
    auto bs_b = bsccs(chain_b);
    REQUIRE(bs_b.size() == 3);
    CHECK(bs_b[0] == std::vector<int>{0, 1});
    CHECK(bs_b[1] == std::vector<int>{2});
    CHECK(bs_b[2] == std::vector<int>{3});

    StrategyProfile sc(g.num_states(), 0);
    sc[1] = 1;  // q plays c: {p,q} is left with probability 2/3 per round
    auto bs_c = bsccs(induce_chain(g, sc));
    REQUIRE(bs_c.size() == 2);
    CHECK(bs_c[0] == std::vector<int>{2});
    CHECK(bs_c[1] == std::vector<int>{3});

    CHECK_THROWS_AS(bsccs(g), std::invalid_argument);
}

TEST_CASE("bsccs are reached almost surely (random chains)") {
    for (std::uint64_t seed = 50; seed < 80; ++seed) {
        GeneratorConfig cfg;
        cfg.max_actions = 1;
        auto chain = generate_random_game(seed, cfg);
        std::vector<int> bottom;
        for (const auto& comp : bsccs(chain))
            for (int s : comp) bottom.push_back(s);
        std::sort(bottom.begin(), bottom.end());
        auto reach = solve_mc(chain, Objective::reachability(bottom));
        for (int s = 0; s < chain.num_states(); ++s)
            CHECK(reach[s] == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("positive attractor on fixtures") {
    auto g1 = sgtest::g1();
    CHECK(positive_attractor(g1, {g1.find_label("t")}, Player::Maximizer) ==
          labels_to_indices(g1, {"p", "q", "t"}));

    std::vector<int> all(g1.num_states());
    for (int s = 0; s < g1.num_states(); ++s) all[s] = s;
    CHECK(positive_attractor(g1, all, Player::Maximizer) == all);

    auto g4 = sgtest::g4();
    CHECK(positive_attractor(g4, {g4.find_label("goal")}, Player::Maximizer) ==
          labels_to_indices(g4, {"p", "q", "s", "goal"}));
}

TEST_CASE("msecs per objective") {
    auto g1 = sgtest::g1();
    auto obj = sgtest::reach_label(g1, "t");
    CHECK(msecs(g1, obj, Player::Maximizer).size() == mecs(g1).size());

    // Total reward: an EC {u (r=0), w (r=1)} with Maximizer optimizing stays
    // a full MSEC, with Minimizer optimizing only the zero-reward part does.
    auto max_mdp = parse_game(R"({"states": [
        {"id": "u", "reward": 0, "actions": [{"name": "loop", "dist": {"u": 1.0}},
                                             {"name": "go", "dist": {"w": 1.0}}]},
        {"id": "w", "reward": 1, "actions": [{"name": "back", "dist": {"u": 1.0}},
                                             {"name": "out", "dist": {"z": 1.0}}]},
        {"id": "z", "reward": 0, "actions": [{"dist": {"z": 1.0}}]}
    ]})");
    auto tr = Objective::total_reward();

    auto max_side = msecs(max_mdp, tr, Player::Maximizer);
    REQUIRE(max_side.size() == 2);
    CHECK(max_side[0].states == std::vector<int>{0, 1});

    auto min_mdp = parse_game(R"({"states": [
        {"id": "u", "player": "min", "reward": 0,
         "actions": [{"name": "loop", "dist": {"u": 1.0}}, {"name": "go", "dist": {"w": 1.0}}]},
        {"id": "w", "player": "min", "reward": 1,
         "actions": [{"name": "back", "dist": {"u": 1.0}}, {"name": "out", "dist": {"z": 1.0}}]},
        {"id": "z", "player": "min", "reward": 0, "actions": [{"dist": {"z": 1.0}}]}
    ]})");
    auto min_side = msecs(min_mdp, tr, Player::Minimizer);
    REQUIRE(min_side.size() == 2);
    CHECK(min_side[0].states == std::vector<int>{0});  // w deleted
    CHECK(min_side[1].states == std::vector<int>{2});

    auto two_owner = sgtest::g2();
    CHECK_THROWS_AS(msecs(two_owner, sgtest::reach_label(two_owner, "goal"), Player::Maximizer),
                    std::invalid_argument);
}

TEST_CASE("infinite total-reward states on hand-built games") {
    // Maximizer positive-reward self-loop: infinite.
    auto loop = parse_game(
        R"({"states": [{"id": "m", "reward": 1, "actions": [{"dist": {"m": 1.0}}]}]})");
    CHECK(infinite_total_reward_states(loop) == std::vector<int>{0});

    // Minimizer-owned positive-reward loop with a zero-reward escape: finite.
    auto escape = parse_game(R"({"states": [
        {"id": "m", "player": "min", "reward": 1,
         "actions": [{"name": "loop", "dist": {"m": 1.0}}, {"name": "out", "dist": {"z": 1.0}}]},
        {"id": "z", "reward": 0, "actions": [{"dist": {"z": 1.0}}]}
    ]})");
    CHECK(infinite_total_reward_states(escape).empty());

    // All rewards zero: empty.
    auto zero = sgtest::g1();
    CHECK(infinite_total_reward_states(zero).empty());
}

TEST_CASE("infinite total-reward states match oracle divergence (random)") {
    const Objective tr = Objective::total_reward();
    for (std::uint64_t seed = 400; seed < 550; ++seed) {
        GeneratorConfig cfg;
        cfg.max_states = 5;
        auto g = generate_random_game(seed, cfg);
        std::vector<char> infinite(g.num_states(), 0);
        for (int s : infinite_total_reward_states(g)) infinite[s] = 1;
        auto oracle = exact_value(g, tr);
        for (int s = 0; s < g.num_states(); ++s)
            CHECK(infinite[s] == (oracle.value[s] == kInf));
    }
}

TEST_CASE("restrict_to") {
    auto g3 = sgtest::g3();
    auto ms = mecs(g3);
    auto restricted = restrict_to(g3, ms[0]);
    CHECK(restricted.num_states() == 3);
    for (int s = 0; s < restricted.num_states(); ++s) {
        CHECK(restricted.num_actions(s) >= 1);
        for (int a = 0; a < restricted.num_actions(s); ++a)
            for (const auto& [succ, p] : restricted.dist(s, a)) CHECK(succ < 3);
    }

    // Singleton absorbing EC restricts to a one-state self-loop game.
    auto single = restrict_to(g3, ms[1]);
    CHECK(single.num_states() == 1);
    CHECK(single.dist(0, 0)[0].first == 0);

    // An EC referencing an exiting action is rejected.
    EndComponent bad = ms[0];
    bad.actions.emplace_back(g3.find_label("q"), 2);  // q's exit to Z6
    std::sort(bad.actions.begin(), bad.actions.end());
    CHECK_THROWS_AS(restrict_to(g3, bad), std::invalid_argument);
}
