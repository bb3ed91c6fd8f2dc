#include "sgsolver/generate.hpp"

#include <random>

namespace sgsolver {

StochasticGame generate_random_game(std::uint64_t seed, const GeneratorConfig& config) {
    std::mt19937_64 rng(seed);
    auto pick = [&rng](int lo, int hi) {
        return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
    };

    const int n = pick(1, config.max_states);
    std::vector<StateRecord> states(n);
    static const double kWeights[] = {0.25, 0.5, 0.75, 1.0};
    for (int s = 0; s < n; ++s) {
        auto& st = states[s];
        st.label = "s" + std::to_string(s);
        st.owner = (config.two_player && pick(0, 1) == 1) ? Player::Minimizer : Player::Maximizer;
        st.reward = (config.rewards && pick(0, 1) == 1) ? pick(1, 3) : 0;
        const int num_actions = pick(1, config.max_actions);
        for (int a = 0; a < num_actions; ++a) {
            ActionRecord act;
            act.name = "a" + std::to_string(a);
            const int support = pick(1, std::min(3, n));
            for (int k = 0; k < support; ++k) {
                int succ = pick(0, n - 1);
                bool present = false;
                for (auto& [t, w] : act.dist)
                    if (t == succ) {
                        w += kWeights[pick(0, 3)];
                        present = true;
                    }
                if (!present) act.dist.emplace_back(succ, kWeights[pick(0, 3)]);
            }
            double sum = 0.0;
            for (auto& [t, w] : act.dist) sum += w;
            for (auto& [t, w] : act.dist) w /= sum;
            st.actions.push_back(std::move(act));
        }
    }
    return StochasticGame(std::move(states));
}

}  // namespace sgsolver
