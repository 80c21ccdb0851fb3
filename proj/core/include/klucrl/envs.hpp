#pragma once

#include "klucrl/mdp.hpp"
#include "klucrl/rng.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace klucrl {

enum class RewardMode { Deterministic, Bernoulli };

std::string to_string(RewardMode mode);

/// A sampling wrapper around a tabular model. Construction verifies the
/// model is communicating. Transition draws and reward noise come from two
/// separate seeded streams so paired experiments stay comparable.
class Environment {
public:
    Environment(Mdp model, RewardMode mode, int initial_state,
                std::vector<std::pair<std::string, std::string>> metadata);

    const Mdp& model() const { return model_; }
    RewardMode reward_mode() const { return mode_; }
    int current_state() const { return state_; }
    bool rewards_known_to_agent() const { return rewards_known_; }
    const std::vector<std::pair<std::string, std::string>>& metadata() const {
        return metadata_;
    }

    /// Reseeds both streams and returns to the initial state.
    void reset(std::uint64_t transition_seed, std::uint64_t reward_seed);

    void set_reward_mode(RewardMode mode) { mode_ = mode; }
    void set_rewards_known(bool known) { rewards_known_ = known; }

    /// Draws the next state from the current row and the reward per the
    /// reward mode; advances the environment state.
    std::pair<int, double> step(int action);

private:
    Mdp model_;
    RewardMode mode_;
    int initial_state_;
    int state_;
    bool rewards_known_ = false;
    Rng transition_rng_;
    Rng reward_rng_;
    std::vector<std::pair<std::string, std::string>> metadata_;
};

/// Six states in a row, two actions. Swimming right advances with a small
/// probability against the current; swimming left always succeeds. Rewards
/// sit at the two ends. Boundary rows fold the impossible move into "stay".
struct RiverSwimParams {
    int n_states = 6;
    double p_advance = 0.35; // action right, interior states
    double p_stay = 0.6;
    double p_regress = 0.05;
    double reward_left = 0.005; // leftmost state, action left
    double reward_right = 1.0;  // rightmost state, action right
};

Environment riverswim(const RiverSwimParams& params = {});

/// Seven states, six actions. From state 0, arm a reaches state a+1 with
/// probability p[a]; elsewhere action 0 self-loops collecting the state
/// reward and every other action returns to state 0.
struct SixArmsParams {
    std::vector<double> arm_success = {1.0, 0.15, 0.1, 0.05, 0.03, 0.01};
    std::vector<double> arm_reward = {50.0 / 6000.0, 133.0 / 6000.0, 300.0 / 6000.0,
                                      800.0 / 6000.0, 1666.0 / 6000.0, 1.0};
    bool rewards_known = true; // the benchmark convention: deterministic known rewards
};

Environment sixarms(const SixArmsParams& params = {});

/// Randomly generated sparse instance: each row gets a Binomial out-degree
/// (clamped to >= 1), distinct successors chosen uniformly, probabilities
/// from a flat Dirichlet, rewards uniform on [0,1]. Regenerates until the
/// model is communicating.
struct SparseGenConfig {
    int n_states = 10;
    int n_actions = 5;
    double avg_out_degree = 5.0;
    std::uint64_t seed = 0;
};

Environment random_sparse(const SparseGenConfig& config);

} // namespace klucrl
