#pragma once

#include "klucrl/extended_vi.hpp"
#include "klucrl/mdp.hpp"
#include "klucrl/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace klucrl {

/// Running visit counts N_t(x,a), N_t(x,a,x'), reward sums, and the
/// within-episode counts n_j(x,a).
class CountTables {
public:
    CountTables(int n_states, int n_actions);

    int n_states() const { return n_states_; }
    int n_actions() const { return n_actions_; }

    std::size_t pair_index(int x, int a) const {
        return static_cast<std::size_t>(x) * static_cast<std::size_t>(n_actions_) +
               static_cast<std::size_t>(a);
    }

    long visits(int x, int a) const { return visits_[pair_index(x, a)]; }
    long transitions(int x, int a, int y) const {
        return transitions_[pair_index(x, a) * static_cast<std::size_t>(n_states_) +
                            static_cast<std::size_t>(y)];
    }
    double reward_sum(int x, int a) const { return reward_sum_[pair_index(x, a)]; }
    long episode_visits(int x, int a) const { return episode_visits_[pair_index(x, a)]; }

    long total_visits() const { return total_; }

    /// Registers one observed transition (x, a, reward, y).
    void record(int x, int a, double reward, int y);

    /// Zeroes the within-episode counts n_j.
    void start_episode();

private:
    int n_states_;
    int n_actions_;
    std::vector<long> visits_;
    std::vector<long> transitions_;
    std::vector<double> reward_sum_;
    std::vector<long> episode_visits_;
    long total_ = 0;
};

/// Empirical model: p_hat rows (all-zero and flagged for unvisited pairs)
/// and mean reward estimates.
struct Estimates {
    std::vector<std::vector<double>> p_hat; // per pair, dimension n_states
    std::vector<double> r_hat;
    std::vector<bool> unvisited;
};

/// p_hat(x'|x,a) = N(x,a,x') / max(N(x,a),1), r_hat = reward_sum / max(N,1).
Estimates estimate(const CountTables& counts);

/// The confidence-ball constants of the KL-UCRL regret bound:
///   B   = log(2 e |X|^2 |A| log T / delta)
///   C_P = |X| (B + log(B + 1/log T) [1 + 1/(B + 1/log T)])
///   C_R = sqrt(log(4 |X| |A| log T / delta) / 1.99)
/// Requires horizon > 5.
std::pair<double, double> theorem1_constants(int n_states, int n_actions, long horizon,
                                             double delta);

/// Baseline L1/reward radii of the UCRL2 analysis:
///   eps_P = sqrt(14 |X| log(2 |A| t / delta) / max(N,1))
///   eps_R = sqrt(3.5 log(2 |X| |A| t / delta) / max(N,1))
std::pair<double, double> ucrl2_radii(int n_states, int n_actions, long t, long count,
                                      double delta);

/// Which learner to run; the metric is the only difference between them.
struct AgentConfig {
    long horizon = 100'000;      // T, fixed in the constants unless anytime is set
    double delta = 0.05;
    Metric metric = Metric::KL;
    std::optional<std::pair<double, double>> constant_overrides; // (C_P, C_R)
    bool anytime_constants = false; // substitute t_j for T in the constants
    bool cap_reward_at_one = true;
    std::optional<std::vector<double>> known_rewards; // per pair; radius 0 when set
    std::string evi_tolerance_rule = "1/sqrt(t_j)";
};

/// One planning event, logged at every episode start.
struct EpisodeEvent {
    int episode = 0;
    long start_time = 0; // t_j
    double gain = 0.0;   // optimistic gain rho~
    double c_p = 0.0;    // KL constant, or 0 for the L1 baseline
    double c_r = 0.0;
};

/// Episodic optimistic learner: KL-UCRL, or the UCRL2 baseline when
/// configured with the L1 metric. Interaction protocol per time step t:
///
///   int a = agent.act(x_t);          // may close the episode and replan
///   ... environment transition ...
///   agent.record(x_t, a, r_t, x_next);
class UcrlAgent {
public:
    UcrlAgent(int n_states, int n_actions, AgentConfig config, std::uint64_t seed);

    /// Chooses the action for the observed state; replans first when the
    /// episode-termination condition fires.
    int act(int state);

    /// Registers the observed transition and advances time.
    void record(int state, int action, double reward, int next_state);

    const CountTables& counts() const { return counts_; }
    const Policy& current_policy() const { return policy_; }
    int episode_index() const { return episode_; }
    long current_time() const { return t_; }
    const std::vector<EpisodeEvent>& episode_log() const { return episode_log_; }
    const AgentConfig& config() const { return config_; }

private:
    bool episode_should_end(int state) const;
    void begin_episode();
    ConfidenceSet build_confidence_set() const;
    std::pair<double, double> episode_constants() const; // (C_P, C_R), zeros for L1

    int n_states_;
    int n_actions_;
    AgentConfig config_;
    CountTables counts_;
    Policy policy_;
    int episode_ = 0;
    long episode_start_ = 1;
    long t_ = 1;
    std::vector<double> last_bias_; // warm start for the next planning call
    std::vector<EpisodeEvent> episode_log_;
};

} // namespace klucrl
