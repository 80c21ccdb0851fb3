#pragma once

#include "klucrl/simplex.hpp"

#include <cstddef>
#include <vector>

namespace klucrl {

/// Deterministic stationary policy: one action index per state.
struct Policy {
    std::vector<int> actions;

    int operator()(int state) const { return actions[static_cast<std::size_t>(state)]; }
    std::size_t size() const { return actions.size(); }

    bool operator==(const Policy&) const = default;
};

/// Full tabular MDP: transition kernel rows on the simplex, mean rewards
/// in [0,1]. Rows are indexed by (state, action).
class Mdp {
public:
    Mdp(int n_states, int n_actions,
        std::vector<SimplexVector> transitions,
        std::vector<double> mean_rewards);

    int n_states() const { return n_states_; }
    int n_actions() const { return n_actions_; }

    std::size_t pair_index(int state, int action) const {
        return static_cast<std::size_t>(state) * static_cast<std::size_t>(n_actions_) +
               static_cast<std::size_t>(action);
    }

    const SimplexVector& row(int state, int action) const {
        return transitions_[pair_index(state, action)];
    }
    double reward(int state, int action) const {
        return mean_rewards_[pair_index(state, action)];
    }

    const std::vector<SimplexVector>& transitions() const { return transitions_; }
    const std::vector<double>& mean_rewards() const { return mean_rewards_; }

private:
    int n_states_;
    int n_actions_;
    std::vector<SimplexVector> transitions_; // indexed state * n_actions + action
    std::vector<double> mean_rewards_;
};

/// Gain, bias and greedy policy solving the average-reward optimality
/// equation. Bias is normalized so its minimum entry is 0.
struct PlanningSolution {
    double gain = 0.0;
    std::vector<double> bias;
    Policy policy;
};

/// Relative value iteration with the span stopping rule.
///
/// Stops when span(u_{n+1} - u_n) < tolerance; the gain is the midpoint
/// (max+min)/2 of the final increment. If the span stalls (periodic
/// kernels), restarts on the aperiodic transformation 0.5*I + 0.5*P,
/// which leaves the gain and the greedy policy unchanged.
///
/// Throws ConvergenceError when max_sweeps is exhausted.
PlanningSolution value_iteration(const Mdp& mdp, double tolerance,
                                 long max_sweeps = 1'000'000);

/// True when every state can reach every other under some action sequence
/// (strong connectivity of the union support graph).
bool is_communicating(const Mdp& mdp);

/// Worst-case over (source, target) pairs of the optimal expected hitting
/// time, solved as one stochastic-shortest-path problem per target.
/// Throws ModelError with an infinite-diameter message on
/// non-communicating input.
double compute_diameter(const Mdp& mdp, long max_sweeps = 1'000'000);

/// Diameter plus the witnessing pair and the minimizing policy for the
/// worst target; used by simulation cross-checks.
struct DiameterDetails {
    double diameter = 0.0;
    int worst_source = 0;
    int worst_target = 0;
    Policy policy_for_worst_target;                // SSP-optimal toward worst_target
    std::vector<double> hitting_times_worst_target;
};

DiameterDetails compute_diameter_details(const Mdp& mdp, long max_sweeps = 1'000'000);

} // namespace klucrl
