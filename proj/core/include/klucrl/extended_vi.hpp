#pragma once

#include "klucrl/kl_opt.hpp"
#include "klucrl/mdp.hpp"
#include "klucrl/simplex.hpp"

#include <cstddef>
#include <vector>

namespace klucrl {

/// Geometry of the transition confidence balls.
enum class Metric { KL, L1 };

/// Per-pair estimates and radii describing the set of plausible models.
/// Rows of unvisited pairs hold a uniform placeholder (never consulted:
/// extended value iteration bypasses the solver for them).
struct ConfidenceSet {
    int n_states = 0;
    int n_actions = 0;
    Metric metric = Metric::KL;
    std::vector<SimplexVector> p_hat;  // indexed state * n_actions + action
    std::vector<double> r_hat;
    std::vector<double> p_radius;      // eps_P per pair
    std::vector<double> r_radius;      // eps_R per pair
    std::vector<bool> unvisited;       // N(x,a) == 0
    bool rewards_known = false;        // true: optimistic rewards never exceed r_hat + r_radius
    bool cap_reward_at_one = true;

    std::size_t pair_index(int state, int action) const {
        return static_cast<std::size_t>(state) * static_cast<std::size_t>(n_actions) +
               static_cast<std::size_t>(action);
    }

    /// Confidence set centered exactly on a known model, one shared radius
    /// per quantity. Handy for tests and demos.
    static ConfidenceSet around(const Mdp& mdp, double p_radius, double r_radius,
                                Metric metric);
};

/// min(r_hat + radius, 1); the cap can be dropped for ablation.
double optimistic_reward(double r_hat, double radius, bool cap_at_one = true);

/// Optimistic gain, bias, greedy policy, and the maximizing model rows for
/// the chosen actions.
struct OptimisticSolution {
    Policy policy;
    double gain = 0.0;
    std::vector<double> bias;                          // min entry 0
    std::vector<SimplexVector> optimistic_transitions; // one row per state (chosen action)
    std::vector<double> optimistic_rewards;            // per (state, action) pair
};

/// Solves the extended optimality equations over the confidence set:
/// u_{n+1}(x) = max_a [ optimistic reward + max over the ball of q.u_n ],
/// stopping when span(u_{n+1} - u_n) < tolerance. The value vector is
/// renormalized (minimum subtracted) every sweep. A span stall switches to
/// the damped update 0.5 u + 0.5 T(u), which has the same fixed-point gain,
/// policy and maximizer rows.
///
/// `warm_start` optionally seeds u_0 (defaults to zero); the fixed point
/// does not depend on it.
///
/// Throws ConvergenceError when max_sweeps is exhausted.
OptimisticSolution extended_value_iteration(const ConfidenceSet& conf, double tolerance,
                                            long max_sweeps = 1'000'000,
                                            const std::vector<double>* warm_start = nullptr);

} // namespace klucrl
