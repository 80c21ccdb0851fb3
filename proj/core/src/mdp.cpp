#include "klucrl/mdp.hpp"

#include "klucrl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace klucrl {

Mdp::Mdp(int n_states, int n_actions, std::vector<SimplexVector> transitions,
         std::vector<double> mean_rewards)
    : n_states_(n_states), n_actions_(n_actions),
      transitions_(std::move(transitions)), mean_rewards_(std::move(mean_rewards)) {
    if (n_states_ <= 0 || n_actions_ <= 0)
        throw ModelError("Mdp: state and action counts must be positive");
    const std::size_t pairs =
        static_cast<std::size_t>(n_states_) * static_cast<std::size_t>(n_actions_);
    if (transitions_.size() != pairs)
        throw ModelError("Mdp: expected one transition row per (state, action) pair");
    if (mean_rewards_.size() != pairs)
        throw ModelError("Mdp: expected one mean reward per (state, action) pair");
    for (const auto& row : transitions_)
        if (row.size() != static_cast<std::size_t>(n_states_))
            throw ModelError("Mdp: transition row dimension differs from state count");
    for (double r : mean_rewards_)
        if (!(r >= 0.0 && r <= 1.0))
            throw ModelError("Mdp: mean rewards must lie in [0,1]");
}

namespace {

constexpr long kStallCheckSweeps = 10'000; // sweeps before testing for a span stall
constexpr long kStallWindow = 5'000;

} // namespace

PlanningSolution value_iteration(const Mdp& mdp, double tolerance, long max_sweeps) {
    if (!(tolerance > 0.0))
        throw std::invalid_argument("value_iteration: tolerance must be > 0");

    const int S = mdp.n_states();
    const int A = mdp.n_actions();
    const std::size_t Su = static_cast<std::size_t>(S);

    std::vector<double> u(Su, 0.0), w(Su, 0.0);
    std::vector<int> best(Su, 0);

    // Once a span stall is detected the kernel is mixed with the identity
    // (0.5 I + 0.5 P, rewards kept), which removes periodicity while leaving
    // the gain and the greedy policy at the fixed point unchanged. The
    // converged u is then twice the original bias.
    bool transformed = false;
    double window_min = std::numeric_limits<double>::infinity();
    double prev_window_min = std::numeric_limits<double>::infinity();

    double sp = std::numeric_limits<double>::infinity();
    for (long sweep = 1; sweep <= max_sweeps; ++sweep) {
        for (int x = 0; x < S; ++x) {
            double best_value = -std::numeric_limits<double>::infinity();
            int best_action = 0;
            for (int a = 0; a < A; ++a) {
                const double pu = dot(mdp.row(x, a).values(), u);
                const double q = mdp.reward(x, a) + (transformed ? 0.5 * pu : pu);
                if (q > best_value) { // strict: ties resolve to the lowest action index
                    best_value = q;
                    best_action = a;
                }
            }
            if (transformed) best_value += 0.5 * u[static_cast<std::size_t>(x)];
            w[static_cast<std::size_t>(x)] = best_value;
            best[static_cast<std::size_t>(x)] = best_action;
        }

        double inc_min = std::numeric_limits<double>::infinity();
        double inc_max = -std::numeric_limits<double>::infinity();
        for (std::size_t x = 0; x < Su; ++x) {
            const double d = w[x] - u[x];
            inc_min = std::min(inc_min, d);
            inc_max = std::max(inc_max, d);
        }
        sp = inc_max - inc_min;

        if (sp < tolerance) {
            PlanningSolution out;
            out.gain = 0.5 * (inc_max + inc_min);
            const double m = *std::min_element(w.begin(), w.end());
            out.bias.resize(Su);
            const double scale = transformed ? 0.5 : 1.0;
            for (std::size_t x = 0; x < Su; ++x) out.bias[x] = scale * (w[x] - m);
            out.policy.actions.assign(best.begin(), best.end());
            return out;
        }

        const double m = *std::min_element(w.begin(), w.end());
        for (std::size_t x = 0; x < Su; ++x) u[x] = w[x] - m;

        if (!transformed) {
            window_min = std::min(window_min, sp);
            if (sweep % kStallWindow == 0) {
                if (sweep >= kStallCheckSweeps && window_min >= 0.999 * prev_window_min)
                    transformed = true; // span stopped shrinking: periodic kernel
                prev_window_min = window_min;
                window_min = std::numeric_limits<double>::infinity();
            }
        }
    }
    throw ConvergenceError("value_iteration: sweep cap " + std::to_string(max_sweeps) +
                               " exceeded, span reached " + std::to_string(sp),
                           sp);
}

bool is_communicating(const Mdp& mdp) {
    const int S = mdp.n_states();
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(S));
    std::vector<std::vector<int>> radj(static_cast<std::size_t>(S));
    for (int x = 0; x < S; ++x) {
        std::vector<bool> seen(static_cast<std::size_t>(S), false);
        for (int a = 0; a < mdp.n_actions(); ++a) {
            const auto& row = mdp.row(x, a);
            for (int y = 0; y < S; ++y)
                if (row[static_cast<std::size_t>(y)] > 0.0)
                    seen[static_cast<std::size_t>(y)] = true;
        }
        for (int y = 0; y < S; ++y)
            if (seen[static_cast<std::size_t>(y)]) {
                adj[static_cast<std::size_t>(x)].push_back(y);
                radj[static_cast<std::size_t>(y)].push_back(x);
            }
    }
    auto reach_all = [S](const std::vector<std::vector<int>>& g) {
        std::vector<bool> vis(static_cast<std::size_t>(S), false);
        std::vector<int> stack{0};
        vis[0] = true;
        while (!stack.empty()) {
            const int x = stack.back();
            stack.pop_back();
            for (int y : g[static_cast<std::size_t>(x)])
                if (!vis[static_cast<std::size_t>(y)]) {
                    vis[static_cast<std::size_t>(y)] = true;
                    stack.push_back(y);
                }
        }
        return std::all_of(vis.begin(), vis.end(), [](bool b) { return b; });
    };
    return reach_all(adj) && reach_all(radj);
}

namespace {

/// Optimal expected hitting times to `target` (unit cost per step, target
/// absorbing) with the minimizing greedy policy. Returns false when the
/// iteration cap is hit, which signals divergence.
bool hitting_times(const Mdp& m, int target, long max_sweeps,
                   std::vector<double>& J, std::vector<int>& pol) {
    const int S = m.n_states();
    const std::size_t Su = static_cast<std::size_t>(S);
    J.assign(Su, 0.0);
    pol.assign(Su, 0);
    std::vector<double> next(Su, 0.0);
    for (long sweep = 1; sweep <= max_sweeps; ++sweep) {
        double diff = 0.0;
        for (int x = 0; x < S; ++x) {
            if (x == target) {
                next[static_cast<std::size_t>(x)] = 0.0;
                continue;
            }
            double best = std::numeric_limits<double>::infinity();
            int best_a = 0;
            for (int a = 0; a < m.n_actions(); ++a) {
                const double v = 1.0 + dot(m.row(x, a).values(), J);
                if (v < best) {
                    best = v;
                    best_a = a;
                }
            }
            next[static_cast<std::size_t>(x)] = best;
            pol[static_cast<std::size_t>(x)] = best_a;
            diff = std::max(diff, std::abs(best - J[static_cast<std::size_t>(x)]));
        }
        J.swap(next);
        if (diff < 1e-10) return true;
    }
    return false;
}

} // namespace

DiameterDetails compute_diameter_details(const Mdp& mdp, long max_sweeps) {
    if (mdp.n_states() == 1) {
        DiameterDetails d;
        d.policy_for_worst_target.actions.assign(1, 0);
        d.hitting_times_worst_target.assign(1, 0.0);
        return d;
    }
    if (!is_communicating(mdp))
        throw ModelError("compute_diameter: diameter is infinite (MDP is not communicating)");

    DiameterDetails out;
    std::vector<double> J;
    std::vector<int> pol;
    for (int target = 0; target < mdp.n_states(); ++target) {
        if (!hitting_times(mdp, target, max_sweeps, J, pol))
            throw ModelError(
                "compute_diameter: hitting-time iteration diverged for target " +
                std::to_string(target) + " (diameter appears infinite)");
        for (int x = 0; x < mdp.n_states(); ++x) {
            if (J[static_cast<std::size_t>(x)] > out.diameter) {
                out.diameter = J[static_cast<std::size_t>(x)];
                out.worst_source = x;
                out.worst_target = target;
                out.policy_for_worst_target.actions = pol;
                out.hitting_times_worst_target = J;
            }
        }
    }
    return out;
}

double compute_diameter(const Mdp& mdp, long max_sweeps) {
    return compute_diameter_details(mdp, max_sweeps).diameter;
}

} // namespace klucrl
