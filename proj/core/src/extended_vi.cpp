#include "klucrl/extended_vi.hpp"

#include "klucrl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace klucrl {

ConfidenceSet ConfidenceSet::around(const Mdp& mdp, double p_radius_value,
                                    double r_radius_value, Metric metric) {
    ConfidenceSet c;
    c.n_states = mdp.n_states();
    c.n_actions = mdp.n_actions();
    c.metric = metric;
    c.p_hat = mdp.transitions();
    c.r_hat = mdp.mean_rewards();
    const std::size_t pairs = c.p_hat.size();
    c.p_radius.assign(pairs, p_radius_value);
    c.r_radius.assign(pairs, r_radius_value);
    c.unvisited.assign(pairs, false);
    return c;
}

double optimistic_reward(double r_hat, double radius, bool cap_at_one) {
    if (!(r_hat >= 0.0 && r_hat <= 1.0))
        throw std::invalid_argument("optimistic_reward: r_hat must lie in [0,1]");
    if (!(radius >= 0.0))
        throw std::invalid_argument("optimistic_reward: radius must be >= 0");
    const double r = r_hat + radius;
    return cap_at_one ? std::min(r, 1.0) : r;
}

namespace {

constexpr long kStallCheckSweeps = 10'000;
constexpr long kStallWindow = 5'000;

std::size_t argmax_lowest(const std::vector<double>& u) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < u.size(); ++i)
        if (u[i] > u[best]) best = i;
    return best;
}

} // namespace

OptimisticSolution extended_value_iteration(const ConfidenceSet& conf, double tolerance,
                                            long max_sweeps,
                                            const std::vector<double>* warm_start) {
    if (!(tolerance > 0.0))
        throw std::invalid_argument("extended_value_iteration: tolerance must be > 0");
    const int S = conf.n_states;
    const int A = conf.n_actions;
    if (S <= 0 || A <= 0)
        throw std::invalid_argument("extended_value_iteration: empty confidence set");
    const std::size_t Su = static_cast<std::size_t>(S);
    const std::size_t pairs = Su * static_cast<std::size_t>(A);
    if (conf.p_hat.size() != pairs || conf.r_hat.size() != pairs ||
        conf.p_radius.size() != pairs || conf.r_radius.size() != pairs ||
        conf.unvisited.size() != pairs)
        throw std::invalid_argument("extended_value_iteration: inconsistent table sizes");

    std::vector<double> u(Su, 0.0);
    if (warm_start != nullptr && warm_start->size() == Su) u = *warm_start;
    std::vector<double> w(Su, 0.0);
    std::vector<int> best(Su, 0);
    std::vector<SimplexVector> chosen_rows;
    chosen_rows.reserve(Su);
    std::vector<double> opt_rewards(pairs, 0.0);

    bool damped = false;
    double window_min = std::numeric_limits<double>::infinity();
    double prev_window_min = std::numeric_limits<double>::infinity();

    double sp = std::numeric_limits<double>::infinity();
    for (long sweep = 1; sweep <= max_sweeps; ++sweep) {
        chosen_rows.clear();
        for (int x = 0; x < S; ++x) {
            double best_value = -std::numeric_limits<double>::infinity();
            int best_action = 0;
            SimplexVector best_row = SimplexVector::point_mass(Su, 0);
            for (int a = 0; a < A; ++a) {
                const std::size_t k = conf.pair_index(x, a);
                double reward = optimistic_reward(conf.r_hat[k], conf.r_radius[k],
                                                  conf.cap_reward_at_one);
                SimplexVector row = [&]() -> SimplexVector {
                    if (conf.unvisited[k]) {
                        // nothing observed: the honest ball is the whole simplex,
                        // so jump straight to the most promising state
                        if (!conf.rewards_known) reward = 1.0;
                        return SimplexVector::point_mass(Su, argmax_lowest(u));
                    }
                    if (conf.p_radius[k] == 0.0) return conf.p_hat[k];
                    if (conf.metric == Metric::KL)
                        return max_kl(conf.p_hat[k], u, conf.p_radius[k]).q;
                    return max_l1(conf.p_hat[k], u, conf.p_radius[k]);
                }();
                opt_rewards[k] = reward;
                const double q_value = reward + dot(row.values(), u);
                if (q_value > best_value) { // ties resolve to the lowest action index
                    best_value = q_value;
                    best_action = a;
                    best_row = std::move(row);
                }
            }
            w[static_cast<std::size_t>(x)] = best_value;
            best[static_cast<std::size_t>(x)] = best_action;
            chosen_rows.push_back(std::move(best_row));
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
            OptimisticSolution out;
            out.gain = 0.5 * (inc_max + inc_min);
            out.policy.actions.assign(best.begin(), best.end());
            const double m = *std::min_element(u.begin(), u.end());
            out.bias.resize(Su);
            for (std::size_t x = 0; x < Su; ++x) out.bias[x] = u[x] - m;
            out.optimistic_transitions = std::move(chosen_rows);
            out.optimistic_rewards = std::move(opt_rewards);
            return out;
        }

        if (damped) {
            for (std::size_t x = 0; x < Su; ++x) u[x] = 0.5 * u[x] + 0.5 * w[x];
        } else {
            u = w;
        }
        const double m = *std::min_element(u.begin(), u.end());
        for (std::size_t x = 0; x < Su; ++x) u[x] -= m;

        if (!damped) {
            window_min = std::min(window_min, sp);
            if (sweep % kStallWindow == 0) {
                if (sweep >= kStallCheckSweeps && window_min >= 0.999 * prev_window_min)
                    damped = true; // periodic optimistic kernel: damp the update
                prev_window_min = window_min;
                window_min = std::numeric_limits<double>::infinity();
            }
        }
    }
    throw ConvergenceError("extended_value_iteration: sweep cap " +
                               std::to_string(max_sweeps) + " exceeded, span reached " +
                               std::to_string(sp),
                           sp);
}

} // namespace klucrl
