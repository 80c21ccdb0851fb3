#include "klucrl/agent.hpp"

#include "klucrl/errors.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace klucrl {

CountTables::CountTables(int n_states, int n_actions)
    : n_states_(n_states), n_actions_(n_actions) {
    if (n_states <= 0 || n_actions <= 0)
        throw std::invalid_argument("CountTables: dimensions must be positive");
    const std::size_t pairs =
        static_cast<std::size_t>(n_states) * static_cast<std::size_t>(n_actions);
    visits_.assign(pairs, 0);
    transitions_.assign(pairs * static_cast<std::size_t>(n_states), 0);
    reward_sum_.assign(pairs, 0.0);
    episode_visits_.assign(pairs, 0);
}

void CountTables::record(int x, int a, double reward, int y) {
    if (!(reward >= 0.0 && reward <= 1.0))
        throw std::invalid_argument("CountTables::record: reward outside [0,1]");
    const std::size_t k = pair_index(x, a);
    visits_[k] += 1;
    transitions_[k * static_cast<std::size_t>(n_states_) + static_cast<std::size_t>(y)] += 1;
    reward_sum_[k] += reward;
    episode_visits_[k] += 1;
    total_ += 1;
}

void CountTables::start_episode() {
    std::fill(episode_visits_.begin(), episode_visits_.end(), 0);
}

Estimates estimate(const CountTables& counts) {
    const int S = counts.n_states();
    const int A = counts.n_actions();
    Estimates est;
    est.p_hat.reserve(static_cast<std::size_t>(S) * static_cast<std::size_t>(A));
    for (int x = 0; x < S; ++x) {
        for (int a = 0; a < A; ++a) {
            const long n = counts.visits(x, a);
            const double denom = static_cast<double>(std::max(n, 1L));
            std::vector<double> row(static_cast<std::size_t>(S), 0.0);
            for (int y = 0; y < S; ++y)
                row[static_cast<std::size_t>(y)] =
                    static_cast<double>(counts.transitions(x, a, y)) / denom;
            est.p_hat.push_back(std::move(row));
            est.r_hat.push_back(counts.reward_sum(x, a) / denom);
            est.unvisited.push_back(n == 0);
        }
    }
    return est;
}

std::pair<double, double> theorem1_constants(int n_states, int n_actions, long horizon,
                                             double delta) {
    if (horizon <= 5)
        throw std::domain_error("theorem1_constants: horizon must exceed 5");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::domain_error("theorem1_constants: delta must lie in (0,1)");
    const double S = static_cast<double>(n_states);
    const double A = static_cast<double>(n_actions);
    const double logT = std::log(static_cast<double>(horizon));
    const double e = std::exp(1.0);

    const double B = std::log(2.0 * e * S * S * A * logT / delta);
    const double inner = B + 1.0 / logT;
    const double c_p = S * (B + std::log(inner) * (1.0 + 1.0 / inner));
    const double c_r = std::sqrt(std::log(4.0 * S * A * logT / delta) / 1.99);
    return {c_p, c_r};
}

std::pair<double, double> ucrl2_radii(int n_states, int n_actions, long t, long count,
                                      double delta) {
    if (t < 1) throw std::invalid_argument("ucrl2_radii: t must be >= 1");
    const double S = static_cast<double>(n_states);
    const double A = static_cast<double>(n_actions);
    const double n = static_cast<double>(std::max(count, 1L));
    const double td = static_cast<double>(t);
    const double eps_p = std::sqrt(14.0 * S * std::log(2.0 * A * td / delta) / n);
    const double eps_r = std::sqrt(3.5 * std::log(2.0 * S * A * td / delta) / n);
    return {eps_p, eps_r};
}

UcrlAgent::UcrlAgent(int n_states, int n_actions, AgentConfig config, std::uint64_t seed)
    : n_states_(n_states), n_actions_(n_actions), config_(std::move(config)),
      counts_(n_states, n_actions) {
    if (config_.metric == Metric::KL && !config_.constant_overrides &&
        config_.horizon <= 5)
        throw std::domain_error("UcrlAgent: Theorem 1 constants need horizon > 5");
    if (config_.known_rewards &&
        config_.known_rewards->size() !=
            static_cast<std::size_t>(n_states) * static_cast<std::size_t>(n_actions))
        throw std::invalid_argument("UcrlAgent: known_rewards table has wrong size");

    // arbitrary fixed initial policy, drawn once from the run seed
    Rng rng(seed);
    policy_.actions.resize(static_cast<std::size_t>(n_states));
    for (auto& a : policy_.actions)
        a = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_actions)));
}

bool UcrlAgent::episode_should_end(int state) const {
    const int a = policy_(state);
    const long within = counts_.episode_visits(state, a);
    const long before = /* N_{t_j}: global minus what this episode added */
        counts_.visits(state, a) - within;
    // a pair never visited before the episode triggers on its first visit;
    // the literal doubling condition can never fire at N = n = 0
    if (before == 0) return true;
    return within >= std::max(before, 1L);
}

std::pair<double, double> UcrlAgent::episode_constants() const {
    if (config_.metric != Metric::KL) return {0.0, 0.0};
    if (config_.constant_overrides) return *config_.constant_overrides;
    const long horizon =
        config_.anytime_constants ? std::max(episode_start_, 6L) : config_.horizon;
    return theorem1_constants(n_states_, n_actions_, horizon, config_.delta);
}

ConfidenceSet UcrlAgent::build_confidence_set() const {
    Estimates est = estimate(counts_);

    ConfidenceSet conf;
    conf.n_states = n_states_;
    conf.n_actions = n_actions_;
    conf.metric = config_.metric;
    conf.cap_reward_at_one = config_.cap_reward_at_one;
    conf.rewards_known = config_.known_rewards.has_value();

    const std::size_t pairs = est.r_hat.size();
    conf.p_hat.reserve(pairs);
    conf.r_hat.resize(pairs);
    conf.p_radius.resize(pairs);
    conf.r_radius.resize(pairs);
    conf.unvisited.assign(est.unvisited.begin(), est.unvisited.end());

    const auto [c_p, c_r] = episode_constants();

    for (int x = 0; x < n_states_; ++x) {
        for (int a = 0; a < n_actions_; ++a) {
            const std::size_t k = conf.pair_index(x, a);
            const long n = counts_.visits(x, a);
            const double n_safe = static_cast<double>(std::max(n, 1L));
            if (config_.metric == Metric::KL) {
                conf.p_radius[k] = c_p / n_safe;
                conf.r_radius[k] = c_r / std::sqrt(n_safe);
            } else {
                std::tie(conf.p_radius[k], conf.r_radius[k]) =
                    ucrl2_radii(n_states_, n_actions_, episode_start_, n, config_.delta);
            }
            if (config_.known_rewards) {
                conf.r_hat[k] = (*config_.known_rewards)[k];
                conf.r_radius[k] = 0.0;
            } else {
                conf.r_hat[k] = est.r_hat[k];
            }
            conf.p_hat.push_back(est.unvisited[k]
                                     ? SimplexVector::uniform(static_cast<std::size_t>(n_states_))
                                     : SimplexVector(std::move(est.p_hat[k])));
        }
    }
    return conf;
}

void UcrlAgent::begin_episode() {
    episode_ += 1;
    episode_start_ = t_;
    counts_.start_episode();

    const ConfidenceSet conf = build_confidence_set();
    const double tolerance = 1.0 / std::sqrt(static_cast<double>(episode_start_));
    const OptimisticSolution sol = extended_value_iteration(
        conf, tolerance, 1'000'000, last_bias_.empty() ? nullptr : &last_bias_);

    policy_ = sol.policy;
    last_bias_ = sol.bias;

    EpisodeEvent ev;
    ev.episode = episode_;
    ev.start_time = episode_start_;
    ev.gain = sol.gain;
    std::tie(ev.c_p, ev.c_r) = episode_constants();
    episode_log_.push_back(ev);
}

int UcrlAgent::act(int state) {
    if (state < 0 || state >= n_states_)
        throw std::invalid_argument("UcrlAgent::act: state index out of range");
    if (episode_should_end(state)) begin_episode();
    return policy_(state);
}

void UcrlAgent::record(int state, int action, double reward, int next_state) {
    counts_.record(state, action, reward, next_state);
    t_ += 1;
    assert(counts_.total_visits() == t_ - 1);
}

} // namespace klucrl
