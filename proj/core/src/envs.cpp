#include "klucrl/envs.hpp"

#include "klucrl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace klucrl {

std::string to_string(RewardMode mode) {
    return mode == RewardMode::Deterministic ? "deterministic" : "bernoulli";
}

Environment::Environment(Mdp model, RewardMode mode, int initial_state,
                         std::vector<std::pair<std::string, std::string>> metadata)
    : model_(std::move(model)), mode_(mode), initial_state_(initial_state),
      state_(initial_state), metadata_(std::move(metadata)) {
    if (initial_state_ < 0 || initial_state_ >= model_.n_states())
        throw ModelError("Environment: initial state out of range");
    if (!is_communicating(model_))
        throw ModelError("Environment: model is not communicating");
}

void Environment::reset(std::uint64_t transition_seed, std::uint64_t reward_seed) {
    transition_rng_ = Rng(transition_seed);
    reward_rng_ = Rng(reward_seed);
    state_ = initial_state_;
}

std::pair<int, double> Environment::step(int action) {
    if (action < 0 || action >= model_.n_actions())
        throw std::invalid_argument("Environment::step: action index out of range");
    const auto& row = model_.row(state_, action);
    const int next = static_cast<int>(transition_rng_.categorical(row.values()));
    const double mean = model_.reward(state_, action);
    const double reward =
        mode_ == RewardMode::Deterministic ? mean : (reward_rng_.bernoulli(mean) ? 1.0 : 0.0);
    state_ = next;
    return {next, reward};
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

} // namespace

Environment riverswim(const RiverSwimParams& params) {
    const int S = params.n_states;
    if (S < 2) throw ModelError("riverswim: needs at least two states");
    const double p_up = params.p_advance;
    const double p_stay = params.p_stay;
    const double p_down = params.p_regress;
    if (!(p_up >= 0 && p_stay >= 0 && p_down >= 0) ||
        std::abs(p_up + p_stay + p_down - 1.0) > kSimplexTolerance)
        throw ModelError("riverswim: right-action probabilities must form a distribution");
    if (!(params.reward_left >= 0 && params.reward_left <= 1) ||
        !(params.reward_right >= 0 && params.reward_right <= 1))
        throw ModelError("riverswim: rewards must lie in [0,1]");

    constexpr int kLeft = 0;
    constexpr int kRight = 1;
    const std::size_t Su = static_cast<std::size_t>(S);

    std::vector<SimplexVector> rows;
    std::vector<double> rewards(Su * 2, 0.0);
    rows.reserve(Su * 2);
    for (int x = 0; x < S; ++x) {
        // action left: always succeeds, leftmost folds into stay
        std::vector<double> left(Su, 0.0);
        left[static_cast<std::size_t>(std::max(x - 1, 0))] = 1.0;
        // action right: advance / stay / regress, boundaries fold into stay
        std::vector<double> right(Su, 0.0);
        right[static_cast<std::size_t>(std::min(x + 1, S - 1))] += p_up;
        right[static_cast<std::size_t>(x)] += p_stay;
        right[static_cast<std::size_t>(std::max(x - 1, 0))] += p_down;
        rows.emplace_back(std::move(left));
        rows.emplace_back(std::move(right));
    }
    rewards[0 * 2 + kLeft] = params.reward_left;
    rewards[static_cast<std::size_t>(S - 1) * 2 + kRight] = params.reward_right;

    std::vector<std::pair<std::string, std::string>> meta = {
        {"env", "riverswim"},
        {"n_states", std::to_string(S)},
        {"n_actions", "2"},
        {"p_advance", fmt(p_up)},
        {"p_stay", fmt(p_stay)},
        {"p_regress", fmt(p_down)},
        {"reward_left", fmt(params.reward_left)},
        {"reward_right", fmt(params.reward_right)},
    };
    return Environment(Mdp(S, 2, std::move(rows), std::move(rewards)),
                       RewardMode::Deterministic, 0, std::move(meta));
}

Environment sixarms(const SixArmsParams& params) {
    constexpr int kArms = 6;
    const int S = kArms + 1;
    if (params.arm_success.size() != kArms || params.arm_reward.size() != kArms)
        throw ModelError("sixarms: expected exactly six arm probabilities and rewards");
    for (double p : params.arm_success)
        if (!(p > 0.0 && p <= 1.0))
            throw ModelError("sixarms: arm probabilities must lie in (0,1]");
    for (double r : params.arm_reward)
        if (!(r >= 0.0 && r <= 1.0))
            throw ModelError("sixarms: arm rewards must lie in [0,1]");

    const std::size_t Su = static_cast<std::size_t>(S);
    std::vector<SimplexVector> rows;
    std::vector<double> rewards(Su * kArms, 0.0);
    rows.reserve(Su * kArms);

    // state 0: arm a reaches state a+1 w.p. p_a, stays otherwise; no reward
    for (int a = 0; a < kArms; ++a) {
        std::vector<double> row(Su, 0.0);
        row[static_cast<std::size_t>(a + 1)] = params.arm_success[static_cast<std::size_t>(a)];
        row[0] = 1.0 - params.arm_success[static_cast<std::size_t>(a)];
        rows.emplace_back(std::move(row));
    }
    // states 1..6: action 0 self-loops collecting R_x, the rest return to 0
    for (int x = 1; x < S; ++x) {
        for (int a = 0; a < kArms; ++a) {
            std::vector<double> row(Su, 0.0);
            if (a == 0) {
                row[static_cast<std::size_t>(x)] = 1.0;
                rewards[static_cast<std::size_t>(x) * kArms + static_cast<std::size_t>(a)] =
                    params.arm_reward[static_cast<std::size_t>(x - 1)];
            } else {
                row[0] = 1.0;
            }
            rows.emplace_back(std::move(row));
        }
    }

    std::vector<std::pair<std::string, std::string>> meta = {
        {"env", "sixarms"},
        {"n_states", std::to_string(S)},
        {"n_actions", std::to_string(kArms)},
        {"self_loop_action", "0"},
        {"rewards_known", params.rewards_known ? "true" : "false"},
    };
    for (int a = 0; a < kArms; ++a) {
        meta.emplace_back("arm_success_" + std::to_string(a + 1),
                          fmt(params.arm_success[static_cast<std::size_t>(a)]));
        meta.emplace_back("arm_reward_" + std::to_string(a + 1),
                          fmt(params.arm_reward[static_cast<std::size_t>(a)]));
    }
    Environment env(Mdp(S, kArms, std::move(rows), std::move(rewards)),
                    RewardMode::Deterministic, 0, std::move(meta));
    env.set_rewards_known(params.rewards_known);
    return env;
}

Environment random_sparse(const SparseGenConfig& config) {
    if (config.n_states < 2 || config.n_actions < 1)
        throw ModelError("random_sparse: need at least two states and one action");
    if (!(config.avg_out_degree >= 1.0 &&
          config.avg_out_degree <= static_cast<double>(config.n_states)))
        throw ModelError("random_sparse: avg_out_degree must lie in [1, n_states]");

    const int S = config.n_states;
    const int A = config.n_actions;
    const std::size_t Su = static_cast<std::size_t>(S);
    const double p_edge = config.avg_out_degree / static_cast<double>(S);

    Rng rng(derive_seed(config.seed, 0, "sparse-gen"));

    constexpr int kMaxRetries = 100;
    for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
        std::vector<SimplexVector> rows;
        std::vector<double> rewards;
        rows.reserve(Su * static_cast<std::size_t>(A));
        rewards.reserve(Su * static_cast<std::size_t>(A));
        for (int x = 0; x < S; ++x) {
            for (int a = 0; a < A; ++a) {
                // out-degree ~ Binomial(S, avg/S), clamped to >= 1
                int degree = 0;
                for (int i = 0; i < S; ++i)
                    if (rng.bernoulli(p_edge)) ++degree;
                degree = std::max(degree, 1);

                // distinct successors by partial Fisher-Yates
                std::vector<int> pool(Su);
                for (int i = 0; i < S; ++i) pool[static_cast<std::size_t>(i)] = i;
                for (int i = 0; i < degree; ++i) {
                    const std::size_t j =
                        static_cast<std::size_t>(i) +
                        static_cast<std::size_t>(rng.uniform_int(static_cast<std::uint64_t>(S - i)));
                    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
                }

                // flat Dirichlet over the chosen successors
                std::vector<double> row(Su, 0.0);
                double total = 0.0;
                std::vector<double> gammas(static_cast<std::size_t>(degree));
                for (auto& g : gammas) {
                    g = rng.exponential();
                    total += g;
                }
                for (int i = 0; i < degree; ++i)
                    row[static_cast<std::size_t>(pool[static_cast<std::size_t>(i)])] =
                        gammas[static_cast<std::size_t>(i)] / total;

                rows.emplace_back(std::move(row));
                rewards.push_back(rng.uniform01());
            }
        }

        Mdp model(S, A, std::move(rows), std::move(rewards));
        if (!is_communicating(model)) continue;

        std::vector<std::pair<std::string, std::string>> meta = {
            {"env", "sparse"},
            {"n_states", std::to_string(S)},
            {"n_actions", std::to_string(A)},
            {"avg_out_degree", fmt(config.avg_out_degree)},
            {"gen_seed", std::to_string(config.seed)},
            {"gen_attempts", std::to_string(attempt + 1)},
        };
        return Environment(std::move(model), RewardMode::Deterministic, 0, std::move(meta));
    }
    throw ModelError("random_sparse: no communicating instance after 100 attempts");
}

} // namespace klucrl
