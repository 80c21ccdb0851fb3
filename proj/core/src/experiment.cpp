#include "klucrl/experiment.hpp"

#include "klucrl/agent.hpp"
#include "klucrl/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace klucrl {

std::string to_string(EnvKind kind) {
    switch (kind) {
    case EnvKind::RiverSwim: return "riverswim";
    case EnvKind::SixArms: return "sixarms";
    case EnvKind::Sparse: return "sparse";
    }
    return "unknown";
}

EnvKind parse_env_kind(const std::string& name) {
    if (name == "riverswim") return EnvKind::RiverSwim;
    if (name == "sixarms") return EnvKind::SixArms;
    if (name == "sparse") return EnvKind::Sparse;
    throw std::invalid_argument("unknown environment: " + name);
}

RegretTrace compute_regret(const std::vector<double>& rewards, double optimal_gain) {
    RegretTrace trace;
    trace.cumulative_reward.resize(rewards.size());
    trace.regret.resize(rewards.size());
    double cum = 0.0;
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        cum += rewards[i];
        trace.cumulative_reward[i] = cum;
        trace.regret[i] = static_cast<double>(i + 1) * optimal_gain - cum;
    }
    return trace;
}

namespace {

/// Strongly connected components of the support graph of a policy-induced
/// chain (iterative Kosaraju; states are few).
std::vector<std::vector<int>> scc_components(const std::vector<std::vector<int>>& adj) {
    const int n = static_cast<int>(adj.size());
    std::vector<std::vector<int>> radj(static_cast<std::size_t>(n));
    for (int x = 0; x < n; ++x)
        for (int y : adj[static_cast<std::size_t>(x)])
            radj[static_cast<std::size_t>(y)].push_back(x);

    std::vector<int> order;
    std::vector<bool> vis(static_cast<std::size_t>(n), false);
    for (int s = 0; s < n; ++s) {
        if (vis[static_cast<std::size_t>(s)]) continue;
        // iterative DFS with explicit finish events
        std::vector<std::pair<int, std::size_t>> stack{{s, 0}};
        vis[static_cast<std::size_t>(s)] = true;
        while (!stack.empty()) {
            auto& [x, next] = stack.back();
            if (next < adj[static_cast<std::size_t>(x)].size()) {
                const int y = adj[static_cast<std::size_t>(x)][next++];
                if (!vis[static_cast<std::size_t>(y)]) {
                    vis[static_cast<std::size_t>(y)] = true;
                    stack.emplace_back(y, 0);
                }
            } else {
                order.push_back(x);
                stack.pop_back();
            }
        }
    }

    std::vector<std::vector<int>> comps;
    std::vector<bool> assigned(static_cast<std::size_t>(n), false);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (assigned[static_cast<std::size_t>(*it)]) continue;
        std::vector<int> comp;
        std::vector<int> stack{*it};
        assigned[static_cast<std::size_t>(*it)] = true;
        while (!stack.empty()) {
            const int x = stack.back();
            stack.pop_back();
            comp.push_back(x);
            for (int y : radj[static_cast<std::size_t>(x)])
                if (!assigned[static_cast<std::size_t>(y)]) {
                    assigned[static_cast<std::size_t>(y)] = true;
                    stack.push_back(y);
                }
        }
        comps.push_back(std::move(comp));
    }
    return comps;
}

/// Stationary distribution of an irreducible chain restricted to `states`.
std::vector<double> stationary_distribution(const Mdp& mdp, const Policy& policy,
                                            const std::vector<int>& states) {
    const std::size_t k = states.size();
    std::vector<int> pos(static_cast<std::size_t>(mdp.n_states()), -1);
    for (std::size_t i = 0; i < k; ++i) pos[static_cast<std::size_t>(states[i])] = static_cast<int>(i);

    // rows: (P^T - I) with the last equation replaced by sum(mu) = 1
    std::vector<std::vector<double>> m(k, std::vector<double>(k + 1, 0.0));
    for (std::size_t j = 0; j < k; ++j) {
        const auto& row = mdp.row(states[j], policy(states[j]));
        for (std::size_t i = 0; i < k; ++i)
            m[i][j] += row[static_cast<std::size_t>(states[i])];
        m[j][j] -= 1.0;
    }
    for (std::size_t j = 0; j < k; ++j) m[k - 1][j] = 1.0;
    m[k - 1][k] = 1.0;

    // Gaussian elimination with partial pivoting
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < k; ++r)
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        std::swap(m[col], m[pivot]);
        if (std::abs(m[col][col]) < 1e-14)
            throw ModelError("stationary_distribution: singular system");
        for (std::size_t r = 0; r < k; ++r) {
            if (r == col) continue;
            const double factor = m[r][col] / m[col][col];
            if (factor == 0.0) continue;
            for (std::size_t c = col; c <= k; ++c) m[r][c] -= factor * m[col][c];
        }
    }
    std::vector<double> mu(k);
    for (std::size_t i = 0; i < k; ++i) mu[i] = m[i][k] / m[i][i];
    return mu;
}

} // namespace

double policy_gain(const Mdp& mdp, const Policy& policy) {
    const int S = mdp.n_states();
    if (policy.size() != static_cast<std::size_t>(S))
        throw std::invalid_argument("policy_gain: policy size mismatch");

    std::vector<std::vector<int>> adj(static_cast<std::size_t>(S));
    for (int x = 0; x < S; ++x) {
        const auto& row = mdp.row(x, policy(x));
        for (int y = 0; y < S; ++y)
            if (row[static_cast<std::size_t>(y)] > 0.0)
                adj[static_cast<std::size_t>(x)].push_back(y);
    }

    const auto comps = scc_components(adj);
    std::vector<int> comp_of(static_cast<std::size_t>(S), -1);
    for (std::size_t c = 0; c < comps.size(); ++c)
        for (int x : comps[c]) comp_of[static_cast<std::size_t>(x)] = static_cast<int>(c);

    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < comps.size(); ++c) {
        bool recurrent = true;
        for (int x : comps[c])
            for (int y : adj[static_cast<std::size_t>(x)])
                if (comp_of[static_cast<std::size_t>(y)] != static_cast<int>(c)) {
                    recurrent = false;
                    break;
                }
        if (!recurrent) continue;
        const auto mu = stationary_distribution(mdp, policy, comps[c]);
        double gain = 0.0;
        for (std::size_t i = 0; i < comps[c].size(); ++i)
            gain += mu[i] * mdp.reward(comps[c][i], policy(comps[c][i]));
        best = std::max(best, gain);
    }
    return best;
}

std::optional<double> optimality_margin(const Mdp& mdp) {
    const int S = mdp.n_states();
    const int A = mdp.n_actions();
    if (static_cast<long>(S) * A > 20) return std::nullopt;

    const double rho_star = value_iteration(mdp, 1e-9).gain;
    constexpr double kTieTolerance = 1e-6;

    double best_suboptimal = -std::numeric_limits<double>::infinity();
    Policy policy;
    policy.actions.assign(static_cast<std::size_t>(S), 0);
    while (true) {
        const double g = policy_gain(mdp, policy);
        if (g < rho_star - kTieTolerance) best_suboptimal = std::max(best_suboptimal, g);
        // next policy in lexicographic order
        int digit = 0;
        while (digit < S) {
            if (++policy.actions[static_cast<std::size_t>(digit)] < A) break;
            policy.actions[static_cast<std::size_t>(digit)] = 0;
            ++digit;
        }
        if (digit == S) break;
    }
    if (!std::isfinite(best_suboptimal)) return std::nullopt;
    return rho_star - best_suboptimal;
}

BoundCurves theorem_bound_curve(int n_states, int n_actions, double diameter, double delta,
                                const std::vector<long>& t_grid,
                                std::optional<double> margin) {
    BoundCurves out;
    const double S = static_cast<double>(n_states);
    const double A = static_cast<double>(n_actions);
    out.theorem1.reserve(t_grid.size());
    if (margin) out.theorem2.emplace();
    for (long t : t_grid) {
        if (t <= 5)
            throw std::invalid_argument("theorem_bound_curve: grid entries must exceed 5");
        const double td = static_cast<double>(t);
        out.theorem1.push_back(24.0 * diameter * S *
                               std::sqrt(A * td * std::log(std::log(td) / delta)));
        if (margin)
            out.theorem2->push_back(400.0 * diameter * diameter * S * S * A * std::log(td) /
                                    *margin);
    }
    return out;
}

std::vector<long> thinned_timesteps(long horizon) {
    std::vector<long> ts;
    for (long t = 1; t <= std::min(horizon, 1000L); ++t) ts.push_back(t);
    for (long t = 1100; t <= horizon; t += 100) ts.push_back(t);
    if (ts.empty() || ts.back() != horizon) ts.push_back(horizon);
    return ts;
}

Environment make_environment(const ExperimentConfig& config) {
    Environment env = [&]() {
        switch (config.env) {
        case EnvKind::RiverSwim: return riverswim(config.riverswim_params);
        case EnvKind::SixArms: return sixarms(config.sixarms_params);
        case EnvKind::Sparse: return random_sparse(config.sparse_config);
        }
        throw std::invalid_argument("make_environment: unknown environment kind");
    }();
    env.set_reward_mode(config.reward_mode);
    if (config.known_rewards) env.set_rewards_known(*config.known_rewards);
    return env;
}

std::string format_double(double v) {
    char buf[40];
    for (int precision : {15, 16, 17}) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

namespace {

Metric metric_for(const std::string& algorithm) {
    if (algorithm == "klucrl") return Metric::KL;
    if (algorithm == "ucrl2") return Metric::L1;
    throw std::invalid_argument("unknown algorithm: " + algorithm +
                                " (expected klucrl or ucrl2)");
}

struct SingleRun {
    RegretTrace trace;
    int episodes = 0;
    std::vector<EpisodeRecord> episode_records;
};

SingleRun run_one(const ExperimentConfig& config, const std::string& algorithm,
                  int replication, double optimal_gain) {
    Environment env = make_environment(config);
    env.reset(derive_seed(config.base_seed, static_cast<std::uint64_t>(replication), "env"),
              derive_seed(config.base_seed, static_cast<std::uint64_t>(replication), "reward"));

    AgentConfig ac;
    ac.horizon = config.horizon;
    ac.delta = config.delta;
    ac.metric = metric_for(algorithm);
    if (env.rewards_known_to_agent()) ac.known_rewards = env.model().mean_rewards();

    UcrlAgent agent(env.model().n_states(), env.model().n_actions(), ac,
                    derive_seed(config.base_seed, static_cast<std::uint64_t>(replication),
                                "agent"));

    std::vector<double> rewards;
    rewards.reserve(static_cast<std::size_t>(config.horizon));
    for (long t = 1; t <= config.horizon; ++t) {
        const int x = env.current_state();
        const int a = agent.act(x);
        const auto [next, r] = env.step(a);
        agent.record(x, a, r, next);
        rewards.push_back(r);
    }

    SingleRun out;
    out.trace = compute_regret(rewards, optimal_gain);
    out.trace.algorithm = algorithm;
    out.trace.replication = replication;
    out.episodes = agent.episode_index();
    for (const EpisodeEvent& ev : agent.episode_log()) {
        EpisodeRecord rec;
        rec.algorithm = algorithm;
        rec.replication = replication;
        rec.episode = ev.episode;
        rec.start_time = ev.start_time;
        rec.gain = ev.gain;
        rec.c_p = ev.c_p;
        rec.c_r = ev.c_r;
        out.episode_records.push_back(rec);
    }
    return out;
}

void write_csv(const ExperimentResult& result, const ExperimentConfig& config,
               const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (const auto& [k, v] : result.metadata) out << "# " << k << " = " << v << "\n";
    out << "algorithm,env,replication,t,cumulative_reward,regret\n";
    const auto ts = thinned_timesteps(config.horizon);
    const std::string env_name = to_string(config.env);
    for (const auto& trace : result.traces) {
        for (long t : ts) {
            const std::size_t i = static_cast<std::size_t>(t - 1);
            out << trace.algorithm << ',' << env_name << ',' << trace.replication << ','
                << t << ',' << format_double(trace.cumulative_reward[i]) << ','
                << format_double(trace.regret[i]) << "\n";
        }
    }
}

void write_episodes(const ExperimentResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "algorithm,replication,episode,t_start,optimistic_gain,C_P,C_R\n";
    for (const auto& e : result.episodes)
        out << e.algorithm << ',' << e.replication << ',' << e.episode << ','
            << e.start_time << ',' << format_double(e.gain) << ','
            << format_double(e.c_p) << ',' << format_double(e.c_r) << "\n";
}

void write_summary(const ExperimentResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (const auto& [k, v] : result.metadata) out << "# " << k << " = " << v << "\n";
    for (const auto& s : result.summaries) {
        out << "algorithm = " << s.algorithm << "\n";
        out << "mean_final_regret = " << format_double(s.mean_final_regret) << "\n";
        out << "stderr_final_regret = " << format_double(s.stderr_final_regret) << "\n";
        out << "final_regrets =";
        for (double r : s.final_regrets) out << ' ' << format_double(r);
        out << "\n";
        out << "episodes =";
        for (int e : s.episode_counts) out << ' ' << e;
        out << "\n";
    }
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    if (config.horizon <= 5)
        throw std::invalid_argument("run_experiment: horizon must exceed 5");
    if (config.replications < 1)
        throw std::invalid_argument("run_experiment: need at least one replication");
    if (config.algorithms.empty())
        throw std::invalid_argument("run_experiment: no algorithms configured");
    for (const auto& a : config.algorithms) metric_for(a); // validate names early

    const Environment env0 = make_environment(config);
    const Mdp& model = env0.model();

    const PlanningSolution plan = value_iteration(model, 1e-9);
    const double diameter = compute_diameter(model);
    const std::optional<double> margin = optimality_margin(model);

    ExperimentResult result;
    result.optimal_gain = plan.gain;
    result.diameter = diameter;

    const std::size_t n_algos = config.algorithms.size();
    const std::size_t n_runs = n_algos * static_cast<std::size_t>(config.replications);
    result.traces.resize(n_runs);
    std::vector<int> episodes(n_runs, 0);
    std::vector<std::vector<EpisodeRecord>> episode_records(n_runs);
    std::vector<std::string> failures(n_runs);

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n_threads =
        std::min<std::size_t>(config.threads > 0 ? static_cast<std::size_t>(config.threads) : hw,
                              n_runs);

    std::atomic<std::size_t> next_run{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next_run.fetch_add(1);
            if (i >= n_runs) return;
            const std::string& algo = config.algorithms[i / static_cast<std::size_t>(config.replications)];
            const int rep = static_cast<int>(i % static_cast<std::size_t>(config.replications));
            try {
                SingleRun run = run_one(config, algo, rep, plan.gain);
                result.traces[i] = std::move(run.trace);
                episodes[i] = run.episodes;
                episode_records[i] = std::move(run.episode_records);
            } catch (const std::exception& e) {
                failures[i] = std::string(e.what());
            }
        }
    };
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (std::size_t i = 0; i < n_runs; ++i)
        if (!failures[i].empty())
            throw std::runtime_error(
                "run_experiment: replication " +
                std::to_string(i % static_cast<std::size_t>(config.replications)) + " of " +
                config.algorithms[i / static_cast<std::size_t>(config.replications)] +
                " failed, run aborted: " + failures[i]);

    for (auto& records : episode_records)
        for (auto& rec : records) result.episodes.push_back(std::move(rec));

    for (std::size_t ai = 0; ai < n_algos; ++ai) {
        AlgorithmSummary s;
        s.algorithm = config.algorithms[ai];
        for (int rep = 0; rep < config.replications; ++rep) {
            const auto& trace =
                result.traces[ai * static_cast<std::size_t>(config.replications) +
                              static_cast<std::size_t>(rep)];
            s.final_regrets.push_back(trace.regret.back());
            s.episode_counts.push_back(
                episodes[ai * static_cast<std::size_t>(config.replications) +
                         static_cast<std::size_t>(rep)]);
        }
        const double n = static_cast<double>(s.final_regrets.size());
        double mean = 0.0;
        for (double r : s.final_regrets) mean += r;
        mean /= n;
        double var = 0.0;
        for (double r : s.final_regrets) var += (r - mean) * (r - mean);
        s.mean_final_regret = mean;
        s.stderr_final_regret = n > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
        result.summaries.push_back(std::move(s));
    }

    // metadata: everything needed to reproduce the run and to overlay bounds
    auto& meta = result.metadata;
    for (const auto& kv : env0.metadata()) meta.push_back(kv);
    meta.emplace_back("reward_mode", to_string(config.reward_mode));
    meta.emplace_back("rewards_known_to_agent",
                      env0.rewards_known_to_agent() ? "true" : "false");
    std::string algos;
    for (const auto& a : config.algorithms) algos += (algos.empty() ? "" : ",") + a;
    meta.emplace_back("algorithms", algos);
    meta.emplace_back("horizon", std::to_string(config.horizon));
    meta.emplace_back("replications", std::to_string(config.replications));
    meta.emplace_back("base_seed", std::to_string(config.base_seed));
    meta.emplace_back("delta", format_double(config.delta));
    meta.emplace_back("seed_split", "splitmix64(base_seed, replication, stream) with "
                                    "streams env/reward/agent");
    meta.emplace_back("rho_star", format_double(plan.gain));
    meta.emplace_back("diameter", format_double(diameter));
    if (margin) meta.emplace_back("margin", format_double(*margin));
    for (const auto& a : config.algorithms) {
        if (metric_for(a) == Metric::KL) {
            const auto [cp, cr] =
                theorem1_constants(model.n_states(), model.n_actions(), config.horizon,
                                   config.delta);
            meta.emplace_back("C_P", format_double(cp));
            meta.emplace_back("C_R", format_double(cr));
        }
    }

    if (config.write_files) {
        namespace fs = std::filesystem;
        fs::create_directories(config.out_dir);
        result.csv_path = (fs::path(config.out_dir) / "regret.csv").string();
        result.summary_path = (fs::path(config.out_dir) / "summary.txt").string();
        result.episodes_path = (fs::path(config.out_dir) / "episodes.csv").string();
        write_csv(result, config, result.csv_path);
        write_summary(result, result.summary_path);
        write_episodes(result, result.episodes_path);
    }
    return result;
}

RegretCsv parse_regret_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError("cannot open " + path, 0);

    RegretCsv csv;
    std::string line;
    long line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            const auto eq = body.find('=');
            if (eq != std::string::npos) {
                auto trim = [](std::string s) {
                    const auto b = s.find_first_not_of(' ');
                    const auto e = s.find_last_not_of(' ');
                    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
                };
                csv.metadata.emplace_back(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
            }
            continue;
        }
        if (!header_seen) {
            if (line != "algorithm,env,replication,t,cumulative_reward,regret")
                throw CsvError("unexpected header: " + line, line_no);
            header_seen = true;
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 6) throw CsvError("expected 6 fields", line_no);
        CsvRow row;
        row.algorithm = fields[0];
        row.env = fields[1];
        try {
            std::size_t pos = 0;
            row.replication = std::stoi(fields[2], &pos);
            if (pos != fields[2].size()) throw std::invalid_argument("trailing characters");
            row.t = std::stol(fields[3], &pos);
            if (pos != fields[3].size()) throw std::invalid_argument("trailing characters");
            row.cumulative_reward = std::stod(fields[4], &pos);
            if (pos != fields[4].size()) throw std::invalid_argument("trailing characters");
            row.regret = std::stod(fields[5], &pos);
            if (pos != fields[5].size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception& e) {
            throw CsvError(std::string("malformed numeric field: ") + e.what(), line_no);
        }
        csv.rows.push_back(std::move(row));
    }
    if (!header_seen) throw CsvError("missing header row", line_no);
    return csv;
}

} // namespace klucrl
