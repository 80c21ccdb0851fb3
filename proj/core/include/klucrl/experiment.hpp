#pragma once

#include "klucrl/envs.hpp"
#include "klucrl/mdp.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace klucrl {

enum class EnvKind { RiverSwim, SixArms, Sparse };

std::string to_string(EnvKind kind);
EnvKind parse_env_kind(const std::string& name);

/// One regret experiment: environment, algorithms, horizon, replications.
/// Fully determines its outputs (seeded streams, fixed thread merge order).
struct ExperimentConfig {
    EnvKind env = EnvKind::RiverSwim;
    RiverSwimParams riverswim_params{};
    SixArmsParams sixarms_params{};
    SparseGenConfig sparse_config{};
    std::vector<std::string> algorithms = {"klucrl", "ucrl2"};
    long horizon = 100'000;
    int replications = 20;
    std::uint64_t base_seed = 1;
    double delta = 0.05;
    RewardMode reward_mode = RewardMode::Deterministic;
    std::optional<bool> known_rewards; // unset: per-environment convention
    std::string out_dir = ".";
    bool write_files = true;
    int threads = 0; // 0 = hardware concurrency
};

/// Per-timestep cumulative reward and regret for one replication.
struct RegretTrace {
    std::string algorithm;
    int replication = 0;
    std::vector<double> cumulative_reward;
    std::vector<double> regret;
};

/// regret(t) = t * optimal_gain - sum_{s<=t} R_s, for t = 1..len(rewards).
RegretTrace compute_regret(const std::vector<double>& rewards, double optimal_gain);

struct AlgorithmSummary {
    std::string algorithm;
    double mean_final_regret = 0.0;
    double stderr_final_regret = 0.0;
    std::vector<double> final_regrets;  // per replication
    std::vector<int> episode_counts;    // m(T) per replication
};

/// One agent planning event as logged by the harness.
struct EpisodeRecord {
    std::string algorithm;
    int replication = 0;
    int episode = 0;
    long start_time = 0;
    double gain = 0.0;
    double c_p = 0.0;
    double c_r = 0.0;
};

struct ExperimentResult {
    std::vector<RegretTrace> traces; // ordered by (algorithm, replication)
    std::vector<AlgorithmSummary> summaries;
    std::vector<EpisodeRecord> episodes; // every planning event of every run
    double optimal_gain = 0.0;
    double diameter = 0.0;
    std::vector<std::pair<std::string, std::string>> metadata;
    std::string csv_path;     // empty unless files were written
    std::string summary_path;
    std::string episodes_path;
};

/// Runs every algorithm x replication pair (paired seeds across algorithms),
/// computes regret against the true optimal gain, optionally writes the CSV
/// and summary files. Deterministic given the config.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Builds the environment described by the config (shared by the runner,
/// the CLI and tests).
Environment make_environment(const ExperimentConfig& config);

/// Theoretical regret reference curves.
struct BoundCurves {
    std::vector<double> theorem1;                // 24 D |X| sqrt(|A| t log(log t / delta))
    std::optional<std::vector<double>> theorem2; // 400 D^2 |X|^2 |A| log t / margin
};

BoundCurves theorem_bound_curve(int n_states, int n_actions, double diameter, double delta,
                                const std::vector<long>& t_grid,
                                std::optional<double> margin = std::nullopt);

/// Average reward of a fixed deterministic policy, max over recurrent
/// classes of the induced chain (handles multichain policies).
double policy_gain(const Mdp& mdp, const Policy& policy);

/// Delta(M): gap between the optimal gain and the best strictly suboptimal
/// deterministic policy, by exhaustive enumeration. Empty when
/// n_states * n_actions > 20 or no policy falls below the optimum.
std::optional<double> optimality_margin(const Mdp& mdp);

/// Timesteps logged to CSV: every step up to 10^3, then every 100th, plus
/// the final step.
std::vector<long> thinned_timesteps(long horizon);

/// Parse error carrying the 1-based line number.
class CsvError : public std::runtime_error {
public:
    CsvError(const std::string& what, long line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

struct CsvRow {
    std::string algorithm;
    std::string env;
    int replication = 0;
    long t = 0;
    double cumulative_reward = 0.0;
    double regret = 0.0;
};

struct RegretCsv {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<CsvRow> rows;
};

RegretCsv parse_regret_csv(const std::string& path);

/// Writes gnuplot scripts plus their data files next to the parsed CSV:
/// mean regret with standard-error bars per algorithm (optional Theorem 1/2
/// overlay from the CSV metadata), or the solver-evolution panels when the
/// input is a sweep CSV.
void emit_plots(const std::string& csv_path, bool bounds, const std::string& out_dir);

/// Solver-evolution demo: the KL and L1 maximizers for p = (0.3, 0.7, 0),
/// V = (1, 2, 3), epsilon swept from 1/2 down to 1/500 (L1 radius matched
/// through Pinsker's inequality). Writes a CSV and returns its path.
std::string sweep_demo(const std::string& out_dir);

/// Shortest round-trippable decimal form of a double.
std::string format_double(double v);

} // namespace klucrl
