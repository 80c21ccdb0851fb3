// klucrl command line tool: KL-ball / L1-ball solver queries, regret
// experiments, plot-script emission, and the solver-evolution demo.

#include "klucrl/experiment.hpp"
#include "klucrl/kl_opt.hpp"
#include "klucrl/simplex.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::vector<double> read_vector_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("cannot open " + path);
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::vector<double> v;
        double x;
        while (ss >> x) v.push_back(x);
        if (!v.empty()) return v; // one vector per line; the first line wins
    }
    throw CLI::ValidationError("no vector found in " + path);
}

/// key=value lines, one per line; '#' starts a comment.
std::vector<std::string> config_file_args(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::vector<std::string> args;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) continue;
        args.push_back("--" + key);
        if (!value.empty()) args.push_back(value);
    }
    return args;
}

void take_last_everywhere(CLI::App* app) {
    for (CLI::Option* opt : app->get_options())
        if (opt->get_expected_max() == 1) opt->take_last();
    for (CLI::App* sub : app->get_subcommands({})) take_last_everywhere(sub);
}

int run_solve(const std::string& p_file, const std::string& v_file, double epsilon,
              const std::string& metric) {
    const klucrl::SimplexVector p(read_vector_file(p_file));
    const std::vector<double> value = read_vector_file(v_file);
    if (value.size() != p.size()) {
        std::cerr << "error: p and V dimensions differ\n";
        return 1;
    }

    auto print_q = [](const klucrl::SimplexVector& q) {
        std::cout << "q";
        for (double x : q) std::cout << ' ' << klucrl::format_double(x);
        std::cout << "\n";
    };

    if (metric == "l1") {
        print_q(klucrl::max_l1(p, value, epsilon));
        std::cout << "nu none\nr 0\nbranch l1-vertex\n";
        return 0;
    }
    const klucrl::KlMaxSolution sol = klucrl::max_kl(p, value, epsilon);
    print_q(sol.q);
    std::cout << "nu " << (sol.nu ? klucrl::format_double(*sol.nu) : std::string("none"))
              << "\n";
    std::cout << "r " << klucrl::format_double(sol.r) << "\n";
    std::cout << "branch " << klucrl::to_string(sol.branch) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"KL-UCRL: optimistic reinforcement learning with KL confidence balls"};
    app.require_subcommand(1);

    // ---- solve ----
    auto* solve = app.add_subcommand(
        "solve", "Linear maximization over a KL (or L1) ball around p");
    std::string p_file, v_file, metric = "kl";
    double epsilon = 0.0;
    solve->add_option("--p", p_file, "file holding p (one vector per line)")->required();
    solve->add_option("--V", v_file, "file holding V (one vector per line)")->required();
    solve->add_option("--epsilon", epsilon, "ball radius")->required();
    solve->add_option("--metric", metric, "kl or l1")
        ->check(CLI::IsMember({"kl", "l1"}));

    // ---- run ----
    auto* run = app.add_subcommand("run", "Run a regret experiment and write CSV output");
    klucrl::ExperimentConfig config;
    std::string env_name = "riverswim";
    std::string algos = "klucrl,ucrl2";
    std::string reward_mode = "det";
    std::string known = "auto";
    run->add_option("--env", env_name, "riverswim, sixarms or sparse")
        ->check(CLI::IsMember({"riverswim", "sixarms", "sparse"}));
    run->add_option("--algo", algos, "comma-separated list from {klucrl, ucrl2}");
    run->add_option("--horizon", config.horizon, "steps per replication (T)");
    run->add_option("--reps", config.replications, "Monte-Carlo replications");
    run->add_option("--seed", config.base_seed, "master seed");
    run->add_option("--delta", config.delta, "confidence level parameter");
    run->add_option("--reward-mode", reward_mode, "det or bern")
        ->check(CLI::IsMember({"det", "bern"}));
    run->add_option("--known-rewards", known, "auto, on or off")
        ->check(CLI::IsMember({"auto", "on", "off"}));
    run->add_option("--out", config.out_dir, "output directory")->envname("KLUCRL_OUT");
    run->add_option("--threads", config.threads, "worker threads (0 = auto)");
    run->add_option("--sparse-states", config.sparse_config.n_states,
                    "states of the sparse generator");
    run->add_option("--sparse-actions", config.sparse_config.n_actions,
                    "actions of the sparse generator");
    run->add_option("--sparse-degree", config.sparse_config.avg_out_degree,
                    "average out-degree of the sparse generator");
    std::uint64_t sparse_seed = 0;
    bool sparse_seed_given = false;
    run->add_option("--sparse-seed", sparse_seed, "instance seed of the sparse generator")
        ->each([&](const std::string&) { sparse_seed_given = true; });

    // ---- plot ----
    auto* plot = app.add_subcommand("plot", "Emit gnuplot scripts for a regret or sweep CSV");
    std::string plot_in, plot_out = ".";
    bool bounds = false;
    plot->add_option("--in", plot_in, "input CSV")->required();
    plot->add_flag("--bounds", bounds, "overlay the theoretical bound curves");
    plot->add_option("--out", plot_out, "output directory")->envname("KLUCRL_OUT");

    // ---- sweep-demo ----
    auto* sweep = app.add_subcommand(
        "sweep-demo", "Solver evolution CSV: KL vs L1 maximizers as the radius shrinks");
    std::string sweep_out = ".";
    sweep->add_option("--out", sweep_out, "output directory")->envname("KLUCRL_OUT");

    // --config FILE provides key=value defaults; command-line flags override.
    std::string config_path;
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) {
            config_path = argv[++i];
        } else if (a.rfind("--config=", 0) == 0) {
            config_path = a.substr(9);
        } else {
            args.push_back(a);
        }
    }
    if (!config_path.empty() && !args.empty()) {
        try {
            const auto extra = config_file_args(config_path);
            args.insert(args.begin() + 1, extra.begin(), extra.end());
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
    }
    take_last_everywhere(&app);

    std::vector<const char*> cargs;
    cargs.push_back(argv[0]);
    for (const auto& a : args) cargs.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (solve->parsed()) return run_solve(p_file, v_file, epsilon, metric);

        if (run->parsed()) {
            config.env = klucrl::parse_env_kind(env_name);
            config.reward_mode = reward_mode == "bern" ? klucrl::RewardMode::Bernoulli
                                                       : klucrl::RewardMode::Deterministic;
            if (known == "on") config.known_rewards = true;
            if (known == "off") config.known_rewards = false;
            config.sparse_config.seed = sparse_seed_given ? sparse_seed : config.base_seed;
            config.algorithms.clear();
            std::stringstream ss(algos);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!item.empty()) config.algorithms.push_back(item);

            const klucrl::ExperimentResult result = klucrl::run_experiment(config);
            std::cout << "env=" << env_name << " rho*=" << klucrl::format_double(result.optimal_gain)
                      << " diameter=" << klucrl::format_double(result.diameter) << "\n";
            for (const auto& s : result.summaries)
                std::cout << s.algorithm
                          << ": mean final regret = " << klucrl::format_double(s.mean_final_regret)
                          << " +/- " << klucrl::format_double(s.stderr_final_regret) << " (se)\n";
            std::cout << "wrote " << result.csv_path << "\n";
            std::cout << "wrote " << result.summary_path << "\n";
            return 0;
        }

        if (plot->parsed()) {
            klucrl::emit_plots(plot_in, bounds, plot_out);
            std::cout << "wrote plot script to " << plot_out << "\n";
            return 0;
        }

        if (sweep->parsed()) {
            const std::string path = klucrl::sweep_demo(sweep_out);
            std::cout << "wrote " << path << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
