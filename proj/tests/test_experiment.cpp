#include "klucrl/experiment.hpp"

#include "klucrl/envs.hpp"
#include "test_oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace klucrl;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig tiny_config(const std::string& out_dir) {
    ExperimentConfig cfg;
    cfg.horizon = 400;
    cfg.replications = 3;
    cfg.base_seed = 99;
    cfg.out_dir = out_dir;
    return cfg;
}

} // namespace

TEST_CASE("compute_regret arithmetic") {
    SUBCASE("rewards at the optimal gain leave zero regret") {
        const std::vector<double> rewards(10, 0.5);
        const auto trace = compute_regret(rewards, 0.5);
        for (double r : trace.regret) CHECK(r == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("zero rewards accumulate linearly") {
        const std::vector<double> rewards(10, 0.0);
        const auto trace = compute_regret(rewards, 0.5);
        CHECK(trace.regret[9] == doctest::Approx(5.0));
        CHECK(trace.regret[3] == doctest::Approx(2.0));
    }
    SUBCASE("sign-mixed trace against a hand sum") {
        const std::vector<double> rewards{1.0, 0.0, 0.25};
        const auto trace = compute_regret(rewards, 0.5);
        CHECK(trace.regret[0] == doctest::Approx(-0.5));
        CHECK(trace.regret[1] == doctest::Approx(0.0));
        CHECK(trace.regret[2] == doctest::Approx(0.25));
        CHECK(trace.cumulative_reward[2] == doctest::Approx(1.25));
    }
}

TEST_CASE("theorem bound curves") {
    const std::vector<long> grid{100, 200, 10'000, 100'000'000};
    const auto curves = theorem_bound_curve(6, 2, 15.0, 0.05, grid, 0.85);

    // direct arithmetic oracle at one point
    const double expected =
        24.0 * 15.0 * 6.0 * std::sqrt(2.0 * 100.0 * std::log(std::log(100.0) / 0.05));
    CHECK(curves.theorem1[0] == doctest::Approx(expected).epsilon(1e-12));

    // doubling T multiplies the curve by about sqrt(2)
    CHECK(curves.theorem1[1] / curves.theorem1[0] ==
          doctest::Approx(std::sqrt(2.0)).epsilon(0.02));

    // the logarithmic curve halves its ratio from T to T^2
    REQUIRE(curves.theorem2.has_value());
    CHECK((*curves.theorem2)[2] / (*curves.theorem2)[3] == doctest::Approx(0.5).epsilon(1e-9));

    CHECK_THROWS_AS((void)theorem_bound_curve(6, 2, 15.0, 0.05, {5}, std::nullopt),
                    std::invalid_argument);
}

TEST_CASE("policy gain handles absorbing and multichain policies") {
    const Environment env = riverswim();
    Policy always_left;
    always_left.actions.assign(6, 0);
    CHECK(policy_gain(env.model(), always_left) == doctest::Approx(0.005).epsilon(1e-9));

    // two separate self-loop classes: the better one defines the gain
    std::vector<SimplexVector> rows{SimplexVector::point_mass(2, 0),
                                    SimplexVector::point_mass(2, 1)};
    const Mdp split(2, 1, std::move(rows), {0.2, 0.7});
    Policy only;
    only.actions.assign(2, 0);
    CHECK(policy_gain(split, only) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("optimality margin by enumeration") {
    const Environment env = riverswim();
    const auto margin = optimality_margin(env.model());
    REQUIRE(margin.has_value());
    const double rho_star = value_iteration(env.model(), 1e-9).gain;
    // best suboptimal policy idles at the left bank collecting 0.005
    CHECK(*margin == doctest::Approx(rho_star - 0.005).epsilon(1e-6));

    // enumeration is skipped above the size cap
    CHECK_FALSE(optimality_margin(sixarms().model()).has_value());
}

TEST_CASE("thinned timesteps") {
    const auto ts = thinned_timesteps(5000);
    CHECK(ts.front() == 1);
    CHECK(ts.back() == 5000);
    // dense prefix
    for (long t = 1; t <= 1000; ++t) CHECK(ts[static_cast<std::size_t>(t - 1)] == t);
    // sparse suffix
    for (std::size_t i = 1000; i < ts.size(); ++i) CHECK(ts[i] % 100 == 0);
    CHECK(thinned_timesteps(20).size() == 20);
    CHECK(thinned_timesteps(1234).back() == 1234);
}

TEST_CASE("experiment output round-trips and is byte-identical") {
    const std::string dir = (std::filesystem::temp_directory_path() / "klucrl_exp_test").string();
    std::filesystem::remove_all(dir);
    const auto cfg = tiny_config(dir);
    const auto result = run_experiment(cfg);

    SUBCASE("CSV parses back to the emitting traces exactly") {
        const auto csv = parse_regret_csv(result.csv_path);
        const auto ts = thinned_timesteps(cfg.horizon);
        REQUIRE(csv.rows.size() == ts.size() * 2 * 3);
        std::size_t i = 0;
        for (const auto& trace : result.traces) {
            for (long t : ts) {
                const auto& row = csv.rows[i++];
                CHECK(row.algorithm == trace.algorithm);
                CHECK(row.replication == trace.replication);
                CHECK(row.t == t);
                // exact: the writer emits round-trippable decimals
                CHECK(row.cumulative_reward ==
                      trace.cumulative_reward[static_cast<std::size_t>(t - 1)]);
                CHECK(row.regret == trace.regret[static_cast<std::size_t>(t - 1)]);
            }
        }
    }

    SUBCASE("regret matches its defining identity") {
        for (const auto& trace : result.traces)
            for (std::size_t i = 0; i < trace.regret.size(); ++i)
                CHECK(trace.regret[i] ==
                      doctest::Approx(static_cast<double>(i + 1) * result.optimal_gain -
                                      trace.cumulative_reward[i])
                          .epsilon(1e-12));
    }

    SUBCASE("identical configs produce byte-identical files") {
        const std::string bytes_first = slurp(result.csv_path);
        const std::string dir2 = dir + "_rerun";
        std::filesystem::remove_all(dir2);
        auto cfg2 = cfg;
        cfg2.out_dir = dir2;
        cfg2.threads = 1; // merge order must not depend on scheduling
        const auto result2 = run_experiment(cfg2);
        CHECK(bytes_first == slurp(result2.csv_path));
        CHECK(slurp(result.summary_path) == slurp(result2.summary_path));
    }

    SUBCASE("summary statistics recompute from the raw CSV") {
        const auto csv = parse_regret_csv(result.csv_path);
        for (const auto& s : result.summaries) {
            std::vector<double> finals;
            for (const auto& row : csv.rows)
                if (row.algorithm == s.algorithm && row.t == cfg.horizon)
                    finals.push_back(row.regret);
            REQUIRE(finals.size() == s.final_regrets.size());
            const double n = static_cast<double>(finals.size());
            double mean = 0.0;
            for (double r : finals) mean += r;
            mean /= n;
            double var = 0.0;
            for (double r : finals) var += (r - mean) * (r - mean);
            const double se = std::sqrt(var / (n - 1.0) / n);
            CHECK(mean == doctest::Approx(s.mean_final_regret).epsilon(1e-15));
            CHECK(se == doctest::Approx(s.stderr_final_regret).epsilon(1e-12));
        }
    }

    SUBCASE("planning events land in the episode log") {
        REQUIRE(std::filesystem::exists(result.episodes_path));
        const std::string body = slurp(result.episodes_path);
        CHECK(body.rfind("algorithm,replication,episode,t_start,optimistic_gain,C_P,C_R",
                         0) == 0);
        REQUIRE_FALSE(result.episodes.empty());
        // the first event of every run is the forced episode at t = 1
        for (const auto& e : result.episodes)
            if (e.episode == 1) CHECK(e.start_time == 1);
        int kl_events = 0;
        for (const auto& e : result.episodes)
            if (e.algorithm == "klucrl") {
                CHECK(e.c_p > 0.0); // constants recorded for the KL learner
                ++kl_events;
            }
        CHECK(kl_events > 0);
    }

    SUBCASE("paired replications share environment randomness") {
        // the environment stream seed depends on the replication only, so the
        // state sequences coincide until the policies first differ
        Environment ea = make_environment(cfg);
        Environment eb = make_environment(cfg);
        ea.reset(derive_seed(cfg.base_seed, 1, "env"), derive_seed(cfg.base_seed, 1, "reward"));
        eb.reset(derive_seed(cfg.base_seed, 1, "env"), derive_seed(cfg.base_seed, 1, "reward"));
        for (int i = 0; i < 100; ++i) {
            const auto [xa, ra] = ea.step(1);
            const auto [xb, rb] = eb.step(1);
            CHECK(xa == xb);
        }
    }
}

TEST_CASE("metadata carries the environment parameters") {
    const std::string dir =
        (std::filesystem::temp_directory_path() / "klucrl_meta_test").string();
    std::filesystem::remove_all(dir);
    auto cfg = tiny_config(dir);
    const auto result = run_experiment(cfg);
    const auto csv = parse_regret_csv(result.csv_path);
    auto has = [&](const std::string& key) {
        for (const auto& [k, v] : csv.metadata)
            if (k == key) return true;
        return false;
    };
    for (const char* key : {"env", "n_states", "n_actions", "p_advance", "reward_mode",
                            "horizon", "replications", "base_seed", "delta", "rho_star",
                            "diameter", "C_P", "C_R"})
        CHECK_MESSAGE(has(key), key);
}

TEST_CASE("malformed CSV reports the offending line") {
    const auto dir = std::filesystem::temp_directory_path() / "klucrl_csv_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "bad.csv").string();
    {
        std::ofstream out(path, std::ios::binary);
        out << "# env = riverswim\n";
        out << "algorithm,env,replication,t,cumulative_reward,regret\n";
        out << "klucrl,riverswim,0,1,0.5,0.3\n";
        out << "klucrl,riverswim,0,not_a_number,0.5,0.3\n";
    }
    try {
        (void)parse_regret_csv(path);
        FAIL("expected CsvError");
    } catch (const CsvError& e) {
        CHECK(e.line() == 4);
    }

    const std::string path2 = (dir / "bad_header.csv").string();
    {
        std::ofstream out(path2, std::ios::binary);
        out << "time,regret\n";
    }
    CHECK_THROWS_AS((void)parse_regret_csv(path2), CsvError);
}

TEST_CASE("plot emission writes scripts and data") {
    const std::string dir =
        (std::filesystem::temp_directory_path() / "klucrl_plot_test").string();
    std::filesystem::remove_all(dir);
    auto cfg = tiny_config(dir);
    const auto result = run_experiment(cfg);

    emit_plots(result.csv_path, /*bounds=*/true, dir);
    CHECK(std::filesystem::exists(dir + "/plot_regret.gp"));
    CHECK(std::filesystem::exists(dir + "/regret_mean_klucrl.dat"));
    CHECK(std::filesystem::exists(dir + "/regret_mean_ucrl2.dat"));
    CHECK(std::filesystem::exists(dir + "/bound_theorem.dat"));
    const std::string script = slurp(dir + "/plot_regret.gp");
    CHECK(script.find("yerrorlines") != std::string::npos);
    CHECK(script.find("Theorem 1 bound") != std::string::npos);

    // sweep mode
    const std::string sweep_csv = sweep_demo(dir);
    emit_plots(sweep_csv, false, dir);
    CHECK(std::filesystem::exists(dir + "/plot_sweep.gp"));
}

TEST_CASE("sweep demo reproduces the funding cutoff") {
    const std::string dir =
        (std::filesystem::temp_directory_path() / "klucrl_sweep_test").string();
    std::filesystem::remove_all(dir);
    const std::string path = sweep_demo(dir);

    std::ifstream in(path);
    std::string line;
    bool header_skipped = false;
    int rows = 0;
    const double cutoff = 0.045425; // f(3) on the support of (0.3, 0.7)
    double min_eps = 1.0, max_eps = 0.0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_skipped) {
            header_skipped = true;
            continue;
        }
        std::stringstream ss(line);
        std::vector<double> f;
        std::string field;
        while (std::getline(ss, field, ',')) f.push_back(std::stod(field));
        REQUIRE(f.size() == 7);
        const double eps = f[0];
        min_eps = std::min(min_eps, eps);
        max_eps = std::max(max_eps, eps);
        if (eps > cutoff + 1e-4) CHECK(f[3] > 0.0);
        if (eps < cutoff - 1e-4) CHECK(f[3] == 0.0);
        CHECK(f[6] > 0.0); // the L1 maximizer keeps funding the zero coordinate
        ++rows;
    }
    CHECK(rows >= 100);
    CHECK(min_eps == doctest::Approx(1.0 / 500.0).epsilon(1e-9));
    CHECK(max_eps == doctest::Approx(0.5).epsilon(1e-9));
}
