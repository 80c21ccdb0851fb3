#include "klucrl/mdp.hpp"

#include "klucrl/envs.hpp"
#include "klucrl/errors.hpp"
#include "test_oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace klucrl;

namespace {

Mdp two_state_swap() {
    std::vector<SimplexVector> rows;
    for (int x = 0; x < 2; ++x)
        for (int a = 0; a < 2; ++a) rows.push_back(SimplexVector::point_mass(2, 1 - x));
    return Mdp(2, 2, std::move(rows), {0.0, 0.0, 1.0, 1.0});
}

} // namespace

TEST_CASE("span seminorm") {
    CHECK(span(std::vector<double>{1.0, 1.0, 1.0}) == 0.0);
    CHECK(span(std::vector<double>{0.0, 3.0, 1.0}) == 3.0);
    CHECK(span(std::vector<double>{-2.0, 5.0}) == 7.0);
    CHECK_THROWS_AS((void)span(std::vector<double>{}), std::invalid_argument);

    // seminorm identities
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(3 + rng.uniform_int(6));
        for (auto& x : v) x = rng.uniform(-5.0, 5.0);
        const double c = rng.uniform(-10.0, 10.0);
        const double alpha = rng.uniform(-3.0, 3.0);
        std::vector<double> shifted = v, scaled = v;
        for (auto& x : shifted) x += c;
        for (auto& x : scaled) x *= alpha;
        CHECK(span(shifted) == doctest::Approx(span(v)).epsilon(1e-12));
        CHECK(span(scaled) == doctest::Approx(std::abs(alpha) * span(v)).epsilon(1e-12));
    }
}

TEST_CASE("SimplexVector invariants") {
    CHECK_THROWS_AS(SimplexVector(std::vector<double>{0.5, 0.4}), ModelError);
    CHECK_THROWS_AS(SimplexVector(std::vector<double>{1.2, -0.2}), ModelError);
    CHECK_THROWS_AS(SimplexVector(std::vector<double>{}), ModelError);
    CHECK_NOTHROW(SimplexVector(std::vector<double>{0.5, 0.5 + 5e-10}));
    CHECK(SimplexVector::uniform(4)[2] == doctest::Approx(0.25));
    CHECK(SimplexVector::point_mass(3, 1)[1] == 1.0);
}

TEST_CASE("Mdp validation") {
    std::vector<SimplexVector> rows{SimplexVector::uniform(2), SimplexVector::uniform(2)};
    CHECK_THROWS_AS(Mdp(2, 1, rows, {0.0, 1.5}), ModelError);   // reward out of range
    CHECK_THROWS_AS(Mdp(2, 2, rows, {0.0, 0.5, 0.5, 0.5}), ModelError); // row count
    CHECK_NOTHROW(Mdp(2, 1, rows, {0.0, 1.0}));
}

TEST_CASE("value iteration on tiny models") {
    SUBCASE("single state, two actions") {
        std::vector<SimplexVector> rows{SimplexVector::point_mass(1, 0),
                                        SimplexVector::point_mass(1, 0)};
        const Mdp mdp(1, 2, std::move(rows), {0.2, 0.8});
        const auto sol = value_iteration(mdp, 1e-9);
        CHECK(sol.gain == doctest::Approx(0.8).epsilon(1e-9));
        CHECK(sol.policy(0) == 1);
        CHECK(sol.bias[0] == 0.0);
    }

    SUBCASE("deterministic two-state swap averages the rewards") {
        const Mdp mdp = two_state_swap();
        const auto sol = value_iteration(mdp, 1e-7);
        CHECK(sol.gain == doctest::Approx(0.5).epsilon(1e-6));
    }
}

TEST_CASE("value iteration matches exhaustive policy evaluation on RiverSwim") {
    const Environment env = riverswim();
    const auto sol = value_iteration(env.model(), 1e-9);
    const double oracle_gain = oracle::best_gain_by_enumeration(env.model());
    CHECK(sol.gain == doctest::Approx(oracle_gain).epsilon(1e-6));
    CHECK(std::abs(sol.gain - oracle_gain) < 1e-6);
    // the optimal policy swims right everywhere except possibly at the bank
    CHECK(sol.policy(5) == 1);
}

TEST_CASE("gain optimality and Bellman residual on random instances") {
    for (std::uint64_t seed : {11u, 12u, 13u, 14u, 15u, 16u}) {
        SparseGenConfig cfg;
        cfg.n_states = 4;
        cfg.n_actions = 3;
        cfg.avg_out_degree = 2.0;
        cfg.seed = seed;
        const Environment env = random_sparse(cfg);
        const Mdp& mdp = env.model();
        const double tol = 1e-8;
        const auto sol = value_iteration(mdp, tol);

        // no deterministic policy beats the computed gain
        std::vector<int> actions(4, 0);
        while (true) {
            CHECK(oracle::policy_gain(mdp, actions) <= sol.gain + tol);
            int digit = 0;
            while (digit < 4) {
                if (++actions[static_cast<std::size_t>(digit)] < 3) break;
                actions[static_cast<std::size_t>(digit)] = 0;
                ++digit;
            }
            if (digit == 4) break;
        }

        // Bellman residual of the returned (gain, bias)
        double residual = 0.0;
        for (int x = 0; x < mdp.n_states(); ++x) {
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < mdp.n_actions(); ++a)
                best = std::max(best, mdp.reward(x, a) + dot(mdp.row(x, a).values(), sol.bias));
            residual = std::max(residual,
                                std::abs(sol.bias[static_cast<std::size_t>(x)] + sol.gain - best));
        }
        CHECK(residual <= tol);

        CHECK(*std::min_element(sol.bias.begin(), sol.bias.end()) == 0.0);
    }
}

TEST_CASE("value iteration reports non-convergence with the span reached") {
    const Mdp mdp = two_state_swap();
    try {
        (void)value_iteration(mdp, 1e-7, 50); // cap below what the swap needs
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.residual() > 0.0);
        CHECK(std::string(e.what()).find("span") != std::string::npos);
    }
}

TEST_CASE("diameter on tiny models") {
    CHECK(compute_diameter(two_state_swap()) == doctest::Approx(1.0).epsilon(1e-9));

    std::vector<SimplexVector> rows{SimplexVector::point_mass(1, 0)};
    CHECK(compute_diameter(Mdp(1, 1, std::move(rows), {0.3})) == 0.0);
}

TEST_CASE("non-communicating input reports an infinite diameter") {
    // state 1 absorbs under every action
    std::vector<SimplexVector> rows{SimplexVector::point_mass(2, 1),
                                    SimplexVector::point_mass(2, 1)};
    const Mdp mdp(2, 1, std::move(rows), {0.0, 1.0});
    CHECK_FALSE(is_communicating(mdp));
    try {
        (void)compute_diameter(mdp);
        FAIL("expected ModelError");
    } catch (const ModelError& e) {
        CHECK(std::string(e.what()).find("infinite") != std::string::npos);
    }
}

TEST_CASE("RiverSwim diameter agrees with hitting-time simulation") {
    const Environment env = riverswim();
    const auto details = compute_diameter_details(env.model());
    CHECK(details.diameter == doctest::Approx(16.1111).epsilon(1e-3));
    CHECK(details.worst_source == 0);
    CHECK(details.worst_target == 5);

    // Monte-Carlo hitting times under the minimizing policy
    Rng rng(123);
    const Mdp& m = env.model();
    const long episodes = 100'000;
    double total = 0.0;
    for (long ep = 0; ep < episodes; ++ep) {
        int x = details.worst_source;
        long steps = 0;
        while (x != details.worst_target) {
            const auto& row = m.row(x, details.policy_for_worst_target(x));
            x = static_cast<int>(rng.categorical(row.values()));
            ++steps;
        }
        total += static_cast<double>(steps);
    }
    const double mc = total / static_cast<double>(episodes);
    CHECK(std::abs(mc - details.diameter) / details.diameter < 0.02);
}

TEST_CASE("diameter is finite on generated communicating instances") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        SparseGenConfig cfg;
        cfg.seed = seed;
        const Environment env = random_sparse(cfg);
        const Mdp& mdp = env.model();
        const double d = compute_diameter(mdp);
        CHECK(std::isfinite(d));
        CHECK(d > 0.0);
    }
}
