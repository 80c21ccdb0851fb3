#include "klucrl/kl_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace klucrl {

namespace {

constexpr double kRootTolerance = 1e-10; // |f(nu) - eps| accepted by newton_solve

double support_max(const SimplexVector& p, std::span<const double> v) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) m = std::max(m, v[i]);
    return m;
}

bool constant_on_support(const SimplexVector& p, std::span<const double> v) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) {
            lo = std::min(lo, v[i]);
            hi = std::max(hi, v[i]);
        }
    return hi - lo == 0.0;
}

void check_dims(const SimplexVector& p, std::span<const double> v) {
    if (p.size() != v.size())
        throw std::invalid_argument("kl_opt: p and V dimensions differ");
}

/// f and f' sharing the scaled sums. With c = nu - max_support(V):
///   f  = sum p_i log(d_i / c) + log1p(sum p_i (c/d_i - 1))
///   f' = (1/c) (s1 - s2/s1),  s1 = sum p_i c/d_i,  s2 = sum p_i (c/d_i)^2
/// All ratios c/d_i lie in (0, 1], so nothing overflows even when the
/// d_i span hundreds of orders of magnitude.
struct FValue {
    double f;
    double fprime;
};

FValue f_with_derivative(const SimplexVector& p, std::span<const double> v, double nu,
                         double vmax) {
    const double c = nu - vmax;
    double log_term = 0.0;
    double s1 = 0.0, s1m1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        const double d = nu - v[i];
        const double ratio = c / d;
        log_term += p[i] * std::log(d / c);
        s1 += p[i] * ratio;
        s1m1 += p[i] * (ratio - 1.0);
        s2 += p[i] * ratio * ratio;
    }
    FValue out;
    out.f = log_term + std::log1p(s1m1);
    out.fprime = (s1 - s2 / s1) / c;
    return out;
}

} // namespace

double kl_divergence(const SimplexVector& p, const SimplexVector& q) {
    if (p.size() != q.size())
        throw std::invalid_argument("kl_divergence: dimensions differ");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
        kl += p[i] * std::log(p[i] / q[i]);
    }
    return std::max(kl, 0.0);
}

double f_eval(const SimplexVector& p, std::span<const double> value, double nu) {
    check_dims(p, value);
    const double vmax = support_max(p, value);
    if (!(nu > vmax))
        throw std::domain_error("f_eval: nu must exceed max V over the support of p");
    return f_with_derivative(p, value, nu, vmax).f;
}

double newton_solve(const SimplexVector& p, std::span<const double> value, double epsilon) {
    check_dims(p, value);
    if (!(epsilon > 0.0))
        throw std::invalid_argument("newton_solve: epsilon must be positive");
    if (constant_on_support(p, value))
        throw std::domain_error(
            "newton_solve: f vanishes identically (V constant on the support of p)");

    const double vmax = support_max(p, value);

    // moments for the asymptotic initialization nu0 = sqrt(sigma / (2 eps))
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) {
            m1 += p[i] * value[i];
            m2 += p[i] * value[i] * value[i];
        }
    const double sigma = std::max(m2 - m1 * m1, 0.0);

    auto f_at = [&](double nu) { return f_with_derivative(p, value, nu, vmax); };

    // Bracket [lo, hi] with f(lo) >= eps >= f(hi); f decreases onto (0, inf).
    // lo starts at the smallest representable point of the domain. When even
    // f(lo) < eps the root is below double resolution; lo is then the best
    // feasible answer (KL stays below eps).
    double lo = std::nextafter(vmax, std::numeric_limits<double>::infinity());
    if (f_at(lo).f < epsilon) return lo;
    double hi = std::max(std::sqrt(sigma / (2.0 * epsilon)), lo);
    while (f_at(hi).f > epsilon) hi = vmax + 2.0 * (hi - vmax);

    double nu = std::clamp(std::sqrt(sigma / (2.0 * epsilon)), lo, hi);
    for (int it = 0; it < 300; ++it) {
        const FValue fv = f_at(nu);
        const double residual = fv.f - epsilon;
        if (std::abs(residual) <= kRootTolerance) return nu;

        if (residual > 0.0)
            lo = nu;
        else
            hi = nu;
        if (std::nextafter(lo, hi) >= hi) break; // bracket down to adjacent doubles

        double next = nu - residual / fv.fprime;
        if (!(next > lo) || !(next < hi)) {
            // Newton left the bracket: bisect in log(nu - vmax), which
            // resolves near-boundary roots as fast as asymptotic ones
            next = vmax + std::sqrt((lo - vmax) * (hi - vmax));
            if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
        }
        if (next == nu) next = 0.5 * (lo + hi);
        if (next == nu) break;
        nu = next;
    }
    // The f step between adjacent doubles exceeds the tolerance here (huge
    // epsilon pushes the root against the boundary). Return the side with
    // f <= eps so the KL constraint is never overshot.
    return f_at(nu).f <= epsilon ? nu : hi;
}

std::string_view to_string(KlBranch branch) {
    switch (branch) {
    case KlBranch::InteriorBestState: return "interior-best-state";
    case KlBranch::NewtonRoot: return "newton-root";
    case KlBranch::DegenerateReturnP: return "degenerate-return-p";
    }
    return "unknown";
}

KlMaxSolution max_kl(const SimplexVector& p, std::span<const double> value, double epsilon) {
    check_dims(p, value);
    if (!(epsilon >= 0.0)) throw std::invalid_argument("max_kl: epsilon must be >= 0");

    const std::size_t n = p.size();
    auto degenerate = [&]() {
        return KlMaxSolution{p, std::nullopt, 0.0, KlBranch::DegenerateReturnP};
    };

    // zero radius pins q = p
    if (epsilon == 0.0) return degenerate();

    const double vmax_support = support_max(p, value);
    const double vmax_global = *std::max_element(value.begin(), value.end());

    double nu = 0.0;
    double r = 0.0;
    KlBranch branch;
    std::vector<std::size_t> best_zero; // I*: zero-support coordinates at the global argmax

    if (vmax_global > vmax_support) {
        for (std::size_t i = 0; i < n; ++i)
            if (p[i] == 0.0 && value[i] == vmax_global) best_zero.push_back(i);
        // all of I* shares the same V, so a single f test covers it
        const double f_at_vmax = f_with_derivative(p, value, vmax_global, vmax_support).f;
        if (f_at_vmax < epsilon) {
            nu = vmax_global;
            r = 1.0 - std::exp(f_at_vmax - epsilon);
            branch = KlBranch::InteriorBestState;
        } else {
            best_zero.clear();
            nu = newton_solve(p, value, epsilon);
            branch = KlBranch::NewtonRoot;
        }
    } else {
        // the argmax of V lies inside the support: no mass leaves the support,
        // and a constant V over it means no feasible move can improve V.q
        if (constant_on_support(p, value)) return degenerate();
        nu = newton_solve(p, value, epsilon);
        branch = KlBranch::NewtonRoot;
    }

    std::vector<double> q(n, 0.0);
    double tilde_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (p[i] > 0.0) tilde_sum += p[i] / (nu - value[i]);
    for (std::size_t i = 0; i < n; ++i)
        if (p[i] > 0.0) q[i] = (1.0 - r) * (p[i] / (nu - value[i])) / tilde_sum;
    if (!best_zero.empty()) {
        const double share = r / static_cast<double>(best_zero.size());
        for (std::size_t i : best_zero) q[i] = share;
    }

    return KlMaxSolution{SimplexVector(std::move(q)), nu, r, branch};
}

SimplexVector max_l1(const SimplexVector& p, std::span<const double> value, double epsilon1) {
    check_dims(p, value);
    if (!(epsilon1 >= 0.0)) throw std::invalid_argument("max_l1: epsilon1 must be >= 0");

    const std::size_t n = p.size();
    std::vector<double> q(p.begin(), p.end());
    if (epsilon1 == 0.0) return SimplexVector(std::move(q));

    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (value[i] > value[best]) best = i;

    const double bumped = std::min(q[best] + 0.5 * epsilon1, 1.0);
    double surplus = bumped - q[best];
    q[best] = bumped;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });

    for (std::size_t i : order) {
        if (surplus <= 0.0) break;
        if (i == best) continue;
        const double take = std::min(q[i], surplus);
        q[i] -= take;
        surplus -= take;
    }
    for (double& x : q) x = std::max(x, 0.0);
    return SimplexVector(std::move(q));
}

} // namespace klucrl
