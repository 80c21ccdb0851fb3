#pragma once

#include "klucrl/simplex.hpp"

#include <optional>
#include <span>
#include <string_view>

namespace klucrl {

/// KL(p, q) = sum over {i : p_i > 0} of p_i log(p_i / q_i), with the
/// convention 0 log 0 = 0. Returns +inf when some p_i > 0 has q_i = 0.
double kl_divergence(const SimplexVector& p, const SimplexVector& q);

/// The root function of the KL maximizer:
///
///   f(nu) = sum_{i: p_i>0} p_i log(nu - V_i) + log(sum_{i: p_i>0} p_i / (nu - V_i))
///
/// defined for nu strictly above max V over the support of p. Evaluated
/// with the common factor min(nu - V_i) pulled out of both terms so the
/// two large logarithms never cancel; accurate from the near-boundary
/// regime up to nu far in the asymptotic tail.
///
/// Throws std::domain_error when nu is at or below the boundary.
double f_eval(const SimplexVector& p, std::span<const double> value, double nu);

/// Solves f(nu) = epsilon to |f(nu) - epsilon| <= 1e-10 by safeguarded
/// Newton iteration: analytic derivative, a maintained bracket, and
/// bisection whenever a step exits it. Initialized at
/// nu0 = sqrt(sigma / (2 epsilon)) where sigma is the variance of V under p.
///
/// Throws std::domain_error when f has no root (V constant on the support
/// of p, in particular point-mass p) and std::invalid_argument for
/// epsilon <= 0.
double newton_solve(const SimplexVector& p, std::span<const double> value, double epsilon);

/// Which case of the KL maximizer produced the solution.
enum class KlBranch {
    InteriorBestState, // mass granted to a zero-support argmax of V
    NewtonRoot,        // support-only solution through the Newton root
    DegenerateReturnP, // no feasible move improves the objective
};

std::string_view to_string(KlBranch branch);

/// Solution of max { V.q : KL(p, q) <= epsilon }.
struct KlMaxSolution {
    SimplexVector q;
    std::optional<double> nu; // Lagrange root; empty on the degenerate branch
    double r = 0.0;           // mass granted to zero-support coordinates, in [0,1)
    KlBranch branch = KlBranch::DegenerateReturnP;
};

/// Linear maximization over the KL ball around p.
///
/// With Z = {i : p_i = 0} and I* = Z intersected with argmax V: if I* is
/// nonempty and f(V_{i*}) < epsilon, then nu = V_{i*} and mass
/// r = 1 - exp(f(nu) - epsilon) is split uniformly across I*; otherwise
/// the zero-support coordinates stay at zero and nu solves f(nu) = epsilon.
/// Support coordinates always follow q_i = (1-r) q~_i / sum(q~) with
/// q~_i = p_i / (nu - V_i), so observed transitions keep positive mass.
KlMaxSolution max_kl(const SimplexVector& p, std::span<const double> value, double epsilon);

/// Linear maximization over the L1 ball { q : ||p - q||_1 <= epsilon1 }:
/// adds epsilon1/2 to the argmax-V coordinate (capped at 1), then removes
/// the surplus walking coordinates in increasing V order. Ties in V break
/// toward the lowest index.
SimplexVector max_l1(const SimplexVector& p, std::span<const double> value, double epsilon1);

} // namespace klucrl
