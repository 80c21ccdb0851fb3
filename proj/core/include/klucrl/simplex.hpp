#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace klucrl {

/// Tolerance on |sum - 1| accepted when validating probability vectors.
inline constexpr double kSimplexTolerance = 1e-9;

/// A probability vector: entries >= 0 summing to 1 within kSimplexTolerance.
/// Validated on construction; the unit of all transition-solver I/O.
class SimplexVector {
public:
    /// Validating constructor; throws ModelError on invariant violation.
    explicit SimplexVector(std::vector<double> entries);

    static SimplexVector uniform(std::size_t n);
    static SimplexVector point_mass(std::size_t n, std::size_t i);

    std::size_t size() const { return entries_.size(); }
    double operator[](std::size_t i) const { return entries_[i]; }
    const std::vector<double>& entries() const { return entries_; }
    std::span<const double> values() const { return entries_; }

    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

    bool operator==(const SimplexVector& other) const = default;

private:
    std::vector<double> entries_;
};

/// Span seminorm max(v) - min(v); the stopping measure of average-reward
/// value iteration. Throws std::invalid_argument on empty input.
double span(std::span<const double> v);

/// True if entries are nonnegative and sum to 1 within tol.
bool is_probability_vector(std::span<const double> v, double tol = kSimplexTolerance);

double dot(std::span<const double> a, std::span<const double> b);

double l1_distance(std::span<const double> a, std::span<const double> b);

} // namespace klucrl
