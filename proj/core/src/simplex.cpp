#include "klucrl/simplex.hpp"

#include "klucrl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace klucrl {

SimplexVector::SimplexVector(std::vector<double> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw ModelError("SimplexVector: empty entry list");
    if (!is_probability_vector(entries_))
        throw ModelError("SimplexVector: entries must be nonnegative and sum to 1");
}

SimplexVector SimplexVector::uniform(std::size_t n) {
    return SimplexVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

SimplexVector SimplexVector::point_mass(std::size_t n, std::size_t i) {
    std::vector<double> e(n, 0.0);
    e.at(i) = 1.0;
    return SimplexVector(std::move(e));
}

double span(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("span: empty vector");
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
}

bool is_probability_vector(std::span<const double> v, double tol) {
    double sum = 0.0;
    for (double x : v) {
        if (!(x >= 0.0)) return false; // also rejects NaN
        sum += x;
    }
    return std::abs(sum - 1.0) <= tol;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s;
}

} // namespace klucrl
