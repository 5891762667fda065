#pragma once

// Small numeric kernels shared by the density and bookkeeping code.
// Every reduction here has a fixed association order so results do not
// depend on how callers schedule their work.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace qfreq::numeric {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Pairwise (cascade) summation. Error grows as O(log n) rather than O(n).
inline double pairwise_sum(std::span<const double> xs) {
    constexpr std::size_t kBlock = 64;
    if (xs.size() <= kBlock) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

// Correctly rounded sum of a sequence of doubles (Shewchuk's algorithm as
// popularised by Python's math.fsum). Used where association order must not
// show up in the result at all.
inline double exact_sum(std::span<const double> xs) {
    std::vector<double> partials;
    for (double x : xs) {
        std::size_t i = 0;
        for (double y : partials) {
            if (std::abs(x) < std::abs(y)) std::swap(x, y);
            const double hi = x + y;
            const double lo = y - (hi - x);
            if (lo != 0.0) partials[i++] = lo;
            x = hi;
        }
        partials.resize(i);
        partials.push_back(x);
    }
    if (partials.empty()) return 0.0;
    // Sum the nonoverlapping partials from the top, with the half-way
    // correction for round-half-even.
    std::size_t n = partials.size();
    double hi = partials[--n];
    double lo = 0.0;
    while (n > 0) {
        const double x = hi;
        const double y = partials[--n];
        hi = x + y;
        const double yr = hi - x;
        lo = y - yr;
        if (lo != 0.0) break;
    }
    if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
        const double y = lo * 2.0;
        const double x = hi + y;
        const double yr = x - hi;
        if (y == yr) hi = x;
    }
    return hi;
}

// log(sum_i exp(x_i)); -inf entries contribute nothing. Returns -inf for an
// empty or all -inf input.
inline double log_sum_exp(std::span<const double> xs) {
    double top = kNegInf;
    for (double x : xs) top = std::max(top, x);
    if (top == kNegInf) return kNegInf;
    std::vector<double> scaled(xs.size());
    std::transform(xs.begin(), xs.end(), scaled.begin(),
                   [top](double x) { return std::exp(x - top); });
    return top + std::log(pairwise_sum(scaled));
}

// log C(n, k) in extended precision.
inline long double log_binomial(std::size_t n, std::size_t k) {
    const auto ln = static_cast<long double>(n);
    const auto lk = static_cast<long double>(k);
    return std::lgammal(ln + 1.0L) - std::lgammal(lk + 1.0L) - std::lgammal(ln - lk + 1.0L);
}

// count * log_value with the convention 0 * log(0) = 0.
inline long double count_log(std::size_t count, long double log_value) {
    return count == 0 ? 0.0L : static_cast<long double>(count) * log_value;
}

} // namespace qfreq::numeric
