#pragma once

// Relative-frequency densities of N-fold repetition states, computed in
// natural-log space so that N up to ~1e9 neither overflows nor underflows.
//
//   rho(N, n) = C(N, n) |a|^(2n) |b|^(2(N-n))
//
// All tables are indexed by the up-count n = 0..N; the frequency is r = n/N.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qfreq/errors.hpp"
#include "qfreq/numeric.hpp"
#include "qfreq/state.hpp"

namespace qfreq {

namespace detail {

// p * log|z| in extended precision; -inf for z = 0.
inline long double log_weight(double magnitude, long double p) {
    if (magnitude == 0.0) return -std::numeric_limits<long double>::infinity();
    return p * std::log(static_cast<long double>(magnitude));
}

inline double binomial_log_entry(std::size_t count, std::size_t n, long double log_w_up,
                                 long double log_w_down) {
    const long double v = numeric::log_binomial(count, n) + numeric::count_log(n, log_w_up) +
                          numeric::count_log(count - n, log_w_down);
    return static_cast<double>(v);
}

inline std::vector<double> binomial_log_table(std::size_t count, long double log_w_up,
                                              long double log_w_down) {
    std::vector<double> table(count + 1);
    for (std::size_t n = 0; n <= count; ++n)
        table[n] = binomial_log_entry(count, n, log_w_up, log_w_down);
    return table;
}

inline void require_count(std::size_t count) {
    if (count == 0) throw PreconditionError("N must be at least 1");
}

} // namespace detail

// Index of the first maximal entry.
inline std::size_t argmax(std::span<const double> table) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < table.size(); ++i)
        if (table[i] > table[best]) best = i;
    return best;
}

inline std::vector<double> exp_table(std::span<const double> log_table) {
    std::vector<double> out(log_table.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(log_table[i]);
    return out;
}

struct FrequencyDensity {
    std::size_t count;
    std::vector<double> log_rho;
    TwoLevelAmplitudes spec;

    double rho(std::size_t n) const { return std::exp(log_rho.at(n)); }
    double frequency(std::size_t n) const { return static_cast<double>(n) / static_cast<double>(count); }
    double total() const { return std::exp(numeric::log_sum_exp(log_rho)); }
    std::size_t argmax_n() const { return argmax(log_rho); }
};

inline FrequencyDensity density(const TwoLevelAmplitudes& spec, std::size_t count) {
    detail::require_count(count);
    return {count,
            detail::binomial_log_table(count, detail::log_weight(std::abs(spec.a()), 2.0L),
                                       detail::log_weight(std::abs(spec.b()), 2.0L)),
            spec};
}

inline double log_density_entry(const TwoLevelAmplitudes& spec, std::size_t count, std::size_t n) {
    detail::require_count(count);
    if (n > count) throw PreconditionError("n must not exceed N");
    return detail::binomial_log_entry(count, n, detail::log_weight(std::abs(spec.a()), 2.0L),
                                      detail::log_weight(std::abs(spec.b()), 2.0L));
}

struct ScaledDensitySample {
    double r;     // realized frequency n/N
    double value; // N * rho(N, n)
};

// Grid index for a requested frequency: nearest n to r*N, ties to even.
inline std::size_t frequency_index(double r, std::size_t count) {
    return static_cast<std::size_t>(std::nearbyint(r * static_cast<double>(count)));
}

inline ScaledDensitySample scaled_density(const TwoLevelAmplitudes& spec, std::size_t count, double r) {
    if (!(r > 0.0 && r < 1.0)) throw PreconditionError("scaled density needs 0 < r < 1");
    detail::require_count(count);
    const std::size_t n = frequency_index(r, count);
    const double scale = static_cast<double>(count);
    return {static_cast<double>(n) / scale, scale * std::exp(log_density_entry(spec, count, n))};
}

// Trapezoid rule for the integral of N*rho over the grid r = n/N.
inline double scaled_density_integral(const FrequencyDensity& d) {
    const double step = 1.0 / static_cast<double>(d.count);
    const double scale = static_cast<double>(d.count);
    std::vector<double> panels(d.count);
    for (std::size_t n = 0; n < d.count; ++n)
        panels[n] = 0.5 * step * scale * (d.rho(n) + d.rho(n + 1));
    return numeric::pairwise_sum(panels);
}

// Normal density with mean |a|^2 and variance |ab|^2/N, normalized so that
// its integral over r is 1.
inline double gaussian_approx(const TwoLevelAmplitudes& spec, std::size_t count, double r) {
    if (spec.degenerate()) throw DegenerateSpecError("Gaussian limit needs 0 < |a| < 1");
    detail::require_count(count);
    const double mean = spec.weight_up();
    const double var = spec.weight_up() * spec.weight_down() / static_cast<double>(count);
    const double d = r - mean;
    return std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

inline double gaussian_sigma(const TwoLevelAmplitudes& spec, std::size_t count) {
    return std::sqrt(spec.weight_up() * spec.weight_down() / static_cast<double>(count));
}

// True when |n/N - |a|^2| > epsilon. Evaluated as |n - N|a|^2| > N epsilon in
// extended precision; boundary ties (relative 1e-12) count as inside.
inline bool in_tail(std::size_t n, std::size_t count, double weight, double epsilon) {
    const long double scale = static_cast<long double>(count);
    const long double dev = std::abs(static_cast<long double>(n) - scale * weight);
    return dev > scale * epsilon * (1.0L + 1e-12L);
}

inline double log_tail_mass(const FrequencyDensity& d, double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw PreconditionError("epsilon must be > 0");
    const double weight = d.spec.weight_up();
    std::vector<double> tail;
    for (std::size_t n = 0; n <= d.count; ++n)
        if (in_tail(n, d.count, weight, epsilon)) tail.push_back(d.log_rho[n]);
    return numeric::log_sum_exp(tail);
}

inline double tail_mass(const TwoLevelAmplitudes& spec, std::size_t count, double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw PreconditionError("epsilon must be > 0");
    return std::exp(log_tail_mass(density(spec, count), epsilon));
}

// Two-level magnitudes under a hypothetical p-norm, a^p + b^p = 1.
class PNormSpec {
public:
    PNormSpec(double a_mag, double b_mag, double p) : a_mag_(a_mag), b_mag_(b_mag), p_(p) {
        if (!(a_mag > 0.0) || !(b_mag > 0.0) || !(p > 0.0) || !std::isfinite(p))
            throw PreconditionError("p-norm spec needs a_mag > 0, b_mag > 0, p > 0");
        const double s = std::pow(a_mag, p) + std::pow(b_mag, p);
        if (std::abs(s - 1.0) > kNormTolerance)
            throw PreconditionError("p-norm spec must satisfy a_mag^p + b_mag^p = 1");
    }

    // a_mag^p = weight.
    static PNormSpec from_weight(double weight, double p) {
        if (!(weight > 0.0 && weight < 1.0)) throw PreconditionError("p-norm weight must lie in (0, 1)");
        if (!(p > 0.0)) throw PreconditionError("p must be > 0");
        return {std::pow(weight, 1.0 / p), std::pow(1.0 - weight, 1.0 / p), p};
    }

    double a_mag() const { return a_mag_; }
    double b_mag() const { return b_mag_; }
    double p() const { return p_; }
    double weight_up() const { return std::pow(a_mag_, p_); }

private:
    double a_mag_;
    double b_mag_;
    double p_;
};

struct PNormDensity {
    std::size_t count;
    PNormSpec spec;
    std::vector<double> log_rho;

    std::size_t argmax_n() const { return argmax(log_rho); }
    double argmax_r() const { return static_cast<double>(argmax_n()) / static_cast<double>(count); }
};

// C(N, n) |a^n b^(N-n)|^p: with |r>_N normalized as K_N^p C(N, n) = 1 the
// p-norm of |Psi>_N collapses to this one-variable sum.
inline PNormDensity pnorm_density(const PNormSpec& spec, std::size_t count) {
    detail::require_count(count);
    const auto p = static_cast<long double>(spec.p());
    return {count, spec,
            detail::binomial_log_table(count, detail::log_weight(spec.a_mag(), p),
                                       detail::log_weight(spec.b_mag(), p))};
}

// Relative frequency R(n) of the record "n ups in N measurements" over
// repetitions of the N-measurement trial. `trials`, when given, is the
// number of repetitions and only scales expected_count.
struct RecordDistribution {
    std::size_t count;
    std::vector<double> log_record;
    std::optional<std::uint64_t> trials;

    double frequency(std::size_t n) const { return std::exp(log_record.at(n)); }
    std::size_t terms() const { return log_record.size(); }
    std::optional<double> expected_count(std::size_t n) const {
        if (!trials) return std::nullopt;
        return static_cast<double>(*trials) * frequency(n);
    }
};

inline RecordDistribution record_distribution(const TwoLevelAmplitudes& spec, std::size_t count,
                                              std::optional<std::uint64_t> trials = std::nullopt) {
    auto d = density(spec, count);
    return {count, std::move(d.log_rho), trials};
}

inline constexpr std::size_t kMultinomialCapacity = 1'000'000;

struct MultinomialTable {
    std::size_t outcomes;
    std::size_t count;
    std::vector<std::uint32_t> compositions; // row-major, `outcomes` entries per row
    std::vector<double> log_mass;

    std::size_t rows() const { return log_mass.size(); }
    std::span<const std::uint32_t> composition(std::size_t row) const {
        return std::span<const std::uint32_t>(compositions).subspan(row * outcomes, outcomes);
    }
    std::size_t find(std::span<const std::uint32_t> wanted) const {
        for (std::size_t row = 0; row < rows(); ++row) {
            const auto c = composition(row);
            if (std::equal(c.begin(), c.end(), wanted.begin(), wanted.end())) return row;
        }
        throw PreconditionError("composition not in table");
    }

    // Log marginal over one outcome's count, indexed by n = 0..N.
    std::vector<double> log_marginal(std::size_t outcome) const {
        if (outcome >= outcomes) throw PreconditionError("outcome index out of range");
        std::vector<std::vector<double>> groups(count + 1);
        for (std::size_t row = 0; row < rows(); ++row)
            groups[composition(row)[outcome]].push_back(log_mass[row]);
        std::vector<double> out(count + 1);
        for (std::size_t n = 0; n <= count; ++n) out[n] = numeric::log_sum_exp(groups[n]);
        return out;
    }
};

// Number of compositions of `count` into `outcomes` parts, or nullopt when
// it exceeds `cap`.
inline std::optional<std::size_t> composition_count(std::size_t count, std::size_t outcomes,
                                                    std::size_t cap) {
    // C(count + outcomes - 1, outcomes - 1) built incrementally; each partial
    // value is itself a binomial coefficient, so the division is exact.
    unsigned __int128 c = 1;
    for (std::size_t j = 1; j < outcomes; ++j) {
        c = c * (count + j) / j;
        if (c > cap) return std::nullopt;
    }
    return static_cast<std::size_t>(c);
}

// Multinomial mass over compositions (n_1..n_k) of N. Rows are ordered
// lexicographically by (n_1, ..., n_k).
inline MultinomialTable multistate_density(std::span<const Amplitude> amps, std::size_t count,
                                           std::size_t cap = kMultinomialCapacity) {
    detail::require_count(count);
    const std::size_t k = amps.size();
    if (k == 0) throw PreconditionError("need at least one outcome");
    double n2 = 0.0;
    for (const auto& c : amps) {
        if (!is_finite(c)) throw PreconditionError("amplitudes must be finite");
        n2 += std::norm(c);
    }
    if (std::abs(n2 - 1.0) > kNormTolerance) throw PreconditionError("amplitudes must have unit norm");
    const auto rows = composition_count(count, k, cap);
    if (!rows) throw CapacityError("multinomial table exceeds " + std::to_string(cap) + " entries");

    std::vector<long double> log_w(k);
    for (std::size_t i = 0; i < k; ++i) log_w[i] = detail::log_weight(std::abs(amps[i]), 2.0L);
    const long double log_n_fact = std::lgammal(static_cast<long double>(count) + 1.0L);

    MultinomialTable t{k, count, {}, {}};
    t.compositions.reserve(*rows * k);
    t.log_mass.reserve(*rows);
    std::vector<std::uint32_t> cur(k, 0);
    cur[k - 1] = static_cast<std::uint32_t>(count);
    while (true) {
        long double v = log_n_fact;
        for (std::size_t i = 0; i < k; ++i)
            v += numeric::count_log(cur[i], log_w[i]) - std::lgammal(static_cast<long double>(cur[i]) + 1.0L);
        t.compositions.insert(t.compositions.end(), cur.begin(), cur.end());
        t.log_mass.push_back(static_cast<double>(v));

        // Next composition in lexicographic order: bump the rightmost of the
        // first k-1 slots whose prefix sum still has room, zero the slots
        // after it and give the remainder to the last one.
        if (k == 1) break;
        std::size_t prefix = count - cur[k - 1];
        std::size_t j = k - 1;
        bool advanced = false;
        while (j-- > 0) {
            if (prefix < count) {
                ++cur[j];
                std::fill(cur.begin() + static_cast<std::ptrdiff_t>(j) + 1, cur.end() - 1, 0u);
                cur[k - 1] = static_cast<std::uint32_t>(count - (prefix + 1));
                advanced = true;
                break;
            }
            prefix -= cur[j];
        }
        if (!advanced) break;
    }
    return t;
}

} // namespace qfreq
