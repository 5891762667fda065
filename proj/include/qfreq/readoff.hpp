#pragma once

// Reading values off a state: marginal norm densities over one discrete
// variable, push-forward onto coarser variables, and the support test that
// turns a density concentrated on one label into a determinate value.
//
// A finite system never has exactly zero mass off the peak, so read_off takes
// an explicit tolerance and reports it back in its result.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qfreq/errors.hpp"
#include "qfreq/frequency.hpp"
#include "qfreq/numeric.hpp"
#include "qfreq/state.hpp"

namespace qfreq {

using QLabel = std::int64_t;

// Maps a full basis label to the value of a derived discrete variable.
using LabelFunction = std::function<QLabel(std::span<const std::size_t>)>;

struct NormDensity {
    std::vector<QLabel> labels; // strictly increasing
    std::vector<double> mass;
    double total = 0.0;

    std::size_t size() const { return labels.size(); }
    double fraction(std::size_t i) const { return total == 0.0 ? 0.0 : mass[i] / total; }

    std::optional<std::size_t> find(QLabel q) const {
        const auto it = std::lower_bound(labels.begin(), labels.end(), q);
        if (it == labels.end() || *it != q) return std::nullopt;
        return static_cast<std::size_t>(it - labels.begin());
    }

    double mass_of(QLabel q) const {
        const auto i = find(q);
        return i ? mass[*i] : 0.0;
    }

    double mass_sum() const { return numeric::pairwise_sum(mass); }
};

namespace detail {

inline std::vector<QLabel> sorted_unique(std::vector<QLabel> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

// Groups |amp|^2 by q over the basis labels accepted by `keep`.
template <class Keep>
NormDensity group_mass(const StateVector& psi, const LabelFunction& q_of, std::vector<QLabel> codomain,
                       Keep keep) {
    NormDensity out;
    out.labels = sorted_unique(std::move(codomain));
    std::vector<std::vector<double>> groups(out.labels.size());
    std::vector<double> kept;
    kept.reserve(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const BasisLabel label = psi.label_of(i);
        if (!keep(label)) continue;
        const QLabel q = q_of(label);
        const auto it = std::lower_bound(out.labels.begin(), out.labels.end(), q);
        if (it == out.labels.end() || *it != q)
            throw LabelError("label function returned " + std::to_string(q) + " outside its codomain");
        const double w = std::norm(psi[i]);
        groups[static_cast<std::size_t>(it - out.labels.begin())].push_back(w);
        kept.push_back(w);
    }
    out.mass.resize(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) out.mass[g] = numeric::pairwise_sum(groups[g]);
    out.total = numeric::pairwise_sum(kept);
    return out;
}

inline std::vector<QLabel> index_range(std::size_t n) {
    std::vector<QLabel> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<QLabel>(i);
    return v;
}

inline void require_factor(const StateVector& psi, std::size_t factor) {
    if (factor >= psi.factor_count()) throw ShapeError("factor index out of range");
}

} // namespace detail

inline NormDensity marginal_density(const StateVector& psi, const LabelFunction& q_of,
                                    std::vector<QLabel> codomain) {
    return detail::group_mass(psi, q_of, std::move(codomain), [](const BasisLabel&) { return true; });
}

// Marginal over one tensor factor's label.
inline NormDensity marginal_density(const StateVector& psi, std::size_t factor) {
    detail::require_factor(psi, factor);
    return marginal_density(
        psi, [factor](std::span<const std::size_t> l) { return static_cast<QLabel>(l[factor]); },
        detail::index_range(psi.dims()[factor]));
}

// Marginal over the number of up factors of an all-qubit state.
inline NormDensity marginal_up_count(const StateVector& psi) {
    require_qubit_factors(psi);
    return marginal_density(
        psi, [](std::span<const std::size_t> l) { return static_cast<QLabel>(up_count(l)); },
        detail::index_range(psi.factor_count() + 1));
}

// The frequency table viewed as a norm density over the up-count n.
inline NormDensity from_frequency(const FrequencyDensity& d) {
    NormDensity out;
    out.labels = detail::index_range(d.count + 1);
    out.mass = exp_table(d.log_rho);
    out.total = out.mass_sum();
    return out;
}

enum class ReadOffKind { Determined, Indeterminate };

struct SupportEntry {
    QLabel label;
    double mass;
};

struct ReadOffResult {
    ReadOffKind kind;
    std::optional<QLabel> value;      // Determined only
    std::vector<SupportEntry> support; // Indeterminate only: labels above tolerance
    double tolerance_used;
    double outside_mass; // mass off the heaviest label

    bool determined() const { return kind == ReadOffKind::Determined; }
};

// Determined(q0) iff all mass away from the heaviest label q0 is at most
// tolerance * total.
inline ReadOffResult read_off(const NormDensity& rho, double tolerance) {
    if (!(tolerance >= 0.0) || !std::isfinite(tolerance))
        throw PreconditionError("tolerance must be a finite value >= 0");
    if (!(rho.total > 0.0)) throw EmptyStateError("cannot read off a value from a zero-norm density");
    for (double m : rho.mass)
        if (!(m >= 0.0)) throw PreconditionError("norm density masses must be nonnegative");

    const std::size_t peak = argmax(rho.mass);
    std::vector<double> rest;
    rest.reserve(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i)
        if (i != peak) rest.push_back(rho.mass[i]);
    const double outside = numeric::pairwise_sum(rest);
    const double bound = tolerance * rho.total;

    ReadOffResult r{ReadOffKind::Indeterminate, std::nullopt, {}, tolerance, outside};
    if (outside <= bound) {
        r.kind = ReadOffKind::Determined;
        r.value = rho.labels[peak];
        return r;
    }
    for (std::size_t i = 0; i < rho.size(); ++i)
        if (rho.mass[i] > bound) r.support.push_back({rho.labels[i], rho.mass[i]});
    return r;
}

// Function table from fine labels to coarse labels.
using CoarseMap = std::map<QLabel, QLabel>;

// Push-forward of the density along `map`. Each coarse mass is the correctly
// rounded sum of its preimage; the total is carried over as is.
inline NormDensity coarse_grain(const NormDensity& rho, const CoarseMap& map) {
    std::vector<QLabel> targets;
    targets.reserve(rho.size());
    for (QLabel q : rho.labels) {
        const auto it = map.find(q);
        if (it == map.end()) throw PreconditionError("coarse map is not defined on label " + std::to_string(q));
        targets.push_back(it->second);
    }
    NormDensity out;
    out.labels = detail::sorted_unique(targets);
    std::vector<std::vector<double>> groups(out.labels.size());
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const auto pos = std::lower_bound(out.labels.begin(), out.labels.end(), targets[i]) - out.labels.begin();
        groups[static_cast<std::size_t>(pos)].push_back(rho.mass[i]);
    }
    out.mass.resize(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) out.mass[g] = numeric::exact_sum(groups[g]);
    out.total = rho.total;
    return out;
}

inline CoarseMap identity_map(const NormDensity& rho) {
    CoarseMap m;
    for (QLabel q : rho.labels) m.emplace(q, q);
    return m;
}

// Identity except that every label in `merged` goes to `target`.
inline CoarseMap merge_map(const NormDensity& rho, std::span<const QLabel> merged, QLabel target) {
    CoarseMap m = identity_map(rho);
    for (QLabel q : merged) m[q] = target;
    return m;
}

// Bins a discrete variable onto cells of `width` in x = q * scale. Cell k is
// centred on k * width, i.e. covers [(k - 1/2) width, (k + 1/2) width).
inline CoarseMap interval_map(const NormDensity& rho, double scale, double width) {
    if (!(width > 0.0)) throw PreconditionError("bin width must be > 0");
    CoarseMap m;
    for (QLabel q : rho.labels)
        m.emplace(q, static_cast<QLabel>(std::floor(static_cast<double>(q) * scale / width + 0.5)));
    return m;
}

// Psi restricted to the labels whose `factor` equals `value`; other
// amplitudes are zeroed so factor indices keep their meaning.
inline StateVector slice(const StateVector& psi, std::size_t factor, std::size_t value) {
    detail::require_factor(psi, factor);
    if (value >= psi.dims()[factor]) throw ShapeError("conditioning value out of range");
    std::vector<Amplitude> amps(psi.amps().begin(), psi.amps().end());
    for (std::size_t i = 0; i < amps.size(); ++i)
        if (psi.label_of(i)[factor] != value) amps[i] = 0.0;
    return {psi.dims(), std::move(amps)};
}

inline ReadOffResult conditional_readoff(const StateVector& psi, std::size_t cond_factor, std::size_t cond_value,
                                         const LabelFunction& q_of, std::vector<QLabel> codomain,
                                         double tolerance) {
    detail::require_factor(psi, cond_factor);
    if (cond_value >= psi.dims()[cond_factor]) throw ShapeError("conditioning value out of range");
    const NormDensity rho = detail::group_mass(
        psi, q_of, std::move(codomain),
        [&](const BasisLabel& l) { return l[cond_factor] == cond_value; });
    if (!(rho.total > 0.0)) throw EmptyStateError("conditioning slice carries no mass");
    return read_off(rho, tolerance);
}

inline ReadOffResult conditional_readoff(const StateVector& psi, std::size_t cond_factor, std::size_t cond_value,
                                         std::size_t q_factor, double tolerance) {
    detail::require_factor(psi, q_factor);
    return conditional_readoff(
        psi, cond_factor, cond_value,
        [q_factor](std::span<const std::size_t> l) { return static_cast<QLabel>(l[q_factor]); },
        detail::index_range(psi.dims()[q_factor]), tolerance);
}

} // namespace qfreq
