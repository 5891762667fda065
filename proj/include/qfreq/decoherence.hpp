#pragma once

// Amplitude bookkeeping for branching: two-slit patterns with and without a
// which-path record, suppression of interference by environment overlaps,
// component classification of product states, and the two expansions of the
// nucleus-cat state.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "qfreq/errors.hpp"
#include "qfreq/numeric.hpp"
#include "qfreq/readoff.hpp"
#include "qfreq/state.hpp"

namespace qfreq {

// Two Gaussian packets on a screen. The far-field path difference is a
// linear phase: packet i carries exp(-i k c_i x).
struct SlitModel {
    std::array<double, 2> slit_centers{-0.5, 0.5};
    double packet_width = 1.0;
    double wavenumber = 0.0;
    std::vector<double> screen_grid;

    void validate() const {
        if (!(packet_width > 0.0) || !std::isfinite(packet_width))
            throw PreconditionError("packet width must be > 0");
        if (!std::isfinite(wavenumber) || !std::isfinite(slit_centers[0]) || !std::isfinite(slit_centers[1]))
            throw PreconditionError("slit geometry must be finite");
        for (std::size_t i = 1; i < screen_grid.size(); ++i)
            if (!(screen_grid[i] > screen_grid[i - 1])) throw PreconditionError("screen grid must be strictly increasing");
    }

    // `points` equally spaced positions from lo to hi inclusive.
    static std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
        if (points < 2 || !(hi > lo)) throw PreconditionError("grid needs >= 2 points and hi > lo");
        std::vector<double> g(points);
        const double step = (hi - lo) / static_cast<double>(points - 1);
        for (std::size_t i = 0; i < points; ++i) g[i] = lo + step * static_cast<double>(i);
        g.back() = hi;
        return g;
    }
};

struct ScreenAmplitude {
    Amplitude amp1;
    Amplitude amp2;
    Amplitude total;

    double intensity() const { return std::norm(total); }
};

inline Amplitude slit_packet(const SlitModel& m, std::size_t slit, double x) {
    const double w = m.packet_width;
    const double c = m.slit_centers[slit];
    const double d = x - c;
    const double envelope = std::pow(2.0 * std::numbers::pi * w * w, -0.25) * std::exp(-d * d / (4.0 * w * w));
    return std::polar(envelope, -m.wavenumber * c * x);
}

// <x|1>, <x|2> and <x|1> + <x|2>.
inline ScreenAmplitude screen_amplitude(const SlitModel& m, double x) {
    m.validate();
    const Amplitude a1 = slit_packet(m, 0, x);
    const Amplitude a2 = slit_packet(m, 1, x);
    return {a1, a2, a1 + a2};
}

// <x|1> - <x|2>: the amplitude for screen position x together with the
// detector combination D1 - D2.
inline Amplitude rotated_detector_amplitude(const SlitModel& m, double x) {
    m.validate();
    return slit_packet(m, 0, x) - slit_packet(m, 1, x);
}

// Which-path record with <D1|D2> = overlap.
struct DetectorState {
    Amplitude overlap{0.0, 0.0};

    void validate() const {
        if (!is_finite(overlap) || std::abs(overlap) > 1.0 + kNormTolerance)
            throw PreconditionError("detector overlap must satisfy |<D1|D2>| <= 1");
    }

    // Concrete detector kets in a 2-dim space: D1 = (1, 0), D2 = (g, sqrt(1 - |g|^2)).
    std::array<StateVector, 2> kets() const {
        validate();
        const double m = std::min(1.0, std::abs(overlap));
        const double s = std::sqrt((1.0 - m) * (1.0 + m));
        return {StateVector::qubit(1.0, 0.0), StateVector::qubit(overlap, s)};
    }
};

struct InterferencePattern {
    std::vector<double> x;
    std::vector<Amplitude> amp1;
    std::vector<Amplitude> amp2;
    std::vector<double> intensity;
    double packet_width = 0.0;
};

// Screen density summed over detector states:
//   I(x) = |a1 + g a2|^2 + (1 - |g|^2)|a2|^2
//        = |a1|^2 + |a2|^2 + 2 Re(g conj(a1) a2),  g = <D1|D2>.
// The first form is nonnegative term by term and reduces exactly to
// |a1|^2 + |a2|^2 at g = 0 and |a1 + a2|^2 at g = 1.
inline InterferencePattern detector_pattern(const SlitModel& m, const DetectorState& det) {
    m.validate();
    det.validate();
    const Amplitude g = det.overlap;
    const double mg = std::min(1.0, std::abs(g));
    const double leak = (1.0 - mg) * (1.0 + mg);
    InterferencePattern p;
    p.packet_width = m.packet_width;
    p.x = m.screen_grid;
    const std::size_t n = p.x.size();
    p.amp1.resize(n);
    p.amp2.resize(n);
    p.intensity.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Amplitude a1 = slit_packet(m, 0, p.x[i]);
        const Amplitude a2 = slit_packet(m, 1, p.x[i]);
        p.amp1[i] = a1;
        p.amp2[i] = a2;
        p.intensity[i] = std::norm(a1 + g * a2) + leak * std::norm(a2);
    }
    return p;
}

// No detector at all; the same as a detector whose two states coincide.
inline InterferencePattern screen_pattern(const SlitModel& m) { return detector_pattern(m, {Amplitude{1.0, 0.0}}); }

// (Imax - Imin) / (Imax + Imin) over grid points within half_width of the
// grid centre.
inline double visibility(std::span<const double> x, std::span<const double> intensity, double half_width) {
    if (x.size() != intensity.size() || x.empty()) throw PreconditionError("visibility needs matching nonempty grids");
    if (!(half_width > 0.0)) throw PreconditionError("fringe region half width must be > 0");
    const double centre = 0.5 * (x.front() + x.back());
    double hi = -1.0;
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(intensity[i] >= 0.0)) throw PreconditionError("intensity must be nonnegative");
        if (std::abs(x[i] - centre) > half_width) continue;
        hi = std::max(hi, intensity[i]);
        lo = std::min(lo, intensity[i]);
    }
    if (hi < 0.0) throw UndefinedVisibilityError("no grid points in the central fringe region");
    if (hi + lo == 0.0) throw UndefinedVisibilityError("visibility is undefined for zero intensity");
    return (hi - lo) / (hi + lo);
}

inline double visibility(const InterferencePattern& p) { return visibility(p.x, p.intensity, p.packet_width); }

// The which-path state sum_x (<x|1>|x>|D1> + <x|2>|x>|D2>) on the screen
// grid: factor 0 is the grid index, factor 1 the detector.
inline StateVector which_path_state(const SlitModel& m, const DetectorState& det) {
    m.validate();
    const auto kets = det.kets();
    const std::size_t n = m.screen_grid.size();
    std::vector<Amplitude> amps(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const Amplitude a1 = slit_packet(m, 0, m.screen_grid[i]);
        const Amplitude a2 = slit_packet(m, 1, m.screen_grid[i]);
        for (std::size_t d = 0; d < 2; ++d) amps[2 * i + d] = a1 * kets[0][d] + a2 * kets[1][d];
    }
    return {{n, 2}, std::move(amps)};
}

struct EnvironmentModel {
    std::vector<Amplitude> factor_overlaps;

    void validate() const {
        for (const auto& o : factor_overlaps)
            if (!is_finite(o) || std::abs(o) > 1.0 + kNormTolerance)
                throw PreconditionError("environment overlaps must have modulus <= 1");
    }
};

struct Suppression {
    Amplitude value;    // product of the factor overlaps
    double log_modulus; // sum of log|overlap|, -inf if any overlap is 0
};

inline double log_modulus_sum(std::span<const Amplitude> overlaps) {
    std::vector<double> logs(overlaps.size());
    for (std::size_t i = 0; i < overlaps.size(); ++i) {
        const double m = std::abs(overlaps[i]);
        if (m == 0.0) return numeric::kNegInf;
        logs[i] = std::log(m);
    }
    return numeric::exact_sum(logs);
}

inline Suppression environment_suppression(const EnvironmentModel& env) {
    env.validate();
    Amplitude v{1.0, 0.0};
    for (const auto& o : env.factor_overlaps) v *= o;
    return {v, log_modulus_sum(env.factor_overlaps)};
}

enum class ComponentVerdict { SameComponent, MacroscopicallyDifferent, Ambiguous };

inline const char* to_string(ComponentVerdict v) {
    switch (v) {
    case ComponentVerdict::SameComponent: return "SameComponent";
    case ComponentVerdict::MacroscopicallyDifferent: return "MacroscopicallyDifferent";
    case ComponentVerdict::Ambiguous: return "Ambiguous";
    }
    return "?";
}

struct ComponentConfig {
    double threshold = 1e-10;        // overlap-product modulus below which states are macroscopically different
    std::size_t max_differing = 3;   // k0: differing factors still counted as the same component
    double unit_tolerance = 1e-12;   // |1 - overlap| at or below this counts as an identical factor
};

struct ComponentReport {
    ComponentVerdict verdict;
    std::size_t differing;
    Amplitude overlap_product;
    double log_modulus;
    std::vector<Amplitude> overlaps;
};

// Finite truncation of two infinite product states, one ket per factor.
using ProductState = std::vector<StateVector>;

inline ComponentReport classify_components(const ProductState& s1, const ProductState& s2,
                                           const ComponentConfig& cfg = {}) {
    if (s1.size() != s2.size()) throw ShapeError("product states must have the same number of factors");
    if (!(cfg.threshold > 0.0)) throw PreconditionError("threshold must be > 0");
    ComponentReport r{ComponentVerdict::Ambiguous, 0, {1.0, 0.0}, 0.0, {}};
    r.overlaps.reserve(s1.size());
    for (std::size_t i = 0; i < s1.size(); ++i) {
        const Amplitude o = inner_product(s1[i], s2[i]);
        r.overlaps.push_back(o);
        if (std::abs(o - Amplitude{1.0, 0.0}) > cfg.unit_tolerance) ++r.differing;
        r.overlap_product *= o;
    }
    r.log_modulus = log_modulus_sum(r.overlaps);
    if (r.differing <= cfg.max_differing)
        r.verdict = ComponentVerdict::SameComponent;
    else if (r.log_modulus < std::log(cfg.threshold))
        r.verdict = ComponentVerdict::MacroscopicallyDifferent;
    return r;
}

// Nucleus factor 0 (not decayed / decayed), cat factor 1 (alive / dead).
inline constexpr std::size_t kNotDecayed = 0;
inline constexpr std::size_t kDecayed = 1;
inline constexpr std::size_t kAlive = 0;
inline constexpr std::size_t kDead = 1;

struct ProbeAmplitudes {
    std::array<Amplitude, 2> pointer_terms; // against a|nd,alive>, b|d,dead>
    Amplitude pointer_total;
    std::array<Amplitude, 2> mixed_terms;   // against the (nd +- d)(a alive +- b dead) / 2 terms
    Amplitude mixed_total;
};

struct CatReport {
    StateVector state;
    std::array<StateVector, 2> pointer_terms;
    std::array<StateVector, 2> mixed_terms;
    double expansion_mismatch; // max |pointer sum - mixed sum| per amplitude
    ProbeAmplitudes decayed_alive;
    ProbeAmplitudes rotated_probe;
};

namespace detail {

inline ProbeAmplitudes probe(const StateVector& bra, const std::array<StateVector, 2>& pointer,
                             const std::array<StateVector, 2>& mixed) {
    ProbeAmplitudes p;
    for (std::size_t i = 0; i < 2; ++i) {
        p.pointer_terms[i] = inner_product(bra, pointer[i]);
        p.mixed_terms[i] = inner_product(bra, mixed[i]);
    }
    p.pointer_total = p.pointer_terms[0] + p.pointer_terms[1];
    p.mixed_total = p.mixed_terms[0] + p.mixed_terms[1];
    return p;
}

} // namespace detail

// The state a|nd>|alive> + b|d>|dead> and its rewriting as
//   (1/2)(|nd> + |d>)(a|alive> + b|dead>) + (1/2)(|nd> - |d>)(a|alive> - b|dead>),
// probed by the inconsistent ket |d>|alive> and by
//   (|nd> - |d>)(b|alive> + a|dead>).
inline CatReport cat_analysis(const TwoLevelAmplitudes& spec) {
    const Amplitude a = spec.a();
    const Amplitude b = spec.b();
    const auto ket = [](std::size_t nucleus, std::size_t cat) {
        const std::array<std::size_t, 2> l{nucleus, cat};
        return StateVector::basis_ket({2, 2}, l);
    };
    const StateVector nd_alive = ket(kNotDecayed, kAlive);
    const StateVector d_dead = ket(kDecayed, kDead);

    std::array<StateVector, 2> pointer{a * nd_alive, b * d_dead};
    const StateVector nucleus_plus = StateVector::qubit(1.0, 1.0);
    const StateVector nucleus_minus = StateVector::qubit(1.0, -1.0);
    std::array<StateVector, 2> mixed{
        Amplitude{0.5} * tensor(nucleus_plus, StateVector::qubit(a, b)),
        Amplitude{0.5} * tensor(nucleus_minus, StateVector::qubit(a, -b)),
    };
    const StateVector state = pointer[0] + pointer[1];
    const StateVector mixed_sum = mixed[0] + mixed[1];
    double mismatch = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i) mismatch = std::max(mismatch, std::abs(state[i] - mixed_sum[i]));

    const StateVector rotated = tensor(nucleus_minus, StateVector::qubit(b, a));
    return {state, pointer, mixed, mismatch, detail::probe(ket(kDecayed, kAlive), pointer, mixed),
            detail::probe(rotated, pointer, mixed)};
}

struct Branch {
    std::size_t pointer_label;
    double weight;
    StateVector state;
};

struct BranchSet {
    std::size_t pointer_factor;
    std::vector<Branch> branches;
    std::vector<std::vector<Amplitude>> cross_overlaps; // environment-suppressed, 1 on the diagonal
    double total;

    double weight_sum() const {
        std::vector<double> w;
        for (const auto& b : branches) w.push_back(b.weight);
        return numeric::pairwise_sum(w);
    }
};

// Groups the state by the pointer factor's label. Only labels carrying
// nonzero weight form branches. Off-diagonal overlaps are the environment
// suppression factor.
inline BranchSet branch_decompose(const StateVector& psi, std::size_t pointer_factor, const EnvironmentModel& env) {
    const NormDensity rho = marginal_density(psi, pointer_factor);
    const Amplitude s = environment_suppression(env).value;
    BranchSet set{pointer_factor, {}, {}, rho.total};
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (rho.mass[i] == 0.0) continue;
        const auto label = static_cast<std::size_t>(rho.labels[i]);
        set.branches.push_back({label, rho.mass[i], slice(psi, pointer_factor, label)});
    }
    const std::size_t n = set.branches.size();
    set.cross_overlaps.assign(n, std::vector<Amplitude>(n, s));
    for (std::size_t i = 0; i < n; ++i) set.cross_overlaps[i][i] = 1.0;
    return set;
}

} // namespace qfreq
