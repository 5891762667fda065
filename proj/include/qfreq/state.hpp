#pragma once

// Dense state vectors over labelled tensor factors.
//
// This is the exact, brute-force layer: every amplitude of a composite state
// is stored, so sizes are capped (kDefaultCapacity). Scalable computations
// live in frequency.hpp and are cross-checked against this file in the tests.
//
// Basis labels are ordered with factor 0 as the most significant index. For
// two-level factors label 0 is "up" (alpha) and label 1 is "down" (beta).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qfreq/errors.hpp"
#include "qfreq/numeric.hpp"

namespace qfreq {

using Amplitude = std::complex<double>;
using BasisLabel = std::vector<std::size_t>;

inline constexpr std::size_t kDefaultCapacity = std::size_t{1} << 24;
inline constexpr double kNormTolerance = 1e-12;
inline constexpr std::size_t kUp = 0;
inline constexpr std::size_t kDown = 1;

inline bool is_finite(Amplitude z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// The pair (a, b) of a two-level state a|up> + b|down>, |a|^2 + |b|^2 = 1.
class TwoLevelAmplitudes {
public:
    TwoLevelAmplitudes(Amplitude a, Amplitude b) : a_(a), b_(b) {
        if (!is_finite(a) || !is_finite(b))
            throw PreconditionError("two-level amplitudes must be finite");
        const double n2 = std::norm(a) + std::norm(b);
        if (std::abs(n2 - 1.0) > kNormTolerance)
            throw PreconditionError("two-level amplitudes must satisfy |a|^2 + |b|^2 = 1, got " +
                                    std::to_string(n2));
    }

    // Real nonnegative amplitudes with |a|^2 = weight.
    static TwoLevelAmplitudes from_weight(double weight) {
        if (!(weight >= 0.0 && weight <= 1.0))
            throw PreconditionError("|a|^2 must lie in [0, 1]");
        return {std::sqrt(weight), std::sqrt(1.0 - weight)};
    }

    Amplitude a() const { return a_; }
    Amplitude b() const { return b_; }
    double weight_up() const { return std::norm(a_); }
    double weight_down() const { return std::norm(b_); }
    bool degenerate() const { return a_ == Amplitude{} || b_ == Amplitude{}; }

private:
    Amplitude a_;
    Amplitude b_;
};

class StateVector {
public:
    StateVector(std::vector<std::size_t> dims, std::vector<Amplitude> amps,
                std::size_t capacity = kDefaultCapacity)
        : dims_(std::move(dims)), amps_(std::move(amps)) {
        if (amps_.size() != checked_size(dims_, capacity))
            throw ShapeError("amplitude count " + std::to_string(amps_.size()) +
                             " does not match product of dims");
        for (const auto& z : amps_)
            if (!is_finite(z)) throw PreconditionError("state amplitudes must be finite");
    }

    static StateVector basis_ket(std::vector<std::size_t> dims, std::span<const std::size_t> label) {
        std::vector<Amplitude> amps(checked_size(dims, kDefaultCapacity));
        StateVector s(std::move(dims), std::move(amps));
        s.amps_[s.index_of(label)] = 1.0;
        return s;
    }

    static StateVector qubit(Amplitude up, Amplitude down) { return {{2}, {up, down}}; }

    static StateVector qubit(const TwoLevelAmplitudes& spec) {
        auto s = qubit(spec.a(), spec.b());
        s.normalized_ = true;
        return s;
    }

    // Product of dims, rejecting empty factors and anything above capacity.
    static std::size_t checked_size(std::span<const std::size_t> dims, std::size_t capacity) {
        std::size_t n = 1;
        for (std::size_t d : dims) {
            if (d == 0) throw ShapeError("tensor factor of dimension 0");
            if (n > capacity / d)
                throw CapacityError("state would exceed the capacity of " + std::to_string(capacity) +
                                    " amplitudes");
            n *= d;
        }
        return n;
    }

    const std::vector<std::size_t>& dims() const { return dims_; }
    std::span<const Amplitude> amps() const { return amps_; }
    std::size_t size() const { return amps_.size(); }
    std::size_t factor_count() const { return dims_.size(); }
    Amplitude operator[](std::size_t index) const { return amps_[index]; }
    Amplitude at(std::span<const std::size_t> label) const { return amps_[index_of(label)]; }

    BasisLabel label_of(std::size_t index) const {
        if (index >= amps_.size()) throw ShapeError("basis index out of range");
        BasisLabel label(dims_.size());
        for (std::size_t f = dims_.size(); f-- > 0;) {
            label[f] = index % dims_[f];
            index /= dims_[f];
        }
        return label;
    }

    std::size_t index_of(std::span<const std::size_t> label) const {
        if (label.size() != dims_.size()) throw ShapeError("label length does not match factor count");
        std::size_t index = 0;
        for (std::size_t f = 0; f < dims_.size(); ++f) {
            if (label[f] >= dims_[f]) throw ShapeError("label entry out of range");
            index = index * dims_[f] + label[f];
        }
        return index;
    }

    double norm2() const {
        std::vector<double> w(amps_.size());
        for (std::size_t i = 0; i < amps_.size(); ++i) w[i] = std::norm(amps_[i]);
        return numeric::pairwise_sum(w);
    }

    // Advisory flag. Nothing in the library rescales a state.
    bool flagged_normalized() const { return normalized_; }

    StateVector flag_normalized() const {
        if (std::abs(norm2() - 1.0) > kNormTolerance)
            throw PreconditionError("state is not normalized within tolerance");
        StateVector s = *this;
        s.normalized_ = true;
        return s;
    }

    friend StateVector operator+(const StateVector& x, const StateVector& y) {
        require_same_dims(x, y);
        std::vector<Amplitude> out(x.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.amps_[i] + y.amps_[i];
        return {x.dims_, std::move(out)};
    }

    friend StateVector operator-(const StateVector& x, const StateVector& y) {
        require_same_dims(x, y);
        std::vector<Amplitude> out(x.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.amps_[i] - y.amps_[i];
        return {x.dims_, std::move(out)};
    }

    friend StateVector operator*(Amplitude c, const StateVector& x) {
        std::vector<Amplitude> out(x.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * x.amps_[i];
        return {x.dims_, std::move(out)};
    }

    friend bool operator==(const StateVector& x, const StateVector& y) {
        return x.dims_ == y.dims_ && x.amps_ == y.amps_;
    }

    static void require_same_dims(const StateVector& x, const StateVector& y) {
        if (x.dims_ != y.dims_) throw ShapeError("states have different factor dimensions");
    }

private:
    std::vector<std::size_t> dims_;
    std::vector<Amplitude> amps_;
    bool normalized_ = false;
};

// <phi|psi>, conjugate-linear in phi.
inline Amplitude inner_product(const StateVector& phi, const StateVector& psi) {
    StateVector::require_same_dims(phi, psi);
    std::vector<double> re(phi.size());
    std::vector<double> im(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const Amplitude t = std::conj(phi[i]) * psi[i];
        re[i] = t.real();
        im[i] = t.imag();
    }
    return {numeric::pairwise_sum(re), numeric::pairwise_sum(im)};
}

inline StateVector tensor(const StateVector& phi, const StateVector& psi,
                          std::size_t capacity = kDefaultCapacity) {
    std::vector<std::size_t> dims = phi.dims();
    dims.insert(dims.end(), psi.dims().begin(), psi.dims().end());
    std::vector<Amplitude> amps(StateVector::checked_size(dims, capacity));
    for (std::size_t i = 0; i < phi.size(); ++i)
        for (std::size_t j = 0; j < psi.size(); ++j) amps[i * psi.size() + j] = phi[i] * psi[j];
    return {std::move(dims), std::move(amps), capacity};
}

inline StateVector tensor_power(const StateVector& psi, std::size_t count,
                                std::size_t capacity = kDefaultCapacity) {
    if (count == 0) throw PreconditionError("tensor power needs at least one factor");
    StateVector out = psi;
    for (std::size_t k = 1; k < count; ++k) out = tensor(out, psi, capacity);
    return out;
}

// |Psi>_N: N identical copies of a|up> + b|down>.
inline StateVector repeat_state(const TwoLevelAmplitudes& spec, std::size_t count,
                                std::size_t capacity = kDefaultCapacity) {
    if (count == 0) throw PreconditionError("repeat_state needs N >= 1");
    if (count >= 64 || (std::size_t{1} << count) > capacity)
        throw CapacityError("2^N exceeds the capacity of " + std::to_string(capacity) + " amplitudes");
    return tensor_power(StateVector::qubit(spec), count, capacity).flag_normalized();
}

inline std::size_t up_count(std::span<const std::size_t> label) {
    return static_cast<std::size_t>(std::count(label.begin(), label.end(), kUp));
}

inline void require_qubit_factors(const StateVector& psi) {
    for (std::size_t d : psi.dims())
        if (d != 2) throw ShapeError("operation requires every factor to be two-dimensional");
}

// P_i: keep the components whose i-th factor is up.
inline StateVector project_up(const StateVector& psi, std::size_t factor) {
    if (factor >= psi.factor_count()) throw ShapeError("factor index out of range");
    if (psi.dims()[factor] != 2) throw ShapeError("projected factor must be two-dimensional");
    std::vector<Amplitude> amps(psi.amps().begin(), psi.amps().end());
    for (std::size_t i = 0; i < amps.size(); ++i)
        if (psi.label_of(i)[factor] == kDown) amps[i] = 0.0;
    return {psi.dims(), std::move(amps)};
}

// F_N = (1/N) sum_i P_i. Diagonal in the label basis: an n-up label is
// scaled by n/N.
inline StateVector frequency_apply(const StateVector& psi) {
    require_qubit_factors(psi);
    const std::size_t n_factors = psi.factor_count();
    std::vector<Amplitude> amps(psi.size());
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const double r = static_cast<double>(up_count(psi.label_of(i))) / static_cast<double>(n_factors);
        amps[i] = r * psi[i];
    }
    return {psi.dims(), std::move(amps)};
}

// || (F_N - |a|^2) |Psi>_N ||^2 evaluated on the dense state.
inline double freq_deviation_norm(const TwoLevelAmplitudes& spec, std::size_t count,
                                  std::size_t capacity = kDefaultCapacity) {
    const StateVector psi = repeat_state(spec, count, capacity);
    return (frequency_apply(psi) - Amplitude{spec.weight_up()} * psi).norm2();
}

// |r>_N: the normalized symmetric combination of all labels with exactly
// n_up up-factors.
inline StateVector symmetric_count_state(std::size_t count, std::size_t n_up,
                                         std::size_t capacity = kDefaultCapacity) {
    if (count == 0 || n_up > count) throw PreconditionError("need 0 <= n <= N and N >= 1");
    const std::vector<std::size_t> dims(count, 2);
    std::vector<Amplitude> amps(StateVector::checked_size(dims, capacity));
    StateVector shape(dims, amps, capacity);
    const double k = std::exp(-0.5 * static_cast<double>(numeric::log_binomial(count, n_up)));
    for (std::size_t i = 0; i < amps.size(); ++i)
        if (up_count(shape.label_of(i)) == n_up) amps[i] = k;
    return {dims, std::move(amps), capacity};
}

// The before->after map sum c|alpha> -> sum c|alpha>|M_alpha>...: appends
// `copies` pointer factors that each record the label of `factor`.
inline StateVector attach_pointer(const StateVector& psi, std::size_t factor, std::size_t copies = 1,
                                  std::size_t capacity = kDefaultCapacity) {
    if (factor >= psi.factor_count()) throw ShapeError("factor index out of range");
    std::vector<std::size_t> dims = psi.dims();
    dims.insert(dims.end(), copies, psi.dims()[factor]);
    std::vector<Amplitude> amps(StateVector::checked_size(dims, capacity));
    StateVector out(dims, amps, capacity);
    for (std::size_t i = 0; i < psi.size(); ++i) {
        BasisLabel label = psi.label_of(i);
        label.insert(label.end(), copies, label[factor]);
        amps[out.index_of(label)] = psi[i];
    }
    return {std::move(dims), std::move(amps), capacity};
}

// One record factor per particle: alpha_i -> alpha_i|+>, beta_i -> beta_i|->.
// Record factors follow all particle factors in the same order.
inline StateVector attach_records(const StateVector& psi, std::size_t capacity = kDefaultCapacity) {
    require_qubit_factors(psi);
    StateVector out = psi;
    for (std::size_t f = 0; f < psi.factor_count(); ++f) out = attach_pointer(out, f, 1, capacity);
    return out;
}

} // namespace qfreq
