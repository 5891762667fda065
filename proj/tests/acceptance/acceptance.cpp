// Runs every acceptance criterion and prints one PASS/FAIL line for each.
// Exit status is the number of failed criteria.

#include "qfreq/decoherence.hpp"
#include "qfreq/frequency.hpp"
#include "qfreq/readoff.hpp"
#include "qfreq/state.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace qfreq;

namespace {

// Pinned tolerances.
constexpr double kOracleTol = 1e-12;
constexpr double kDeviationTol = 1e-12;
constexpr double kOracleSeconds = 10.0;
constexpr double kConcentrationSeconds = 5.0;
constexpr double kConcentrationBound = 1e-8;
constexpr double kRecordRelTol = 1e-12;
constexpr double kGaussianLo = 0.99;
constexpr double kGaussianHi = 1.01;
constexpr double kVisibilityTol = 1e-6;
constexpr double kCatTol = 1e-12;
constexpr double kLogAdditiveUlps = 2.0;
constexpr double kReadOffTol = 1e-10;
constexpr int kRecombinations = 100;

struct Outcome {
    bool pass;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Outcome oracle_equivalence() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (double w : {0.1, 0.25, 0.5, 0.7}) {
        const auto spec = TwoLevelAmplitudes::from_weight(w);
        for (std::size_t count : {2u, 4u, 8u, 12u, 16u}) {
            const auto psi = repeat_state(spec, count);
            std::vector<std::vector<double>> groups(count + 1);
            for (std::size_t i = 0; i < psi.size(); ++i)
                groups[up_count(psi.label_of(i))].push_back(std::norm(psi[i]));
            const auto d = density(spec, count);
            for (std::size_t n = 0; n <= count; ++n)
                worst = std::max(worst, std::abs(d.rho(n) - numeric::exact_sum(groups[n])));
        }
    }
    const double elapsed = seconds_since(t0);
    return {worst <= kOracleTol && elapsed < kOracleSeconds,
            "max |diff| " + fmt("%.3g", worst) + ", " + fmt("%.3f", elapsed) + " s"};
}

Outcome deviation_law() {
    double worst = 0.0;
    for (double w : {0.1, 0.25, 0.5, 0.7, 0.9}) {
        const auto spec = TwoLevelAmplitudes::from_weight(w);
        for (std::size_t count = 1; count <= 16; ++count) {
            const double lhs = freq_deviation_norm(spec, count) * static_cast<double>(count);
            worst = std::max(worst, std::abs(lhs - spec.weight_up() * spec.weight_down()));
        }
    }
    return {worst <= kDeviationTol, "max |N*dev - |a|^2|b|^2| " + fmt("%.3g", worst)};
}

Outcome concentration() {
    const auto t0 = Clock::now();
    const auto spec = TwoLevelAmplitudes::from_weight(0.3);
    std::vector<double> tails;
    for (std::size_t count : {1000u, 10000u, 100000u}) tails.push_back(tail_mass(spec, count, 0.01));
    const double elapsed = seconds_since(t0);
    const bool decreasing = tails[0] > tails[1] && tails[1] > tails[2];
    return {decreasing && tails[2] <= kConcentrationBound && elapsed < kConcentrationSeconds,
            "tails " + fmt("%.3g", tails[0]) + " " + fmt("%.3g", tails[1]) + " " + fmt("%.3g", tails[2]) + ", " +
                fmt("%.3f", elapsed) + " s"};
}

Outcome record_table() {
    using boost::multiprecision::cpp_int;
    const auto rec = record_distribution(TwoLevelAmplitudes::from_weight(0.5), 100);
    cpp_int c = 1;
    double worst = 0.0;
    for (unsigned n = 0; n <= 100; ++n) {
        if (n > 0) c = c * (101 - n) / n;
        // C(100, n) < 2^100, so the ratio is formed in double after an exact shift.
        const double exact = std::ldexp(c.convert_to<double>(), -100);
        worst = std::max(worst, std::abs(rec.frequency(n) - exact) / exact);
    }
    return {worst <= kRecordRelTol && rec.terms() == 101,
            "terms " + std::to_string(rec.terms()) + ", max rel err " + fmt("%.3g", worst)};
}

Outcome pnorm_argmax() {
    constexpr std::size_t count = 100000;
    double worst = 0.0;
    for (double p : {1.0, 2.0, 4.0}) {
        for (double w : {0.3, 0.6}) {
            const auto d = pnorm_density(PNormSpec::from_weight(w, p), count);
            worst = std::max(worst, std::abs(d.argmax_r() - d.spec.weight_up()));
        }
    }
    return {worst <= 1.0 / static_cast<double>(count), "max |argmax r - a^p| " + fmt("%.3g", worst)};
}

Outcome gaussian_consistency() {
    constexpr std::size_t count = 1000000;
    const auto spec = TwoLevelAmplitudes::from_weight(0.3);
    const double sigma = gaussian_sigma(spec, count);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double sign : {-1.0, 1.0}) {
        const auto s = scaled_density(spec, count, spec.weight_up() + sign * sigma);
        const double ratio = s.value / gaussian_approx(spec, count, s.r);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    return {lo >= kGaussianLo && hi <= kGaussianHi, "ratios in [" + fmt("%.8f", lo) + ", " + fmt("%.8f", hi) + "]"};
}

Outcome decoherence_suite() {
    // Nearly flat matched envelopes with fringe period 0.2; the grid of 1e4
    // points at spacing 1e-4 contains the central maximum and the minima.
    SlitModel m;
    m.slit_centers = {-0.5, 0.5};
    m.packet_width = 1e4;
    m.wavenumber = 10.0 * std::numbers::pi;
    m.screen_grid = SlitModel::uniform_grid(-0.5, 0.4999, 10000);

    const auto orth = detector_pattern(m, DetectorState{0.0});
    double cross = 0.0;
    for (std::size_t i = 0; i < orth.x.size(); ++i)
        cross = std::max(cross, std::abs(orth.intensity[i] - (std::norm(orth.amp1[i]) + std::norm(orth.amp2[i]))));

    double vis_err = 0.0;
    for (int k = 0; k <= 10; ++k) {
        const double g = 0.1 * k;
        vis_err = std::max(vis_err, std::abs(visibility(detector_pattern(m, DetectorState{g})) - g));
    }

    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> mod(0.5, 1.0), phase(-3.0, 3.0);
    std::vector<Amplitude> overlaps(200);
    for (auto& o : overlaps) o = std::polar(mod(rng), phase(rng));
    const std::span<const Amplitude> all(overlaps);
    const auto s = environment_suppression(EnvironmentModel{overlaps});
    std::vector<double> logs;
    for (const auto& o : overlaps) logs.push_back(std::log(std::abs(o)));
    const bool correctly_rounded = s.log_modulus == numeric::exact_sum(logs);
    const double split = log_modulus_sum(all.first(73)) + log_modulus_sum(all.subspan(73));
    const double ulp = std::numeric_limits<double>::epsilon() * std::abs(s.log_modulus);
    const bool additive = correctly_rounded && std::abs(split - s.log_modulus) <= kLogAdditiveUlps * ulp;

    double cat = 0.0;
    for (const auto& spec : {TwoLevelAmplitudes::from_weight(0.3), TwoLevelAmplitudes::from_weight(0.5),
                             TwoLevelAmplitudes(std::polar(std::sqrt(0.2), 1.0), std::polar(std::sqrt(0.8), -0.3))}) {
        const auto c = cat_analysis(spec);
        cat = std::max({cat, c.expansion_mismatch, std::abs(c.decayed_alive.pointer_total - c.decayed_alive.mixed_total),
                        std::abs(c.rotated_probe.pointer_total - c.rotated_probe.mixed_total)});
    }

    const bool pass = cross == 0.0 && vis_err <= kVisibilityTol && additive && cat <= kCatTol;
    return {pass, "cross term " + fmt("%.3g", cross) + ", visibility err " + fmt("%.3g", vis_err) +
                      ", log-additive " + (additive ? "yes" : "no") + ", cat mismatch " + fmt("%.3g", cat)};
}

Outcome readoff_suite() {
    std::mt19937_64 rng(1234);
    std::normal_distribution<double> gauss;
    const std::vector<std::size_t> dims{3, 4, 2};
    const auto q_of = [](std::span<const std::size_t> l) { return static_cast<QLabel>(l[0] + l[1]); };
    const std::vector<QLabel> codomain{0, 1, 2, 3, 4, 5};

    std::vector<Amplitude> amps(24);
    for (auto& z : amps) z = {gauss(rng), gauss(rng)};
    const StateVector psi(dims, amps);
    const auto before = marginal_density(psi, q_of, codomain);

    std::map<QLabel, std::vector<std::size_t>> classes;
    for (std::size_t i = 0; i < psi.size(); ++i) classes[q_of(psi.label_of(i))].push_back(i);

    double worst = 0.0;
    for (int trial = 0; trial < kRecombinations; ++trial) {
        std::vector<Amplitude> out(psi.size());
        for (const auto& [q, idx] : classes) {
            // Gram-Schmidt on Gaussian columns gives a random orthonormal basis of the class.
            const std::size_t n = idx.size();
            std::vector<std::vector<Amplitude>> u(n, std::vector<Amplitude>(n));
            for (std::size_t c = 0; c < n; ++c) {
                for (auto& z : u[c]) z = {gauss(rng), gauss(rng)};
                for (std::size_t p = 0; p < c; ++p) {
                    Amplitude dot{};
                    for (std::size_t i = 0; i < n; ++i) dot += std::conj(u[p][i]) * u[c][i];
                    for (std::size_t i = 0; i < n; ++i) u[c][i] -= dot * u[p][i];
                }
                double norm = 0.0;
                for (const auto& z : u[c]) norm += std::norm(z);
                for (auto& z : u[c]) z /= std::sqrt(norm);
            }
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < n; ++c) out[idx[r]] += u[c][r] * psi[idx[c]];
        }
        const auto after = marginal_density(StateVector(dims, std::move(out)), q_of, codomain);
        for (std::size_t k = 0; k < before.size(); ++k) worst = std::max(worst, std::abs(after.mass[k] - before.mass[k]));
    }

    // Coarse cells carry the correctly rounded sum of their preimage, and
    // the total is untouched.
    bool conserved = true;
    for (const auto& map : {identity_map(before), merge_map(before, std::vector<QLabel>{1, 2, 3}, 1),
                            interval_map(before, 0.25, 0.5)}) {
        const auto coarse = coarse_grain(before, map);
        conserved = conserved && coarse.total == before.total;
        for (std::size_t c = 0; c < coarse.size(); ++c) {
            std::vector<double> pre;
            for (std::size_t i = 0; i < before.size(); ++i)
                if (map.at(before.labels[i]) == coarse.labels[c]) pre.push_back(before.mass[i]);
            conserved = conserved && coarse.mass[c] == numeric::exact_sum(pre);
        }
    }
    return {worst <= kReadOffTol && conserved,
            "max |drho| " + fmt("%.3g", worst) + ", coarse-grain conserved " + (conserved ? "yes" : "no")};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"oracle-equivalence", oracle_equivalence},
        {"deviation-law", deviation_law},
        {"concentration", concentration},
        {"record-table", record_table},
        {"pnorm-argmax", pnorm_argmax},
        {"gaussian-consistency", gaussian_consistency},
        {"decoherence-suite", decoherence_suite},
        {"readoff-suite", readoff_suite},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        if (!o.pass) ++failed;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed;
}
