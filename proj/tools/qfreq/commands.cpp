#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

#include "qfreq/qfreq.hpp"

namespace qfreq::cli {

namespace {

using io::Json;
using io::Table;

// Density tables hold N + 1 doubles; larger sweeps are refused up front.
constexpr std::size_t kMaxTableCount = 100'000'000;

// Evaluates fn(0..n-1) on up to `threads` workers. Results land in index
// order and the lowest-index exception is rethrown, so the outcome does not
// depend on scheduling.
template <class T, class Fn>
std::vector<T> parallel_map(unsigned threads, std::size_t n, Fn fn) {
    std::vector<std::optional<T>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < workers; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    std::vector<T> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
        out.push_back(std::move(*slots[i]));
    }
    return out;
}

template <class T>
std::vector<T> sorted_unique(std::vector<T> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

void require_table_count(std::size_t count) {
    if (count > kMaxTableCount)
        throw CapacityError("N = " + std::to_string(count) + " exceeds the table limit of " +
                            std::to_string(kMaxTableCount));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io::FormatError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---- freq-scan ------------------------------------------------------------

struct FreqScan {
    double weight = 0.3;
    std::vector<std::size_t> counts{1000, 10000, 100000};
    double epsilon = 0.05;
    bool densities = false;
};

Report run_freq_scan(const FreqScan& o, const RunContext& ctx) {
    const auto spec = TwoLevelAmplitudes::from_weight(o.weight);
    const auto counts = sorted_unique(o.counts);
    if (!(o.epsilon > 0.0)) throw PreconditionError("epsilon must be > 0");
    for (auto n : counts) {
        if (n == 0) throw PreconditionError("N must be at least 1");
        require_table_count(n);
    }
    Report r{Json{{"weight", o.weight}, {"N", counts}, {"epsilon", o.epsilon}, {"densities", o.densities}}, {}};
    struct Point {
        std::vector<Json> row;
        std::optional<Table> density;
    };
    auto points = parallel_map<Point>(ctx.threads, counts.size(), [&](std::size_t i) {
        const auto d = density(spec, counts[i]);
        const double log_tail = log_tail_mass(d, o.epsilon);
        const std::size_t peak = d.argmax_n();
        Point p{{counts[i], peak, d.frequency(peak), std::exp(log_tail), io::json_number(log_tail), d.total()}, {}};
        if (o.densities) p.density = io::density_table(d);
        return p;
    });
    Table summary{{"N", "argmax_n", "argmax_r", "tail_mass", "log_tail_mass", "total"}, {}};
    for (std::size_t i = 0; i < points.size(); ++i) {
        summary.add(points[i].row);
        if (points[i].density)
            r.artifacts.push_back({"freq-scan-density-N" + std::to_string(counts[i]), std::move(*points[i].density)});
    }
    r.artifacts.insert(r.artifacts.begin(), Artifact{"freq-scan", std::move(summary)});
    return r;
}

// ---- gauss-compare --------------------------------------------------------

struct GaussCompare {
    double weight = 0.3;
    std::size_t count = 10000;
    double sigmas = 3.0;
    std::size_t points = 61;
};

Report run_gauss_compare(const GaussCompare& o, const RunContext& ctx) {
    const auto spec = TwoLevelAmplitudes::from_weight(o.weight);
    if (spec.degenerate()) throw DegenerateSpecError("Gaussian limit needs 0 < |a| < 1");
    if (o.count == 0) throw PreconditionError("N must be at least 1");
    if (!(o.sigmas > 0.0)) throw PreconditionError("sigmas must be > 0");
    if (o.points < 2) throw PreconditionError("points must be at least 2");
    const double sigma = gaussian_sigma(spec, o.count);
    const double mean = spec.weight_up();
    auto rows = parallel_map<std::vector<Json>>(ctx.threads, o.points, [&](std::size_t i) {
        const double t = -o.sigmas + 2.0 * o.sigmas * static_cast<double>(i) / static_cast<double>(o.points - 1);
        const double target = std::clamp(mean + t * sigma, 0.5 / static_cast<double>(o.count),
                                          1.0 - 0.5 / static_cast<double>(o.count));
        const auto s = scaled_density(spec, o.count, target);
        const double g = gaussian_approx(spec, o.count, s.r);
        return std::vector<Json>{t, s.r, s.value, g, io::json_number(s.value / g)};
    });
    Table t{{"t_sigma", "r", "exact", "gaussian", "ratio"}, std::move(rows)};
    return {Json{{"weight", o.weight}, {"N", o.count}, {"sigmas", o.sigmas}, {"points", o.points}},
            {{"gauss-compare", std::move(t)}}};
}

// ---- pnorm ----------------------------------------------------------------

struct PNorm {
    std::vector<double> ps{1.0, 2.0, 4.0};
    std::vector<double> weights{0.3, 0.6};
    std::size_t count = 100000;
};

Report run_pnorm(const PNorm& o, const RunContext& ctx) {
    const auto ps = sorted_unique(o.ps);
    const auto weights = sorted_unique(o.weights);
    if (o.count == 0) throw PreconditionError("N must be at least 1");
    require_table_count(o.count);
    std::vector<PNormSpec> specs;
    std::vector<double> targets;
    for (double p : ps)
        for (double w : weights) {
            specs.push_back(PNormSpec::from_weight(w, p));
            targets.push_back(w);
        }
    auto rows = parallel_map<std::vector<Json>>(ctx.threads, specs.size(), [&](std::size_t i) {
        const auto d = pnorm_density(specs[i], o.count);
        const double w = targets[i];
        return std::vector<Json>{specs[i].p(), w, specs[i].a_mag(), specs[i].b_mag(), d.argmax_n(), d.argmax_r(),
                                 std::abs(d.argmax_r() - w)};
    });
    Table t{{"p", "weight", "a_mag", "b_mag", "argmax_n", "argmax_r", "abs_error"}, std::move(rows)};
    return {Json{{"p", ps}, {"weight", weights}, {"N", o.count}}, {{"pnorm", std::move(t)}}};
}

// ---- record ---------------------------------------------------------------

struct Record {
    std::size_t count = 100;
    double weight = 0.5;
    std::optional<std::uint64_t> trials;
};

Report run_record(const Record& o, const RunContext&) {
    require_table_count(o.count);
    const auto rec = record_distribution(TwoLevelAmplitudes::from_weight(o.weight), o.count, o.trials);
    Json cfg{{"N", o.count}, {"weight", o.weight}};
    cfg["trials"] = o.trials ? Json(*o.trials) : Json(nullptr);
    return {std::move(cfg), {{"record", io::record_table(rec)}}};
}

// ---- readoff --------------------------------------------------------------

struct ReadOff {
    std::string state;
    std::size_t factor = 0;
    bool up_count = false;
    double tolerance = 1e-12;
    std::optional<std::size_t> condition_factor;
    std::optional<std::size_t> condition_value;
};

Report run_readoff(const ReadOff& o, const RunContext&) {
    if (o.condition_factor.has_value() != o.condition_value.has_value())
        throw PreconditionError("--condition-factor and --condition-value go together");
    const std::string text = read_file(o.state);
    StateVector psi = io::parse_state(text);
    if (o.condition_factor) psi = slice(psi, *o.condition_factor, *o.condition_value);
    const NormDensity rho = o.up_count ? marginal_up_count(psi) : marginal_density(psi, o.factor);
    const auto result = read_off(rho, o.tolerance);

    Json cfg{{"state_file", o.state}, {"state_fnv1a64", io::fnv1a64(text)}};
    cfg["variable"] = o.up_count ? Json("up_count") : Json(o.factor);
    cfg["tolerance"] = o.tolerance;
    cfg["condition"] = o.condition_factor ? Json{{"factor", *o.condition_factor}, {"value", *o.condition_value}}
                                          : Json(nullptr);
    return {std::move(cfg),
            {{"readoff-marginal", io::norm_density_table(rho)},
             {"readoff", Json{{"total", io::json_number(rho.total)}, {"result", io::to_json(result)}}}}};
}

// ---- two-slit -------------------------------------------------------------

struct TwoSlit {
    std::vector<double> centers{-0.5, 0.5};
    double width = 1e4;
    double wavenumber = 10.0 * std::numbers::pi;
    std::vector<double> grid{-0.5, 0.4999, 10000};
    std::vector<double> overlaps{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    bool patterns = false;
};

Report run_two_slit(const TwoSlit& o, const RunContext& ctx) {
    if (o.centers.size() != 2) throw PreconditionError("--centers needs exactly two values");
    if (o.grid.size() != 3 || !(o.grid[2] >= 2.0) || o.grid[2] != std::floor(o.grid[2]))
        throw PreconditionError("--grid needs lo, hi and an integer point count >= 2");
    SlitModel m;
    m.slit_centers = {o.centers[0], o.centers[1]};
    m.packet_width = o.width;
    m.wavenumber = o.wavenumber;
    const auto points = static_cast<std::size_t>(o.grid[2]);
    if (points > kMaxTableCount) throw CapacityError("screen grid is too large");
    m.screen_grid = SlitModel::uniform_grid(o.grid[0], o.grid[1], points);
    m.validate();
    const auto overlaps = sorted_unique(o.overlaps);
    for (double g : overlaps) DetectorState{g}.validate();

    struct Point {
        std::vector<Json> row;
        std::optional<Table> pattern;
    };
    auto pts = parallel_map<Point>(ctx.threads, overlaps.size(), [&](std::size_t i) {
        const auto p = detector_pattern(m, DetectorState{overlaps[i]});
        const double v = visibility(p);
        Point out{{overlaps[i], v, std::abs(v - std::abs(overlaps[i]))}, {}};
        if (o.patterns) out.pattern = io::pattern_table(p);
        return out;
    });
    Report r{Json{{"centers", o.centers},
                  {"width", o.width},
                  {"wavenumber", o.wavenumber},
                  {"grid", Json{{"lo", o.grid[0]}, {"hi", o.grid[1]}, {"points", points}}},
                  {"overlaps", overlaps},
                  {"patterns", o.patterns}},
             {}};
    Table t{{"overlap", "visibility", "abs_error"}, {}};
    for (std::size_t i = 0; i < pts.size(); ++i) {
        t.add(pts[i].row);
        if (pts[i].pattern) r.artifacts.push_back({"two-slit-pattern-" + std::to_string(i), std::move(*pts[i].pattern)});
    }
    r.artifacts.insert(r.artifacts.begin(), Artifact{"two-slit", std::move(t)});
    return r;
}

// ---- cat ------------------------------------------------------------------

struct Cat {
    double weight = 0.5;
    double phase = 0.0;
};

Report run_cat(const Cat& o, const RunContext&) {
    if (!(o.weight >= 0.0 && o.weight <= 1.0) || !std::isfinite(o.phase))
        throw PreconditionError("cat needs weight in [0, 1] and a finite phase");
    const TwoLevelAmplitudes spec(std::polar(std::sqrt(o.weight), o.phase), std::sqrt(1.0 - o.weight));
    return {Json{{"weight", o.weight}, {"phase", o.phase}}, {{"cat", io::to_json(cat_analysis(spec))}}};
}

// ---- suppress -------------------------------------------------------------

struct Suppress {
    double overlap = 0.9;
    std::vector<std::size_t> factors{1, 10, 100, 1000};
};

Report run_suppress(const Suppress& o, const RunContext&) {
    const auto factors = sorted_unique(o.factors);
    if (!factors.empty() && factors.back() > kMaxTableCount) throw CapacityError("too many environment factors");
    Table t{{"factors", "value_re", "value_im", "modulus", "log_modulus"}, {}};
    for (std::size_t k : factors) {
        const auto s = environment_suppression(EnvironmentModel{std::vector<Amplitude>(k, o.overlap)});
        t.add({k, s.value.real(), s.value.imag(), std::abs(s.value), io::json_number(s.log_modulus)});
    }
    return {Json{{"overlap", o.overlap}, {"factors", factors}}, {{"suppress", std::move(t)}}};
}

// ---- branch ---------------------------------------------------------------

struct BranchOpts {
    std::string state;
    std::size_t pointer_factor = 0;
    double env_overlap = 0.9;
    std::size_t env_factors = 100;
    bool with_states = false;
};

Report run_branch(const BranchOpts& o, const RunContext&) {
    const std::string text = read_file(o.state);
    const auto psi = io::parse_state(text);
    if (o.env_factors > kMaxTableCount) throw CapacityError("too many environment factors");
    const auto set =
        branch_decompose(psi, o.pointer_factor, EnvironmentModel{std::vector<Amplitude>(o.env_factors, o.env_overlap)});
    return {Json{{"state_file", o.state},
                 {"state_fnv1a64", io::fnv1a64(text)},
                 {"pointer_factor", o.pointer_factor},
                 {"env_overlap", o.env_overlap},
                 {"env_factors", o.env_factors},
                 {"with_states", o.with_states}},
            {{"branch", io::to_json(set, o.with_states)}}};
}

// ---- oracle ---------------------------------------------------------------

struct Oracle {
    std::vector<double> weights{0.1, 0.25, 0.5, 0.7};
    std::vector<std::size_t> counts{2, 4, 8, 12, 16};
};

Report run_oracle(const Oracle& o, const RunContext& ctx) {
    const auto weights = sorted_unique(o.weights);
    const auto counts = sorted_unique(o.counts);
    struct Case {
        double weight;
        TwoLevelAmplitudes spec;
        std::size_t count;
    };
    std::vector<Case> cases;
    for (double w : weights)
        for (std::size_t n : counts) {
            if (n == 0) throw PreconditionError("N must be at least 1");
            if (n >= 64 || (std::size_t{1} << n) > kDefaultCapacity)
                throw CapacityError("explicit state for N = " + std::to_string(n) + " exceeds capacity");
            cases.push_back({w, TwoLevelAmplitudes::from_weight(w), n});
        }
    auto rows = parallel_map<std::vector<Json>>(ctx.threads, cases.size(), [&](std::size_t i) {
        const auto& [weight, spec, count] = cases[i];
        const auto psi = repeat_state(spec, count);
        std::vector<std::vector<double>> groups(count + 1);
        for (std::size_t k = 0; k < psi.size(); ++k) groups[up_count(psi.label_of(k))].push_back(std::norm(psi[k]));
        const auto d = density(spec, count);
        double worst = 0.0;
        for (std::size_t n = 0; n <= count; ++n)
            worst = std::max(worst, std::abs(d.rho(n) - numeric::exact_sum(groups[n])));
        const double dev = freq_deviation_norm(spec, count) * static_cast<double>(count);
        return std::vector<Json>{weight, count, worst,
                                 std::abs(dev - spec.weight_up() * spec.weight_down())};
    });
    Table t{{"weight", "N", "max_density_diff", "deviation_law_diff"}, std::move(rows)};
    return {Json{{"weight", weights}, {"N", counts}}, {{"oracle", std::move(t)}}};
}

template <class Opts>
Command make(CLI::App& app, const std::string& name, const std::string& help,
             std::function<void(CLI::App&, Opts&)> bind, Report (*run)(const Opts&, const RunContext&)) {
    auto opts = std::make_shared<Opts>();
    CLI::App* sub = app.add_subcommand(name, help);
    bind(*sub, *opts);
    return {sub, [opts, run](const RunContext& ctx) { return run(*opts, ctx); }};
}

} // namespace

std::vector<Command> register_commands(CLI::App& app) {
    std::vector<Command> cmds;
    cmds.push_back(make<FreqScan>(app, "freq-scan", "Frequency density, tail mass and argmax over an N sweep",
        [](CLI::App& s, FreqScan& o) {
            s.add_option("--weight", o.weight, "|a|^2")->capture_default_str();
            s.add_option("--N", o.counts, "Repetition counts")->delimiter(',')->capture_default_str();
            s.add_option("--epsilon", o.epsilon, "Tail half-width around |a|^2")->capture_default_str();
            s.add_flag("--densities", o.densities, "Also write the full density table per N");
        },
        run_freq_scan));
    cmds.push_back(make<GaussCompare>(app, "gauss-compare", "Exact scaled density against its Gaussian limit",
        [](CLI::App& s, GaussCompare& o) {
            s.add_option("--weight", o.weight, "|a|^2")->capture_default_str();
            s.add_option("--N", o.count, "Repetition count")->capture_default_str();
            s.add_option("--sigmas", o.sigmas, "Half range in standard deviations")->capture_default_str();
            s.add_option("--points", o.points, "Sample points")->capture_default_str();
        },
        run_gauss_compare));
    cmds.push_back(make<PNorm>(app, "pnorm", "Peak of the p-norm frequency density",
        [](CLI::App& s, PNorm& o) {
            s.add_option("--p", o.ps, "Norm exponents")->delimiter(',')->capture_default_str();
            s.add_option("--weight", o.weights, "a_mag^p values")->delimiter(',')->capture_default_str();
            s.add_option("--N", o.count, "Repetition count")->capture_default_str();
        },
        run_pnorm));
    cmds.push_back(make<Record>(app, "record", "Relative frequency of each N-measurement record",
        [](CLI::App& s, Record& o) {
            s.add_option("--N", o.count, "Measurements per record")->capture_default_str();
            s.add_option("--weight", o.weight, "|a|^2")->capture_default_str();
            s.add_option("--trials", o.trials, "Number of repeated records; adds expected counts");
        },
        run_record));
    cmds.push_back(make<ReadOff>(app, "readoff", "Marginal density and read-off for a stored state",
        [](CLI::App& s, ReadOff& o) {
            s.add_option("--state", o.state, "State JSON file {\"dims\": [...], \"amps\": [[re, im], ...]}")
                ->required();
            s.add_option("--factor", o.factor, "Factor whose label is read")->capture_default_str();
            s.add_flag("--up-count", o.up_count, "Read the number of up factors instead");
            s.add_option("--tolerance", o.tolerance, "Mass allowed off the peak, relative to the total")
                ->capture_default_str();
            s.add_option("--condition-factor", o.condition_factor, "Factor to condition on");
            s.add_option("--condition-value", o.condition_value, "Label of the conditioning factor");
        },
        run_readoff));
    cmds.push_back(make<TwoSlit>(app, "two-slit", "Screen patterns and visibility against detector overlap",
        [](CLI::App& s, TwoSlit& o) {
            s.add_option("--centers", o.centers, "Slit centres")->delimiter(',')->capture_default_str();
            s.add_option("--width", o.width, "Packet width")->capture_default_str();
            s.add_option("--wavenumber", o.wavenumber, "Far-field phase per unit centre per unit x")
                ->capture_default_str();
            s.add_option("--grid", o.grid, "lo,hi,points")->delimiter(',')->capture_default_str();
            s.add_option("--overlaps", o.overlaps, "Detector overlaps <D1|D2>")->delimiter(',')->capture_default_str();
            s.add_flag("--patterns", o.patterns, "Also write the screen pattern per overlap");
        },
        run_two_slit));
    cmds.push_back(make<Cat>(app, "cat", "Pointer and mixed expansions of the cat state",
        [](CLI::App& s, Cat& o) {
            s.add_option("--weight", o.weight, "|a|^2")->capture_default_str();
            s.add_option("--phase", o.phase, "Phase of a in radians")->capture_default_str();
        },
        run_cat));
    cmds.push_back(make<Suppress>(app, "suppress", "Interference suppression by environment overlaps",
        [](CLI::App& s, Suppress& o) {
            s.add_option("--overlap", o.overlap, "Per-factor overlap")->capture_default_str();
            s.add_option("--factors", o.factors, "Environment sizes")->delimiter(',')->capture_default_str();
        },
        run_suppress));
    cmds.push_back(make<BranchOpts>(app, "branch", "Branch decomposition of a stored state",
        [](CLI::App& s, BranchOpts& o) {
            s.add_option("--state", o.state, "State JSON file")->required();
            s.add_option("--pointer-factor", o.pointer_factor, "Factor holding the pointer")->capture_default_str();
            s.add_option("--env-overlap", o.env_overlap, "Per-factor environment overlap")->capture_default_str();
            s.add_option("--env-factors", o.env_factors, "Environment size")->capture_default_str();
            s.add_flag("--with-states", o.with_states, "Include branch amplitudes");
        },
        run_branch));
    cmds.push_back(make<Oracle>(app, "oracle", "Explicit-state cross-check of the frequency tables",
        [](CLI::App& s, Oracle& o) {
            s.add_option("--weight", o.weights, "|a|^2 values")->delimiter(',')->capture_default_str();
            s.add_option("--N", o.counts, "Repetition counts")->delimiter(',')->capture_default_str();
        },
        run_oracle));
    return cmds;
}

Json write_report(const std::string& experiment, const Report& report, const RunContext& ctx) {
    const Json header{{"version", kVersion}, {"experiment", experiment}, {"config", report.config}};
    const std::vector<std::string> comments{std::string("qfreq ") + std::string(kVersion),
                                            "experiment " + experiment, "config " + report.config.dump()};
    std::filesystem::create_directories(ctx.out_dir);
    Json files = Json::array();
    auto save = [&](const std::string& name, const std::string& bytes) {
        std::ofstream out(ctx.out_dir / name, std::ios::binary);
        out << bytes;
        out.close();
        if (!out) throw std::runtime_error("cannot write " + (ctx.out_dir / name).string());
    };
    auto emit = [&](const std::string& name, const std::string& bytes) {
        save(name, bytes);
        files.push_back(Json{{"name", name}, {"bytes", bytes.size()}, {"fnv1a64", io::fnv1a64(bytes)}});
    };
    for (const auto& a : report.artifacts) {
        if (const auto* table = std::get_if<Table>(&a.body)) {
            if (ctx.format == "json") {
                Json doc = header;
                doc["table"] = io::to_json(*table);
                emit(a.stem + ".json", doc.dump(2) + "\n");
            } else {
                std::ostringstream os;
                io::write_csv(os, *table, comments);
                emit(a.stem + ".csv", os.str());
            }
        } else {
            Json doc = header;
            doc["result"] = std::get<Json>(a.body);
            emit(a.stem + ".json", doc.dump(2) + "\n");
        }
    }
    Json manifest = header;
    manifest["files"] = std::move(files);
    save(experiment + ".manifest.json", manifest.dump(2) + "\n");
    return manifest;
}

} // namespace qfreq::cli
