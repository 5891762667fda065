#pragma once

// Text formats: StateVector JSON, the CSV tables, and the JSON reports.
//
// CSV files use '.' as decimal separator, '\n' line endings and 17
// significant digits, so identical inputs give identical bytes. Lines
// starting with '#' are comments carrying provenance.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "qfreq/decoherence.hpp"
#include "qfreq/errors.hpp"
#include "qfreq/frequency.hpp"
#include "qfreq/readoff.hpp"
#include "qfreq/state.hpp"

namespace qfreq::io {

using Json = nlohmann::ordered_json;

// Malformed input document.
class FormatError : public Error {
public:
    using Error::Error;
};

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// JSON cannot hold infinities; they are written as strings.
inline Json json_number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

inline Json to_json(Amplitude z) { return Json::array({json_number(z.real()), json_number(z.imag())}); }

inline Json to_json(const StateVector& s) {
    Json amps = Json::array();
    for (const auto& z : s.amps()) amps.push_back(to_json(z));
    return Json{{"dims", s.dims()}, {"amps", std::move(amps)}};
}

inline StateVector state_from_json(const Json& j) {
    try {
        if (!j.is_object() || !j.contains("dims") || !j.contains("amps"))
            throw FormatError("state JSON needs \"dims\" and \"amps\"");
        const auto dims = j.at("dims").get<std::vector<std::size_t>>();
        std::vector<Amplitude> amps;
        for (const auto& pair : j.at("amps")) {
            if (!pair.is_array() || pair.size() != 2) throw FormatError("each amplitude must be [re, im]");
            amps.emplace_back(pair[0].get<double>(), pair[1].get<double>());
        }
        return {dims, std::move(amps)};
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("invalid state JSON: ") + e.what());
    }
}

inline StateVector parse_state(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("cannot parse state JSON: ") + e.what());
    }
    return state_from_json(j);
}

inline void write_comments(std::ostream& os, std::span<const std::string> comments) {
    for (const auto& c : comments) os << "# " << c << '\n';
}

// Rows of JSON scalars: floats, integers or strings. Written either as CSV
// or as {"columns": [...], "rows": [[...], ...]}.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Json>> rows;

    void add(std::vector<Json> row) {
        if (row.size() != columns.size()) throw Error("table row has the wrong number of cells");
        rows.push_back(std::move(row));
    }
};

inline std::string cell_text(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) return format_double(v.get<double>());
    return v.dump();
}

inline void write_csv(std::ostream& os, const Table& t, std::span<const std::string> comments = {}) {
    write_comments(os, comments);
    for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << cell_text(row[c]);
        os << '\n';
    }
}

inline Json to_json(const Table& t) { return Json{{"columns", t.columns}, {"rows", t.rows}}; }

// n, r = n/N, log value, value, running sum of values.
inline Table log_table(std::span<const double> log_values, std::size_t count, const std::string& log_name,
                       const std::string& value_name) {
    Table t{{"n", "r", log_name, value_name, "cumulative"}, {}};
    double cumulative = 0.0;
    for (std::size_t n = 0; n < log_values.size(); ++n) {
        const double v = std::exp(log_values[n]);
        cumulative += v;
        t.add({n, static_cast<double>(n) / static_cast<double>(count), json_number(log_values[n]), v, cumulative});
    }
    return t;
}

inline Table density_table(const FrequencyDensity& d) { return log_table(d.log_rho, d.count, "log_rho", "rho"); }

inline Table density_table(const PNormDensity& d) { return log_table(d.log_rho, d.count, "log_rho", "rho"); }

// With a trial count the table gains an expected_count column.
inline Table record_table(const RecordDistribution& d) {
    Table t = log_table(d.log_record, d.count, "log_R", "R");
    if (d.trials) {
        t.columns.push_back("expected_count");
        for (std::size_t n = 0; n < t.rows.size(); ++n) t.rows[n].push_back(*d.expected_count(n));
    }
    return t;
}

inline Table norm_density_table(const NormDensity& rho) {
    Table t{{"q_label", "mass", "fraction"}, {}};
    for (std::size_t i = 0; i < rho.size(); ++i) t.add({rho.labels[i], rho.mass[i], rho.fraction(i)});
    return t;
}

inline Table pattern_table(const InterferencePattern& p) {
    Table t{{"x", "amp1_re", "amp1_im", "amp2_re", "amp2_im", "intensity"}, {}};
    for (std::size_t i = 0; i < p.x.size(); ++i)
        t.add({p.x[i], p.amp1[i].real(), p.amp1[i].imag(), p.amp2[i].real(), p.amp2[i].imag(), p.intensity[i]});
    return t;
}

inline void write_density_csv(std::ostream& os, const FrequencyDensity& d, std::span<const std::string> comments = {}) {
    write_csv(os, density_table(d), comments);
}

inline void write_density_csv(std::ostream& os, const PNormDensity& d, std::span<const std::string> comments = {}) {
    write_csv(os, density_table(d), comments);
}

inline void write_record_csv(std::ostream& os, const RecordDistribution& d, std::span<const std::string> comments = {}) {
    write_csv(os, record_table(d), comments);
}

inline void write_norm_density_csv(std::ostream& os, const NormDensity& rho, std::span<const std::string> comments = {}) {
    write_csv(os, norm_density_table(rho), comments);
}

inline void write_pattern_csv(std::ostream& os, const InterferencePattern& p, std::span<const std::string> comments = {}) {
    write_csv(os, pattern_table(p), comments);
}

inline Json to_json(const ReadOffResult& r) {
    Json j;
    j["kind"] = r.determined() ? "Determined" : "Indeterminate";
    if (r.value) j["value"] = *r.value;
    if (!r.determined()) {
        Json support = Json::array();
        for (const auto& s : r.support) support.push_back(Json{{"label", s.label}, {"mass", json_number(s.mass)}});
        j["support"] = std::move(support);
    }
    j["tolerance_used"] = json_number(r.tolerance_used);
    j["outside_mass"] = json_number(r.outside_mass);
    return j;
}

inline Json to_json(const BranchSet& b, bool with_states = false) {
    Json branches = Json::array();
    for (const auto& br : b.branches) {
        Json e{{"label", br.pointer_label}, {"weight", json_number(br.weight)}};
        if (with_states) e["state"] = to_json(br.state);
        branches.push_back(std::move(e));
    }
    Json overlaps = Json::array();
    for (const auto& row : b.cross_overlaps) {
        Json r = Json::array();
        for (const auto& z : row) r.push_back(to_json(z));
        overlaps.push_back(std::move(r));
    }
    return Json{{"pointer_factor", b.pointer_factor},
                {"total", json_number(b.total)},
                {"branches", std::move(branches)},
                {"cross_overlaps", std::move(overlaps)}};
}

inline Json to_json(const ProbeAmplitudes& p) {
    return Json{{"pointer_terms", Json::array({to_json(p.pointer_terms[0]), to_json(p.pointer_terms[1])})},
                {"pointer_total", to_json(p.pointer_total)},
                {"mixed_terms", Json::array({to_json(p.mixed_terms[0]), to_json(p.mixed_terms[1])})},
                {"mixed_total", to_json(p.mixed_total)}};
}

inline Json to_json(const CatReport& c) {
    return Json{{"state", to_json(c.state)},
                {"expansion_mismatch", json_number(c.expansion_mismatch)},
                {"decayed_alive", to_json(c.decayed_alive)},
                {"rotated_probe", to_json(c.rotated_probe)}};
}

// 64-bit FNV-1a, hex encoded. Used as a content checksum in sidecars.
inline std::string fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

} // namespace qfreq::io
