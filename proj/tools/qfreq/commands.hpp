#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "qfreq/io.hpp"

namespace qfreq::cli {

struct RunContext {
    std::filesystem::path out_dir;
    unsigned threads = 1;
    std::string format = "csv"; // csv or json, for tabular outputs
};

// One output file before it is written: either a table or a JSON document.
struct Artifact {
    std::string stem;
    std::variant<io::Table, io::Json> body;
};

struct Report {
    io::Json config; // resolved parameters that affect the results
    std::vector<Artifact> artifacts;
};

struct Command {
    CLI::App* app;
    std::function<Report(const RunContext&)> run;
};

std::vector<Command> register_commands(CLI::App& app);

// Writes every artifact plus <experiment>.manifest.json and returns the
// manifest.
io::Json write_report(const std::string& experiment, const Report& report, const RunContext& ctx);

} // namespace qfreq::cli
