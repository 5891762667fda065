#include <cstdlib>
#include <iostream>
#include <string>

#include "commands.hpp"
#include "qfreq/qfreq.hpp"

namespace {

enum Exit { kOk = 0, kConfigError = 2, kPrecondition = 3, kCapacity = 4 };

int fail(int code, const std::string& kind, const std::string& message) {
    std::cerr << qfreq::io::Json{{"error", kind}, {"exit_code", code}, {"message", message}}.dump() << '\n';
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app("Relative-frequency, read-off and decoherence experiments on finite quantum states.", "qfreq");
    app.set_version_flag("--version", std::string(qfreq::kVersion));
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_config("--config", "", "TOML file with [<experiment>] sections; command-line flags win");
    app.fallthrough();
    app.require_subcommand(1);

    qfreq::cli::RunContext ctx;
    std::string out_dir;
    app.add_option("--out-dir", out_dir, "Output directory (default: current directory)")
        ->envname("QFREQ_OUT_DIR")
        ->configurable(false);
    app.add_option("--threads", ctx.threads, "Worker threads for sweeps; does not change the output")
        ->check(CLI::Range(1u, 1024u));
    app.add_option("--format", ctx.format, "Format of tabular outputs")->check(CLI::IsMember({"csv", "json"}));

    const auto commands = qfreq::cli::register_commands(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(kConfigError, "config", e.what());
    }
    ctx.out_dir = out_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(out_dir);

    try {
        for (const auto& c : commands) {
            if (!c.app->parsed()) continue;
            const auto report = c.run(ctx);
            std::cout << qfreq::cli::write_report(c.app->get_name(), report, ctx).dump(2) << '\n';
        }
    } catch (const qfreq::io::FormatError& e) {
        return fail(kConfigError, "format", e.what());
    } catch (const qfreq::CapacityError& e) {
        return fail(kCapacity, "capacity", e.what());
    } catch (const qfreq::PreconditionError& e) {
        return fail(kPrecondition, "precondition", e.what());
    } catch (const std::exception& e) {
        return fail(kConfigError, "config", e.what());
    }
    return kOk;
}
