// Command-line front end: runs the numerical check suites, emits operator
// matrices for named generators, and lists the available suites.
//
// Exit codes: 0 success, 1 suite failure or internal error, 2 invalid
// configuration. Invalid configurations print a machine-readable error
// record (see error_line) to stderr.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ospfock/fock.hpp"
#include "ospfock/reporting.hpp"
#include "ospfock/suites.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfigError = 2;

struct CommonFlags {
    std::string config_path;
    std::uint64_t seed = 0;
    int fermionic_modes = 0;
    int bosonic_modes = 0;
    int degree_cap = 0;
    std::string output_dir;
};

void add_common_flags(CLI::App* cmd, CommonFlags* flags) {
    cmd->add_option("--config", flags->config_path,
                    "JSON configuration file");
    cmd->add_option("--seed", flags->seed,
                    "random seed (required by every suite)");
    cmd->add_option("--fermionic-modes", flags->fermionic_modes,
                    "fermionic mode count of the one-particle space");
    cmd->add_option("--bosonic-modes", flags->bosonic_modes,
                    "bosonic mode count of the one-particle space");
    cmd->add_option("--degree-cap", flags->degree_cap,
                    "total-degree truncation of the oscillator space");
    cmd->add_option("--output", flags->output_dir,
                    "output directory (overrides OSPFOCK_OUTPUT_DIR and the "
                    "config file)");
}

/// Builds the effective config: defaults < config file < OSPFOCK_OUTPUT_DIR
/// < command-line flags.
ospfock::RunConfig effective_config(const CLI::App* cmd,
                                    const CommonFlags& flags) {
    ospfock::RunConfig cfg;
    if (cmd->count("--config") > 0) {
        std::ifstream stream(flags.config_path, std::ios::binary);
        if (!stream.good()) {
            throw ospfock::ConfigError("cannot read config file '" +
                                       flags.config_path + "'");
        }
        std::ostringstream text;
        text << stream.rdbuf();
        cfg = ospfock::parse_config_json(text.str());
    }
    if (const char* env = std::getenv("OSPFOCK_OUTPUT_DIR")) {
        if (*env != '\0') cfg.output_dir = env;
    }
    if (cmd->count("--seed") > 0) {
        cfg.seed = flags.seed;
        cfg.seed_set = true;
    }
    if (cmd->count("--fermionic-modes") > 0) {
        cfg.fermionic_modes = flags.fermionic_modes;
    }
    if (cmd->count("--bosonic-modes") > 0) {
        cfg.bosonic_modes = flags.bosonic_modes;
    }
    if (cmd->count("--degree-cap") > 0) cfg.degree_cap = flags.degree_cap;
    if (cmd->count("--output") > 0) cfg.output_dir = flags.output_dir;
    return cfg;
}

int run_command(const CLI::App* cmd, const CommonFlags& flags,
                const std::vector<std::string>& suites,
                const std::vector<std::string>& formats) {
    ospfock::RunConfig cfg = effective_config(cmd, flags);
    if (!suites.empty()) cfg.suites = suites;
    if (!formats.empty()) cfg.formats = formats;

    const ospfock::RunOutput output = ospfock::run_all(cfg);
    const std::vector<std::string> files =
        ospfock::write_outputs(cfg, output);
    for (const std::string& f : files) {
        std::cout << "wrote "
                  << (std::filesystem::path(cfg.output_dir) / f).string()
                  << "\n";
    }
    int total = 0, failed = 0;
    for (const ospfock::SuiteResult& s : output.suites) {
        total += static_cast<int>(s.reports.size());
        failed += s.failed_count();
    }
    std::cout << (output.passed ? "PASS" : "FAIL") << " " << total
              << " reports, " << failed << " failed, config "
              << ospfock::config_hash(cfg) << "\n";
    return output.passed ? kExitPass : kExitFailure;
}

int emit_matrix_command(const CLI::App* cmd, const CommonFlags& flags,
                        const std::string& generator) {
    ospfock::RunConfig cfg = effective_config(cmd, flags);
    if (cfg.fermionic_modes < 1 || cfg.bosonic_modes < 1) {
        throw ospfock::ConfigError(
            "the one-particle space needs at least one fermionic and one "
            "bosonic mode");
    }
    if (cfg.degree_cap < 0) {
        throw ospfock::ConfigError("degree_cap must be non-negative");
    }
    if (generator.rfind("random-", 0) == 0 && !cfg.seed_set) {
        throw ospfock::ConfigError("generator '" + generator +
                                   "' is seed-derived; pass --seed");
    }
    const ospfock::TruncatedSpace one(cfg.fermionic_modes, cfg.bosonic_modes);
    const ospfock::CentralElement gen =
        ospfock::find_generator(one, cfg.seed, generator);
    const ospfock::FockSpace fock(one, cfg.degree_cap);
    const std::string text =
        ospfock::serialize_fock_operator(fock, ospfock::rho_full(fock, gen));

    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    const fs::path path = fs::path(cfg.output_dir) / (generator + ".triplets");
    std::ofstream stream(path, std::ios::binary | std::ios::trunc);
    stream.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!stream.good()) {
        throw std::runtime_error("failed to write " + path.string());
    }
    std::cout << "wrote " << path.string() << "\n";
    return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Finite truncations of the restricted orthosymplectic superalgebra: "
        "check suites, oscillator matrices, counterexample profiles"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    std::vector<std::string> suites;
    std::vector<std::string> formats;
    CLI::App* run = app.add_subcommand("run", "run the check suites");
    add_common_flags(run, &run_flags);
    run->add_option("--suite", suites,
                    "suite selection (repeatable; default: all)");
    run->add_option("--format", formats,
                    "output formats: csv json records (repeatable)");

    CommonFlags emit_flags;
    std::string generator;
    CLI::App* emit = app.add_subcommand(
        "emit-matrix",
        "write the sparse oscillator matrix of a named generator");
    add_common_flags(emit, &emit_flags);
    emit->add_option("--generator", generator, "generator name")->required();

    CLI::App* list =
        app.add_subcommand("list-suites", "list the available suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << ospfock::error_line("config", e.what()) << "\n";
        return kExitConfigError;
    }

    try {
        if (list->parsed()) {
            for (const std::string& name : ospfock::all_suite_names()) {
                std::cout << name << "\n";
            }
            return kExitPass;
        }
        if (run->parsed()) return run_command(run, run_flags, suites, formats);
        if (emit->parsed()) {
            return emit_matrix_command(emit, emit_flags, generator);
        }
    } catch (const ospfock::ConfigError& e) {
        std::cerr << ospfock::error_line("config", e.what()) << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << ospfock::error_line("internal", e.what()) << "\n";
        return kExitFailure;
    }
    return kExitConfigError;
}
