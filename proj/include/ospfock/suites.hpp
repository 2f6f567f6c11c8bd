#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ospfock/fock.hpp"
#include "ospfock/osp.hpp"
#include "ospfock/reporting.hpp"
#include "ospfock/verify.hpp"

namespace ospfock {

/// Pinned numeric gates for the run-level check suites. Every gate is part
/// of the run configuration, participates in the config hash, and appears
/// verbatim in the emitted report records.
struct SuiteTolerances {
    double bracket_identity = 1e-9;     ///< Jacobi / cocycle / scalar-match
    double hermiticity = 1e-10;         ///< skew- or phase-Hermitian defects
    double square = 1e-9;               ///< odd square identity (interior)
    double off_scalar = 1e-8;           ///< commutator defect scalarness
    double kappa_spread = 1e-6;         ///< relative std of the fitted kappa
    double conjugacy = 1e-7;            ///< exponential-conjugation residual
    double orbit_slack = 1e-12;         ///< series vs dense exponential slack
    double bch_slope_min = 4.5;         ///< order-4 combination error slope
    double interpolation_slack = 1e-12; ///< allowed bound violation
    double moment_relative = 1e-6;      ///< closed-form moment agreement
    double domination = 1e-8;           ///< analytic norm-series bound slack
    double divergence_threshold = 1e6;  ///< witness integral must exceed this
    double closure = 1e-8;              ///< restriction bracket-closure fit
};

/// One run of the checker: truncation sizes, seed, suite selection, output
/// destination and formats. `seed_set` records whether the seed was given
/// explicitly; every suite draws random samples, so running any suite
/// without an explicit seed is a configuration error.
struct RunConfig {
    int fermionic_modes = 2;
    int bosonic_modes = 2;
    int degree_cap = 8;
    bool seed_set = false;
    std::uint64_t seed = 0;
    std::vector<std::string> suites;  ///< empty = all suites
    std::string output_dir = "ospfock-reports";
    std::vector<std::string> formats = {"csv", "json", "records"};
    SuiteTolerances tolerances;
};

/// Invalid configuration. The message doubles as the machine-readable error
/// record body (see error_line in reporting.hpp).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The five suite names, sorted.
const std::vector<std::string>& all_suite_names();

/// Suites that compare operator compositions on the safe interior and
/// therefore need degree_cap >= 6.
bool suite_needs_interior(std::string_view name);

/// Returns the selected suites (config order preserved; empty selection
/// expands to all suites). Throws ConfigError on unknown or duplicate names.
std::vector<std::string> selected_suites(const RunConfig&);

/// Full validation; throws ConfigError with a specific message. A selection
/// that includes an interior suite with degree_cap <= 4 reports
/// "no safe interior".
void validate_config(const RunConfig&);

/// Strict JSON parsing: unknown keys, wrong types, or malformed JSON throw
/// ConfigError. Missing keys keep their defaults; a present "seed" key sets
/// seed_set.
RunConfig parse_config_json(const std::string& text);

/// Deterministic key=value rendering of the mathematical content of the
/// config: modes, cap, seed, sorted suites, and all tolerances. The output
/// directory and format selection are excluded on purpose, so the hash
/// identifies what was computed, not where it was written.
std::string canonical_config_text(const RunConfig&);

/// fnv1a64_hex of canonical_config_text.
std::string config_hash(const RunConfig&);

/// Named generator table used by the suites and by matrix emission:
///   central            pure central element (z = 1, zero body)
///   uniform-rotation   complex-linear i*Identity (equal-speed rotation)
///   even-k / odd-k     leading projector basis elements of each parity
///   random-even/odd    seeded certified Gaussian draws
/// Deterministic given the truncation and seed.
std::vector<std::pair<std::string, CentralElement>> generator_table(
    const TruncatedSpace&, std::uint64_t seed);

/// Table lookup; throws ConfigError listing the known names.
CentralElement find_generator(const TruncatedSpace&, std::uint64_t seed,
                              const std::string& name);

/// Everything one suite produced: pass/fail records plus CSV tables.
struct SuiteResult {
    std::string name;
    std::vector<IdentityReport> reports;
    std::vector<CsvTable> tables;

    int failed_count() const;
    bool passed() const { return failed_count() == 0; }
};

/// Runs one named suite. Assumes a validated config.
SuiteResult run_suite(const std::string& name, const RunConfig&);

/// Rendered artifacts of a full run, assembled in suite-name order.
struct RunOutput {
    std::vector<SuiteResult> suites;   ///< sorted by suite name
    std::string records_text;          ///< line-delimited report records
    std::string summary_json_text;     ///< ordered JSON summary
    std::vector<CsvTable> tables;      ///< all tables, sorted by name
    bool passed = false;
};

/// Validates, runs the selected suites concurrently, and renders all
/// artifacts in memory (single-writer assembly, ordered by suite name).
RunOutput run_all(const RunConfig&);

/// Writes the artifacts selected by config.formats into config.output_dir
/// (created if missing): reports.records, summary.json, <table>.csv.
/// Returns the file names written, sorted. Throws std::runtime_error on
/// filesystem failures.
std::vector<std::string> write_outputs(const RunConfig&, const RunOutput&);

}  // namespace ospfock
