#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ergo/averages.hpp"
#include "ergo/observables.hpp"
#include "ergo/systems.hpp"

namespace ergo {

inline constexpr i64 kConfigVersion = 1;

enum class RunKind {
    Average,
    Gowers,
    Scan,
    Behrend,
    Counterexample,
    Cube,
    Weyl,
    Multicorrelation,
};

const char* run_kind_name(RunKind k);
RunKind run_kind_from_name(const std::string& name);  // throws ParseError

/// One experiment, fully described.  Parsed from a JSON document whose keys
/// are all validated (unknown keys rejected, version pinned); the canonical
/// serialization writes every torus coordinate as its raw 64-bit hex lattice
/// value, so parse(emit(parse(text))) reproduces the config exactly.
struct ExperimentConfig {
    i64 version = kConfigVersion;
    RunKind kind = RunKind::Average;

    std::optional<SystemSpec> system;     // kinds that act on a system
    std::vector<Observable> observables;  // average / cube / multicorrelation
    std::optional<SetSpec> set;           // scan / cube / multicorrelation
    std::vector<std::vector<i64>> pattern;  // average: exponent polynomials (empty = linear)

    i64 N = 1000;         // orbit / average length
    i64 horizon = 1000;   // scan range
    i64 M = 4096;         // quadrature grid points per axis
    i64 k = 1;            // order (intersections, cube dimension, norm order)
    i64 n_max = 64;       // multicorrelation window
    i64 L = 16;           // behrend / counterexample scale
    i64 sup_horizon = 64; // counterexample direct-scan range
    double eps = 0.01;    // scan tolerance
    u64 seed = 0;         // RNG seed for generated inputs
    std::vector<i64> xi;  // weyl frequency vector (empty = all ones)
    std::vector<std::array<double, 2>> signal;  // gowers: explicit [re, im] values (empty = random)
    bool require_pass = false;  // demand the experiment's pass flag (exit 2 otherwise)
};

/// Parse and validate.  Throws ParseError whose message itemizes every
/// detected problem, one per line, each prefixed with the 1-based line of the
/// offending key in the input text (line 0 when no position is known).
ExperimentConfig parse_config(const std::string& text);

/// Canonical JSON serialization: fixed key order, defaults filled, torus
/// coordinates in raw hex.
std::string emit_config(const ExperimentConfig& cfg);

/// FNV-1a (64-bit) over the canonical serialization bytes.
u64 config_hash(const ExperimentConfig& cfg);

/// Finished experiment: pre-formatted cells (floating point rendered with 17
/// significant digits) so that csv and json emissions are byte-stable.
struct RunRecord {
    std::string kind;
    u64 hash = 0;
    std::string library_version = kLibraryVersion;
    double wall_ms = 0.0;  // reported on stderr only, never part of the emitted bytes
    bool pass = true;
    bool require_pass = false;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::pair<std::string, std::string>> summary;
};

/// Execute the experiment.  Library errors propagate with the experiment kind
/// prefixed to the message.
RunRecord run_experiment(const ExperimentConfig& cfg, int threads = 1);

enum class OutputFormat { Csv, Json };
OutputFormat format_from_name(const std::string& name);  // throws ParseError

/// Render the record.  Csv: '#'-prefixed metadata and summary lines, then a
/// header row and the data rows.  Json: one object with the same content.
/// Identical records produce identical bytes.
std::string emit_record(const RunRecord& rec, OutputFormat format);

/// %.17g rendering used for every floating-point cell.
std::string format_float(double v);

/// The all-zero phase point of a system (origin of each torus factor,
/// residue 0 on cyclic factors).
PhasePoint zero_point(const SystemSpec& sys);

}  // namespace ergo
