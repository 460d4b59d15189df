#pragma once

// The three command workflows behind the CLI. Each returns a process exit
// code; configuration problems surface as exceptions (ConfigError,
// std::invalid_argument, UnsupportedInstance) for the caller to map.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "randomkit/config.hpp"
#include "randomkit/procedure.hpp"

namespace randomkit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailure = 1;
inline constexpr int kExitUsage = 2;

struct SequenceRequest {
    ProcedureConfig cfg;
    int n = 0;
    std::uint64_t seed = kDefaultSeed;
    std::optional<std::filesystem::path> output_dir;
    OutputFormat format = OutputFormat::Csv;
};

/// Generates one sequence, prints the assignment/probability table and, with
/// an output directory, writes sequence_assignments.csv and
/// sequence_probabilities.csv (or sequence.json).
int cmd_sequence(const SequenceRequest& req, std::ostream& out);

/// Simulates every procedure, checks the structural invariants, and writes
/// one file per requested metric plus run_meta.json (and SVGs when asked).
/// Returns kExitValidationFailure when an invariant is violated.
int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

struct ValidateRequest {
    ProcedureConfig cfg;
    int n = 0;
    int nsim = 0;
    std::uint64_t seed = kDefaultSeed;
    int threads = 0;
    double z_limit = 4.0;
    std::optional<std::filesystem::path> output_dir;
};

/// Compares a simulation against the exact oracle and prints the JSON
/// report. Throws UnsupportedInstance when the instance exceeds the oracle
/// limits.
int cmd_validate(const ValidateRequest& req, std::ostream& out);

}  // namespace randomkit
