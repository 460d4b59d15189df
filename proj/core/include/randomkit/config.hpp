#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "randomkit/metrics.hpp"
#include "randomkit/procedure.hpp"
#include "randomkit/rng.hpp"

namespace randomkit {

/// Configuration problem; what() starts with the offending field path,
/// e.g. "procedures[1].params.p: must lie in (0.5, 1]".
class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& path, const std::string& message)
        : std::invalid_argument(path.empty() ? message : path + ": " + message), path_(path) {}

    const std::string& path() const { return path_; }

private:
    std::string path_;
};

enum class OutputFormat { Csv, Json };

struct RunConfig {
    std::vector<ProcedureConfig> procedures;
    int n = 0;
    int nsim = 0;
    std::uint64_t seed = kDefaultSeed;
    std::vector<std::string> metrics;
    std::filesystem::path output_dir = "randomkit-out";
    bool emit_plots = false;
    int threads = 0;
    OutputFormat format = OutputFormat::Csv;
    BrtNormalization brt_normalization = BrtNormalization::Absolute;
};

/// Parses and validates a JSON run configuration:
///
///   {
///     "procedures": [{"kind": "BSD", "params": {"b": 3}, "w": [1, 1]}, ...],
///     "w": [1, 1],            // default target for procedures without one
///     "n": 40, "nsim": 10000,
///     "seed": 314159,         // optional
///     "metrics": ["cummean_loss", "fi", "brt"],   // optional, default: all
///     "output_dir": "out", "emit_plots": true,    // optional
///     "threads": 0, "format": "csv",              // optional
///     "brt_normalization": "absolute"             // or "minmax"
///   }
///
/// Parameter values may be numbers or fraction strings such as "2/3".
/// RAND and TMD take their planned n from the run unless "n" is given in
/// params. Throws ConfigError.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& file);

/// Command-line procedure grammar:
///
///   spec   := KIND [ ":" assign { "," assign } ]
///   assign := NAME "=" NUMBER
///   NUMBER := decimal | integer "/" integer
///
/// e.g. "PBD:b=2", "EBCD:p=2/3", "BCDWIT:p=2/3,b=3", "MaxEnt:eta=0.5".
/// `n` fills the planned sample size of RAND and TMD.
ProcedureConfig parse_procedure_spec(std::string_view spec, const AllocationTarget& target, int n);

/// Comma-separated weights, e.g. "4,3,2,1". Entries may be fractions.
AllocationTarget parse_weights(std::string_view text);

/// Decimal number or "a/b" fraction.
double parse_number(std::string_view text);

/// Assigns a named parameter for `kind`; throws ConfigError for names the
/// kind does not use or non-integral values of integer parameters.
void set_param(ProcedureKind kind, ProcedureParams& params, std::string_view name, double value,
               const std::string& path);

/// Parameter names each kind requires, in label order.
std::vector<std::string_view> required_params(ProcedureKind kind);

}  // namespace randomkit
