#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "randomkit/target.hpp"

namespace randomkit {

enum class ProcedureKind : std::uint8_t {
    // valid for any K and any target
    CRD,
    RAND,
    TMD,
    PBD,
    BUD,
    MWUD,
    DLUD,
    DBCD,
    MAXENT,
    // 1:1 two-arm only
    BSD,
    BCDWIT,
    EUD,
    EBCD,
    ABCD,
    GBCD,
    BBCD,
};

std::string_view kind_name(ProcedureKind kind);

/// Case-insensitive lookup; "TBD" is accepted as the two-arm name of TMD.
std::optional<ProcedureKind> parse_kind(std::string_view name);

bool is_two_arm_only(ProcedureKind kind);

/// Markov in the counts N(j). DLUD depends on the urn instead.
bool is_markov(ProcedureKind kind);

/// Design parameters. Each kind reads only the fields it owns; the rest stay
/// at zero.
struct ProcedureParams {
    int b = 0;           // PBD block multiplier; MTI bound for BSD, BCDWIT, EUD
    double p = 0.0;      // coin bias for EBCD, BCDWIT
    double a = 0.0;      // ABCD exponent; DLUD immigration multiplier
    double gamma = 0.0;  // GBCD, BBCD, DBCD
    int lambda = 0;      // BUD
    double alpha = 0.0;  // MWUD
    double eta = 0.0;    // MaxEnt

    friend bool operator==(const ProcedureParams&, const ProcedureParams&) = default;
};

struct ProcedureConfig {
    ProcedureKind kind = ProcedureKind::CRD;
    ProcedureParams params;
    AllocationTarget target;
    int n = 0;               // planned sample size; required by RAND and TMD, 0 = unspecified
    std::vector<int> caps;   // n_k for RAND and TMD, empty otherwise

    int arms() const { return target.arms(); }
    friend bool operator==(const ProcedureConfig&, const ProcedureConfig&) = default;
};

/// A parameter outside its domain; param() names the offending field.
class InvalidParameter : public std::invalid_argument {
public:
    InvalidParameter(std::string param, const std::string& what)
        : std::invalid_argument(what), param_(std::move(param)) {}
    const std::string& param() const noexcept { return param_; }

private:
    std::string param_;
};

/// Checks parameter domains and target restrictions, fills the caps for
/// RAND/TMD, and returns the completed config. Throws std::invalid_argument.
ProcedureConfig make_config(ProcedureKind kind, AllocationTarget target, ProcedureParams params = {},
                            int n = 0);

void validate(const ProcedureConfig& cfg);

/// Canonical label, e.g. "PBD(2)", "EBCD(2/3)", "MaxEnt(0.5)".
std::string label(const ProcedureConfig& cfg);

/// Short text for a parameter value: the shortest decimal when it is at most
/// six characters, else a small fraction "a/b" when one matches exactly.
std::string format_param(double value);

/// Allocation state after j completed steps.
struct ProcedureState {
    int j = 0;
    std::vector<int> counts;
    // DLUD only: ball mass per treatment type and the number of immigration
    // events so far. The immigration token itself is implicit.
    std::optional<std::vector<double>> urn;
    int immigrations = 0;

    friend bool operator==(const ProcedureState&, const ProcedureState&) = default;
};

ProcedureState initial_state(const ProcedureConfig& cfg);

/// Records an assignment to `arm` (0-based). For DLUD, `immigrations` is the
/// number of token draws that preceded the ball draw; each adds a * w_k balls
/// of every type before one ball of the assigned type is removed.
ProcedureState advance_state(ProcedureState state, int arm, const ProcedureConfig& cfg,
                             int immigrations = 0);

/// Conditional probabilities phi_{j+1,k}, |phi| = K.
struct ProbabilityVector {
    std::vector<double> values;

    int size() const { return static_cast<int>(values.size()); }
    double operator[](int k) const { return values[static_cast<std::size_t>(k)]; }
    friend bool operator==(const ProbabilityVector&, const ProbabilityVector&) = default;
};

/// Sum-to-one tolerance for probability rows.
inline constexpr double kProbabilityTolerance = 1e-12;

/// Writes phi for the next patient into `out` (size K). Pure.
void probabilities(const ProcedureConfig& cfg, const ProcedureState& state, std::span<double> out);
ProbabilityVector probabilities(const ProcedureConfig& cfg, const ProcedureState& state);

/// One replicate: the assignment sequence and the n x K matrix of recorded phi.
struct TrialPath {
    std::vector<int> assignments;            // 0-based arm per step
    std::vector<std::vector<double>> probs;  // phi row recorded before each draw
};

/// Two-arm imbalance D = N_1 - N_2.
inline int imbalance(const ProcedureState& s) { return s.counts[0] - s.counts[1]; }

/// d(j): Euclidean distance between N(j) and j * rho.
double distance_from_target(std::span<const int> counts, int j, std::span<const double> rho);

}  // namespace randomkit
