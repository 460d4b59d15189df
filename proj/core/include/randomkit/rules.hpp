#pragma once

// Allocation rules. Each maps (state, cfg) to the probability vector for the
// next patient and writes it into `out` (size K). All are pure.

#include <span>
#include <vector>

#include "randomkit/procedure.hpp"

namespace randomkit::rules {

// K-arm procedures.
void crd(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out);
void rand(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out);
void tmd(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out);
void pbd(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out);
void bud(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out);
void mwud(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out);
void dlud(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out);
void dbcd(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out);
void maxent(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out);

// 1:1 procedures; out = (phi_E, 1 - phi_E).
void bsd(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out);
void bcdwit(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out);
void eud(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out);
void ebcd(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out);
void abcd(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out);
void gbcd(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out);
void bbcd(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out);

/// B_k = d(j + 1) evaluated at N(j) + e_k.
std::vector<double> hypothetical_imbalance(std::span<const int> counts, int j,
                                           std::span<const double> rho);

/// Tilting parameter mu in (0, 1] chosen by MaxEnt for the given B.
struct MaxEntSolution {
    double mu = 1.0;
    int iterations = 0;
};
MaxEntSolution solve_maxent(std::span<const double> rho, std::span<const double> b, double eta,
                            std::span<double> out);

/// Smith's allocation function f(x) = (1-x)^g / ((1-x)^g + (1+x)^g).
double smith_allocation(double x, double gamma);

/// Immigration series truncation for DLUD: stop once the probability of
/// still not having drawn a treatment ball is below this.
inline constexpr double kDludResidual = 1e-12;

/// Joint law of (immigrations m, arm k) for one DLUD draw, as a list of
/// terms P(m, k). Terms are produced in increasing m until the residual
/// mass falls below kDludResidual.
struct ImmigrationTerm {
    int immigrations;
    int arm;
    double probability;
};
std::vector<ImmigrationTerm> dlud_draw_law(const ProcedureConfig& cfg, const ProcedureState& s);

/// Samples the number of immigrations preceding a draw that assigned `arm`,
/// conditional on that arm, from one uniform variate.
int dlud_sample_immigrations(const ProcedureConfig& cfg, const ProcedureState& s, int arm,
                             double u);

}  // namespace randomkit::rules
