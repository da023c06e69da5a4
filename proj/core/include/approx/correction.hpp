#pragma once

#include <stdexcept>
#include <vector>

#include "approx/adjoint.hpp"
#include "approx/bump.hpp"
#include "approx/cycles.hpp"

namespace approx {

class DominanceViolatedError : public std::runtime_error {
 public:
  DominanceViolatedError(double xi, std::size_t n)
      : std::runtime_error("period-correction dominance violated: leakage " + std::to_string(xi) +
                           " with " + std::to_string(n) + " cycles") {}
  explicit DominanceViolatedError(const std::string& why)
      : std::runtime_error("period-correction dominance violated: " + why) {}
};

class CorrectionNewtonError : public std::runtime_error {
 public:
  CorrectionNewtonError(const std::string& why, std::vector<double> history)
      : std::runtime_error("period-correction Newton failed: " + why),
        residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

/// Cycles to retune, their localized correction directions, and the targets.
struct CorrectionProblem {
  VectorField base;
  std::vector<LimitCycle> cycles;
  std::vector<BumpFunction> bumps;        // multiplicative route
  std::vector<VectorBump> vector_bumps;   // additive route
  std::vector<double> target_periods;
};

/// Sensitivities dT_i/dalpha_j of the cycle periods to the correction
/// coefficients, with dominance diagnostics.
struct PeriodJacobian {
  Eigen::MatrixXd j;
  std::vector<double> row_margins;  // |J_ii| - sum_{j != i} |J_ij|
  double c_z = 0.0;                 // max_i sup_t ||Z_i(t)||
  double zeta = 0.0;                // measured cross-cycle leakage
  bool dominant() const {
    for (double m : row_margins)
      if (!(m > 0.0)) return false;
    return !row_margins.empty();
  }
};

struct CorrectionResult {
  std::vector<double> alpha;
  VectorField corrected;
  std::vector<double> achieved_periods;
  std::vector<double> residuals;  // |T_achieved - T_target|
  int iterations = 0;
  std::vector<double> row_margins;  // from the last period Jacobian (additive route)
  std::vector<double> residual_history;
};

struct CorrectionOptions {
  double relative_tol = 1e-6;  // residual < tol * T_target per cycle
  int max_iters = 10;
  int max_halvings = 5;
  bool freeze_jacobian = false;  // quasi-Newton with the initial Jacobian
  CycleSearchOptions cycle_opts;
};

/// Global time-rescaling for a single cycle: corrected = (T_hat/T_target) * f.
/// The orbit is unchanged; the period is re-measured and asserted.
CorrectionResult single_cycle_scaling(const VectorField& field, const LimitCycle& cycle,
                                      double t_target, const IntegratorConfig& cfg,
                                      const CorrectionOptions& opts = {});

/// (1 + sum alpha_i psi_i) f with exact plateaus: alpha_i = (T_hat_i - T_i)/T_i
/// independently per cycle when the tubes are disjoint; a Newton polish runs
/// when measured leakage or residuals demand it.
CorrectionResult multiplicative_correction(const CorrectionProblem& problem,
                                           const IntegratorConfig& cfg,
                                           const CorrectionOptions& opts = {});

/// J_ij = -integral <Z_i(t), Phi_j(gamma_i(t))> dt over each cycle's period,
/// with dominance margins, C_Z, and measured leakage.
PeriodJacobian period_jacobian(const VectorField& field, const std::vector<LimitCycle>& cycles,
                               const std::vector<VectorBump>& bumps, const IntegratorConfig& cfg);

struct DominanceCertificate {
  bool certified = false;      // direct row-dominance check on J
  double min_margin = 0.0;
  bool analytic_ok = false;    // nu + (N-1)*zeta < 1/C_Z
  double analytic_lhs = 0.0;
  double analytic_rhs = 0.0;
};

/// Both the direct diagonal-dominance check on J and the sufficient analytic
/// condition from the measured alignment/leakage bounds.
DominanceCertificate dominance_certificate(const PeriodJacobian& jac, double nu, double zeta,
                                           std::size_t n_cycles);

/// Newton iteration alpha <- alpha - J(alpha)^{-1} (T(alpha) - T_target) with
/// re-measured periods each step and damping outside the quadratic basin.
CorrectionResult additive_correction(const CorrectionProblem& problem, const IntegratorConfig& cfg,
                                     const CorrectionOptions& opts = {});

struct CycleVerification {
  double hausdorff_shift = 0.0;
  double period_residual = 0.0;
  bool hyperbolic = false;
  std::vector<std::complex<double>> multipliers;
};

struct VerificationReport {
  std::vector<CycleVerification> cycles;
  bool all_hyperbolic = true;
  double max_shift = 0.0;
  double max_period_residual = 0.0;
};

/// Re-locates every cycle on the corrected field and reports geometric shift,
/// period residuals, and Floquet spectra.
VerificationReport verify_correction(const CorrectionResult& result,
                                     const std::vector<LimitCycle>& original_cycles,
                                     const std::vector<double>& target_periods,
                                     const IntegratorConfig& cfg,
                                     const CorrectionOptions& opts = {});

}  // namespace approx
