#include "approx/correction.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "approx/fields.hpp"

namespace approx {

namespace {

LimitCycle relocate(const VectorField& field, const LimitCycle& reference,
                    const IntegratorConfig& cfg, const CycleSearchOptions& opts) {
  return find_limit_cycle(field, reference.section, reference.anchor, cfg, opts);
}

double max_rel_residual(const std::vector<double>& periods, const std::vector<double>& targets) {
  double worst = 0.0;
  for (std::size_t i = 0; i < periods.size(); ++i)
    worst = std::max(worst, std::abs(periods[i] - targets[i]) / targets[i]);
  return worst;
}

// Shared damped-Newton driver over a parameterized field family whose
// correction directions dF/dalpha_j do not depend on alpha.
struct FamilyNewton {
  std::function<VectorField(const std::vector<double>&)> field_at;
  std::vector<VectorField> directions;  // dF/dalpha_j
  const std::vector<LimitCycle>* seeds = nullptr;
  const std::vector<double>* targets = nullptr;
  const IntegratorConfig* cfg = nullptr;
  const CorrectionOptions* opts = nullptr;

  Eigen::MatrixXd malkin_jacobian(const std::vector<LimitCycle>& cycles,
                                  std::vector<double>* margins_out) const {
    const std::size_t n = cycles.size();
    Eigen::MatrixXd j(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      const AdjointSolution adj = adjoint_solution(current_field_, cycles[i], *cfg);
      for (std::size_t col = 0; col < n; ++col)
        j(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) =
            period_sensitivity(cycles[i], adj, directions[col]).value;
    }
    if (margins_out) {
      margins_out->clear();
      for (std::size_t i = 0; i < n; ++i) {
        double off = 0.0;
        for (std::size_t col = 0; col < n; ++col)
          if (col != i) off += std::abs(j(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)));
        margins_out->push_back(std::abs(j(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i))) - off);
      }
    }
    return j;
  }

  CorrectionResult run(std::vector<double> alpha) {
    const std::size_t n = seeds->size();
    CorrectionResult result;
    result.alpha = alpha;

    auto measure = [&](const std::vector<double>& a, std::vector<LimitCycle>& cycles_out) {
      current_field_ = field_at(a);
      cycles_out.clear();
      std::vector<double> periods;
      for (std::size_t i = 0; i < n; ++i) {
        cycles_out.push_back(relocate(current_field_, (*seeds)[i], *cfg, opts->cycle_opts));
        periods.push_back(cycles_out.back().period);
      }
      return periods;
    };

    std::vector<LimitCycle> cycles;
    std::vector<double> periods = measure(alpha, cycles);
    double rel = max_rel_residual(periods, *targets);
    result.residual_history.push_back(rel);

    Eigen::MatrixXd jac;
    bool have_jac = false;
    while (rel >= opts->relative_tol) {
      if (result.iterations >= opts->max_iters)
        throw CorrectionNewtonError("stagnated at relative residual " + std::to_string(rel),
                                    result.residual_history);
      if (!have_jac || !opts->freeze_jacobian) {
        jac = malkin_jacobian(cycles, &result.row_margins);
        have_jac = true;
        for (double m : result.row_margins)
          if (!(m > 0.0))
            throw DominanceViolatedError("row margin " + std::to_string(m) +
                                         " during Newton iteration");
      }

      Eigen::VectorXd res(n);
      for (std::size_t i = 0; i < n; ++i)
        res[static_cast<Eigen::Index>(i)] = periods[i] - (*targets)[i];
      const Eigen::VectorXd step = jac.fullPivLu().solve(-res);

      double damp = 1.0;
      for (int halving = 0;; ++halving) {
        std::vector<double> alpha_try = alpha;
        for (std::size_t i = 0; i < n; ++i)
          alpha_try[i] += damp * step[static_cast<Eigen::Index>(i)];
        std::vector<LimitCycle> cycles_try;
        const std::vector<double> periods_try = measure(alpha_try, cycles_try);
        const double rel_try = max_rel_residual(periods_try, *targets);
        if (rel_try < rel || halving >= opts->max_halvings) {
          alpha = alpha_try;
          cycles = std::move(cycles_try);
          periods = periods_try;
          rel = rel_try;
          break;
        }
        damp *= 0.5;
      }
      ++result.iterations;
      result.residual_history.push_back(rel);
    }

    result.alpha = alpha;
    result.corrected = field_at(alpha);
    result.achieved_periods = periods;
    for (std::size_t i = 0; i < n; ++i)
      result.residuals.push_back(std::abs(periods[i] - (*targets)[i]));
    return result;
  }

 private:
  mutable VectorField current_field_;
};

}  // namespace

CorrectionResult single_cycle_scaling(const VectorField& field, const LimitCycle& cycle,
                                      double t_target, const IntegratorConfig& cfg,
                                      const CorrectionOptions& opts) {
  if (!(t_target > 0.0))
    throw std::invalid_argument("single_cycle_scaling: target period must be positive");
  const double t_hat = cycle.period;
  const double c_star = t_hat / t_target;

  CorrectionResult result;
  result.alpha = {(t_hat - t_target) / t_target};
  result.corrected = scale_field(field, c_star);
  const LimitCycle corrected_cycle = relocate(result.corrected, cycle, cfg, opts.cycle_opts);
  result.achieved_periods = {corrected_cycle.period};
  result.residuals = {std::abs(corrected_cycle.period - t_target)};
  result.iterations = 0;
  if (result.residuals[0] >= opts.relative_tol * t_target)
    throw CorrectionNewtonError("scaling residual " + std::to_string(result.residuals[0]) +
                                " exceeds tolerance",
                                {result.residuals[0] / t_target});
  return result;
}

CorrectionResult multiplicative_correction(const CorrectionProblem& problem,
                                           const IntegratorConfig& cfg,
                                           const CorrectionOptions& opts) {
  const std::size_t n = problem.cycles.size();
  if (problem.bumps.size() != n || problem.target_periods.size() != n || n == 0)
    throw std::invalid_argument("multiplicative_correction: inconsistent problem");
  for (double t : problem.target_periods)
    if (!(t > 0.0)) throw std::invalid_argument("multiplicative_correction: target <= 0");

  // Measured cross-cycle leakage of the scalar bumps.
  double xi = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      if (i != j) xi = std::max(xi, problem.bumps[j].leakage_on(problem.cycles[i]));
  if (n > 1 && xi * static_cast<double>(n - 1) >= 1.0) throw DominanceViolatedError(xi, n);

  // Plateau-exact initial guess; exact when tubes are disjoint.
  std::vector<double> alpha(n);
  for (std::size_t i = 0; i < n; ++i)
    alpha[i] = (problem.cycles[i].period - problem.target_periods[i]) / problem.target_periods[i];

  FamilyNewton newton;
  const VectorField base = problem.base;
  const std::vector<BumpFunction> bumps = problem.bumps;
  newton.field_at = [base, bumps](const std::vector<double>& a) {
    return corrected_field_multiplicative(base, bumps, a);
  };
  for (std::size_t j = 0; j < n; ++j) {
    const BumpFunction psi = problem.bumps[j];
    newton.directions.push_back(VectorField(
        base.dimension(), [base, psi](const Vec& x) { return Vec(psi.value(x) * base(x)); },
        nullptr, "d-multiplicative"));
  }
  newton.seeds = &problem.cycles;
  newton.targets = &problem.target_periods;
  newton.cfg = &cfg;
  newton.opts = &opts;
  return newton.run(std::move(alpha));
}

PeriodJacobian period_jacobian(const VectorField& field, const std::vector<LimitCycle>& cycles,
                               const std::vector<VectorBump>& bumps, const IntegratorConfig& cfg) {
  const std::size_t n = cycles.size();
  if (bumps.size() != n || n == 0)
    throw std::invalid_argument("period_jacobian: need one bump per cycle");

  PeriodJacobian out;
  out.j.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const AdjointSolution adj = adjoint_solution(field, cycles[i], cfg);
    out.c_z = std::max(out.c_z, adj.max_norm);
    for (std::size_t j = 0; j < n; ++j) {
      out.j(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          period_sensitivity(cycles[i], adj, bumps[j].phi).value;
      if (i != j) out.zeta = std::max(out.zeta, vector_bump_leakage(bumps[j], cycles[i]));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) off += std::abs(out.j(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    out.row_margins.push_back(
        std::abs(out.j(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i))) - off);
  }
  return out;
}

DominanceCertificate dominance_certificate(const PeriodJacobian& jac, double nu, double zeta,
                                           std::size_t n_cycles) {
  DominanceCertificate cert;
  cert.certified = jac.dominant();
  cert.min_margin = jac.row_margins.empty()
                        ? 0.0
                        : *std::min_element(jac.row_margins.begin(), jac.row_margins.end());
  cert.analytic_lhs = nu + static_cast<double>(n_cycles - 1) * zeta;
  cert.analytic_rhs = jac.c_z > 0.0 ? 1.0 / jac.c_z : std::numeric_limits<double>::infinity();
  cert.analytic_ok = cert.analytic_lhs < cert.analytic_rhs;
  return cert;
}

CorrectionResult additive_correction(const CorrectionProblem& problem, const IntegratorConfig& cfg,
                                     const CorrectionOptions& opts) {
  const std::size_t n = problem.cycles.size();
  if (problem.vector_bumps.size() != n || problem.target_periods.size() != n || n == 0)
    throw std::invalid_argument("additive_correction: inconsistent problem");

  // Precondition: the period Jacobian at alpha = 0 must be diagonally dominant.
  const PeriodJacobian jac0 = period_jacobian(problem.base, problem.cycles, problem.vector_bumps, cfg);
  if (!jac0.dominant())
    throw DominanceViolatedError("initial Jacobian is not strictly diagonally dominant");

  FamilyNewton newton;
  const VectorField base = problem.base;
  const std::vector<VectorBump> bumps = problem.vector_bumps;
  newton.field_at = [base, bumps](const std::vector<double>& a) {
    return corrected_field_additive(base, bumps, a);
  };
  for (std::size_t j = 0; j < n; ++j) newton.directions.push_back(problem.vector_bumps[j].phi);
  newton.seeds = &problem.cycles;
  newton.targets = &problem.target_periods;
  newton.cfg = &cfg;
  newton.opts = &opts;

  CorrectionResult result = newton.run(std::vector<double>(n, 0.0));
  if (result.row_margins.empty())
    for (double m : jac0.row_margins) result.row_margins.push_back(m);
  return result;
}

VerificationReport verify_correction(const CorrectionResult& result,
                                     const std::vector<LimitCycle>& original_cycles,
                                     const std::vector<double>& target_periods,
                                     const IntegratorConfig& cfg, const CorrectionOptions& opts) {
  VerificationReport report;
  for (std::size_t i = 0; i < original_cycles.size(); ++i) {
    CycleVerification v;
    const LimitCycle cycle = relocate(result.corrected, original_cycles[i], cfg, opts.cycle_opts);
    v.hausdorff_shift = hausdorff_distance(original_cycles[i].points, cycle.points);
    v.period_residual = std::abs(cycle.period - target_periods[i]);
    v.hyperbolic = cycle.hyperbolic;
    v.multipliers = cycle.multipliers;
    report.all_hyperbolic = report.all_hyperbolic && v.hyperbolic;
    report.max_shift = std::max(report.max_shift, v.hausdorff_shift);
    report.max_period_residual = std::max(report.max_period_residual, v.period_residual);
    report.cycles.push_back(std::move(v));
  }
  return report;
}

}  // namespace approx
