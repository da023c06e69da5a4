#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "approx/types.hpp"
#include "approx/vector_field.hpp"

namespace approx {

/// Adaptive embedded Runge-Kutta settings. Defaults are the oracle profile;
/// Monte Carlo sweeps relax to 1e-6 / 1e-9.
struct IntegratorConfig {
  double rtol = 1e-9;
  double atol = 1e-12;
  double max_step = 0.0;   // 0 = unlimited
  double max_time = 1e4;   // hard cap on the integrated span
  std::optional<Domain> guard;  // divergence guard box; exit halts integration

  static IntegratorConfig oracle() { return {}; }
  static IntegratorConfig sweep() {
    IntegratorConfig c;
    c.rtol = 1e-6;
    c.atol = 1e-9;
    return c;
  }
};

enum class StopReason {
  ReachedEnd,     // integrated the requested span
  EscapedDomain,  // state left the guard box (explicit result, not an error)
  MaxTime,        // span truncated by cfg.max_time
};

/// Step-size underflow: the problem looks stiff or singular at t_last.
class StiffOrSingularError : public std::runtime_error {
 public:
  explicit StiffOrSingularError(double t_last)
      : std::runtime_error("integration step size underflow (stiff-or-singular) at t=" +
                           std::to_string(t_last)),
        t_last(t_last) {}
  double t_last;
};

/// Solution nodes plus a cubic-Hermite dense-output interpolant.
/// The interpolant reproduces stored states exactly at the nodes; between
/// nodes the integrator enforces an ODE residual below 10x the local
/// tolerance scale at step midpoints.
class Trajectory {
 public:
  Trajectory() = default;

  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  std::size_t nodes() const { return times_.size(); }
  StopReason reason() const { return reason_; }

  const std::vector<double>& times() const { return times_; }
  const Vec& state(std::size_t i) const { return states_[i]; }
  const Vec& deriv(std::size_t i) const { return derivs_[i]; }
  const Vec& last_state() const { return states_.back(); }

  /// Dense-output state at any t in [t_begin, t_end].
  Vec at(double t) const;
  /// Dense-output time derivative at t.
  Vec deriv_at(double t) const;

 private:
  friend Trajectory integrate(const VectorField&, const Vec&, double, double,
                              const IntegratorConfig&);
  friend class OdeStepper;

  std::size_t locate(double t) const;

  std::vector<double> times_;
  std::vector<Vec> states_;
  std::vector<Vec> derivs_;
  StopReason reason_ = StopReason::ReachedEnd;
};

/// Integrates x' = field(x) over [t0, t1] with dense output.
/// Guard-box exit is reported through Trajectory::reason(), never thrown.
Trajectory integrate(const VectorField& field, const Vec& x0, double t0, double t1,
                     const IntegratorConfig& cfg);

/// Endpoint of the flow: phi(t, x0).
Vec flow_at(const VectorField& field, const Vec& x0, double t, const IntegratorConfig& cfg);

/// Incremental stepping over an open-ended horizon; used by return-map and
/// capture-detection loops that decide the stopping time on the fly.
class OdeStepper {
 public:
  OdeStepper(const VectorField& field, const Vec& x0, double t0, const IntegratorConfig& cfg);

  /// Advances until t_target (or a guard/stop event). Appends to the
  /// trajectory, which accumulates the full history.
  StopReason advance_to(double t_target);

  double t() const { return traj_.t_end(); }
  const Vec& state() const { return traj_.last_state(); }
  const Trajectory& trajectory() const { return traj_; }
  bool stopped() const { return stopped_; }

 private:
  const VectorField& field_;
  IntegratorConfig cfg_;
  Trajectory traj_;
  double h_ = 0.0;
  double span_used_ = 0.0;
  bool stopped_ = false;
};

}  // namespace approx
