#include "approx/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace approx {

namespace {

// Dormand-Prince 5(4) tableau (FSAL).
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// 5th-minus-4th order error weights (e2 = 0).
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double kSafety = 0.9;
constexpr double kShrinkMin = 0.2;
constexpr double kGrowMax = 5.0;

struct Hermite {
  // State of the cubic Hermite interpolant at theta in [0,1].
  static Vec value(double theta, double h, const Vec& y0, const Vec& f0, const Vec& y1,
                   const Vec& f1) {
    const double t2 = theta * theta, t3 = t2 * theta;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + theta;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * y0 + (h10 * h) * f0 + h01 * y1 + (h11 * h) * f1;
  }
  static Vec deriv(double theta, double h, const Vec& y0, const Vec& f0, const Vec& y1,
                   const Vec& f1) {
    const double t2 = theta * theta;
    const double d00 = (6 * t2 - 6 * theta) / h;
    const double d10 = 3 * t2 - 4 * theta + 1;
    const double d01 = (-6 * t2 + 6 * theta) / h;
    const double d11 = 3 * t2 - 2 * theta;
    return d00 * y0 + d10 * f0 + d01 * y1 + d11 * f1;
  }
};

double error_norm(const Vec& err, const Vec& y0, const Vec& y1, double atol, double rtol) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = err[i] / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

double initial_step(const VectorField& f, const Vec& y0, const Vec& f0, double atol,
                    double rtol) {
  const double d0 = error_norm(y0, y0, y0, atol, rtol);
  const double d1 = error_norm(f0, y0, y0, atol, rtol);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  Vec y1 = y0 + h0 * f0;
  Vec f1 = f(y1);
  const double d2 = error_norm(f1 - f0, y0, y1, atol, rtol) / h0;
  double h1;
  if (std::max(d1, d2) <= 1e-15)
    h1 = std::max(1e-6, h0 * 1e-3);
  else
    h1 = std::pow(0.01 / std::max(d1, d2), 0.2);
  return std::min(100 * h0, h1);
}

}  // namespace

std::size_t Trajectory::locate(double t) const {
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
  if (hi == 0) return 0;
  if (hi >= times_.size()) return times_.size() - 2;
  return hi - 1;
}

Vec Trajectory::at(double t) const {
  if (times_.size() == 1) return states_.front();
  const std::size_t i = locate(t);
  const double h = times_[i + 1] - times_[i];
  const double theta = std::clamp((t - times_[i]) / h, 0.0, 1.0);
  if (theta == 0.0) return states_[i];
  if (theta == 1.0) return states_[i + 1];
  return Hermite::value(theta, h, states_[i], derivs_[i], states_[i + 1], derivs_[i + 1]);
}

Vec Trajectory::deriv_at(double t) const {
  if (times_.size() == 1) return derivs_.front();
  const std::size_t i = locate(t);
  const double h = times_[i + 1] - times_[i];
  const double theta = std::clamp((t - times_[i]) / h, 0.0, 1.0);
  return Hermite::deriv(theta, h, states_[i], derivs_[i], states_[i + 1], derivs_[i + 1]);
}

OdeStepper::OdeStepper(const VectorField& field, const Vec& x0, double t0,
                       const IntegratorConfig& cfg)
    : field_(field), cfg_(cfg) {
  if (cfg_.rtol <= 0 || cfg_.atol <= 0)
    throw std::invalid_argument("IntegratorConfig: tolerances must be positive");
  if (cfg_.max_time <= 0) throw std::invalid_argument("IntegratorConfig: max_time must be positive");
  traj_.times_.push_back(t0);
  traj_.states_.push_back(x0);
  traj_.derivs_.push_back(field(x0));
  if (cfg_.guard && !cfg_.guard->contains(x0)) {
    traj_.reason_ = StopReason::EscapedDomain;
    stopped_ = true;
  }
}

StopReason OdeStepper::advance_to(double t_target) {
  if (stopped_) return traj_.reason_;
  double t = traj_.t_end();
  if (t_target <= t) return traj_.reason_;

  // Enforce the total-span cap across all advance_to calls.
  const double span_left = cfg_.max_time - span_used_;
  bool capped = false;
  if (t_target - t > span_left) {
    t_target = t + span_left;
    capped = true;
  }

  Vec y = traj_.last_state();
  Vec f0 = traj_.derivs_.back();
  const Eigen::Index n = y.size();
  Vec k2(n), k3(n), k4(n), k5(n), k6(n), ynew(n), fnew(n), yerr(n);

  if (h_ <= 0.0) h_ = initial_step(field_, y, f0, cfg_.atol, cfg_.rtol);
  if (cfg_.max_step > 0.0) h_ = std::min(h_, cfg_.max_step);

  while (t < t_target) {
    const double t_dust = 16.0 * std::numeric_limits<double>::epsilon() *
                          std::max(std::abs(t_target), 1.0);
    if (t_target - t < t_dust) break;  // endgame: remaining span is FP dust
    // Clamping to hit t_target is not error feedback; the controller step h_
    // must survive it, or window-aligned calls starve the step size.
    const bool endgame = t_target - t < h_;
    double h = endgame ? t_target - t : h_;
    bool accepted = false;
    int rejections = 0;
    while (!accepted) {
      const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0);
      if (h < h_min || rejections > 200) {
        if (const char* dbg = std::getenv("APPROX_STEP_DEBUG")) {
          (void)dbg;
          std::fprintf(stderr, "[stepper] t=%.17g h=%.3e h_=%.3e rejections=%d\n", t, h, h_, rejections);
        }
        throw StiffOrSingularError(t);
      }
      ++rejections;

      k2 = field_(y + h * (a21 * f0));
      k3 = field_(y + h * (a31 * f0 + a32 * k2));
      k4 = field_(y + h * (a41 * f0 + a42 * k2 + a43 * k3));
      k5 = field_(y + h * (a51 * f0 + a52 * k2 + a53 * k3 + a54 * k4));
      k6 = field_(y + h * (a61 * f0 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      ynew = y + h * (b1 * f0 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      fnew = field_(ynew);  // FSAL stage
      yerr = h * (e1 * f0 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * fnew);

      const double err = error_norm(yerr, y, ynew, cfg_.atol, cfg_.rtol);
      if (err <= 1.0) {
        // Dense-output quality gate: the Hermite interpolant must satisfy the
        // ODE at the step midpoint to 10x the velocity-scale tolerance. The
        // divided difference in the interpolant derivative has an eps*||y||/h
        // rounding floor, which the allowance must include or tiny
        // target-clamped steps reject forever.
        const Vec pm = Hermite::value(0.5, h, y, f0, ynew, fnew);
        const Vec pd = Hermite::deriv(0.5, h, y, f0, ynew, fnew);
        const Vec fm = field_(pm);
        const double res = (pd - fm).norm();
        const double round_floor = 8.0 * std::numeric_limits<double>::epsilon() *
                                   std::max(y.norm(), ynew.norm()) / h;
        const double allow = 10.0 * (cfg_.atol + cfg_.rtol * fm.norm()) + round_floor;
        if (res <= allow) {
          accepted = true;
          const double factor = (err <= 1e-30) ? kGrowMax
                                               : std::clamp(kSafety * std::pow(err, -0.2),
                                                            kShrinkMin, kGrowMax);
          if (endgame && rejections == 1) {
            // Clamped step accepted on the first try: keep the controller
            // step, allowing at most the usual growth.
            h_ = std::min(h_ * factor, std::max(h_, h * factor));
          } else {
            h_ = h * factor;
          }
          if (cfg_.max_step > 0.0) h_ = std::min(h_, cfg_.max_step);
        } else {
          h *= 0.5;
        }
      } else {
        h *= std::clamp(kSafety * std::pow(err, -0.2), kShrinkMin, 1.0);
      }
    }

    t += h;
    span_used_ += h;
    y = ynew;
    f0 = fnew;
    traj_.times_.push_back(t);
    traj_.states_.push_back(y);
    traj_.derivs_.push_back(f0);

    if (cfg_.guard && !cfg_.guard->contains(y)) {
      traj_.reason_ = StopReason::EscapedDomain;
      stopped_ = true;
      return traj_.reason_;
    }
  }

  if (capped) {
    traj_.reason_ = StopReason::MaxTime;
    stopped_ = true;
  }
  return traj_.reason_;
}

Trajectory integrate(const VectorField& field, const Vec& x0, double t0, double t1,
                     const IntegratorConfig& cfg) {
  if (!(t1 >= t0)) throw std::invalid_argument("integrate: t_span must be forward");
  OdeStepper stepper(field, x0, t0, cfg);
  if (t1 > t0) stepper.advance_to(t1);
  return stepper.trajectory();
}

Vec flow_at(const VectorField& field, const Vec& x0, double t, const IntegratorConfig& cfg) {
  if (t == 0.0) return x0;
  return integrate(field, x0, 0.0, t, cfg).last_state();
}

}  // namespace approx
