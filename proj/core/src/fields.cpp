#include "approx/fields.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "approx/sampling.hpp"
#include "approx/smoothstep.hpp"

namespace approx {

VectorField double_well_field() {
  return VectorField(
      1, [](const Vec& x) { return make_vec({x[0] - x[0] * x[0] * x[0]}); },
      [](const Vec& x) {
        Mat j(1, 1);
        j(0, 0) = 1.0 - 3.0 * x[0] * x[0];
        return j;
      },
      "double-well");
}

Domain double_well_domain() { return Domain(make_vec({-2.0}), make_vec({2.0}), 6.0); }

VectorField neg_cos_2x_field() {
  return VectorField(
      1, [](const Vec& x) { return make_vec({-std::cos(2.0 * x[0])}); },
      [](const Vec& x) {
        Mat j(1, 1);
        j(0, 0) = 2.0 * std::sin(2.0 * x[0]);
        return j;
      },
      "neg-cos-2x");
}

namespace {

// r' = kappa*r*(1-r^2), theta' = omega*(1+beta*(r-1)) in local coordinates.
inline Vec radial_cycle_eval(const Vec& u, double kappa, double omega, double beta) {
  const double r2 = u[0] * u[0] + u[1] * u[1];
  const double r = std::sqrt(r2);
  const double ang = omega * (1.0 + beta * (r - 1.0));
  const double rad = kappa * (1.0 - r2);
  Vec f(2);
  f[0] = rad * u[0] - ang * u[1];
  f[1] = rad * u[1] + ang * u[0];
  return f;
}

inline Mat radial_cycle_jac(const Vec& u, double kappa, double omega, double beta) {
  const double r2 = u[0] * u[0] + u[1] * u[1];
  const double r = std::sqrt(std::max(r2, 1e-30));
  const double ang = omega * (1.0 + beta * (r - 1.0));
  const double rad = kappa * (1.0 - r2);
  Mat j(2, 2);
  j(0, 0) = rad - 2.0 * kappa * u[0] * u[0];
  j(0, 1) = -2.0 * kappa * u[0] * u[1] - ang;
  j(1, 0) = -2.0 * kappa * u[0] * u[1] + ang;
  j(1, 1) = rad - 2.0 * kappa * u[1] * u[1];
  if (beta != 0.0 && r > 1e-12) {
    // d(ang)/du_j = omega*beta*u_j/r, applied to the rotational part (-u_y, u_x).
    const double c = omega * beta / r;
    j(0, 0) += -u[1] * c * u[0];
    j(0, 1) += -u[1] * c * u[1];
    j(1, 0) += u[0] * c * u[0];
    j(1, 1) += u[0] * c * u[1];
  }
  return j;
}

}  // namespace

VectorField radial_cycle_field(double kappa, double omega, double beta, Vec center) {
  if (center.size() == 0) center = make_vec({0.0, 0.0});
  return VectorField(
      2,
      [=](const Vec& x) {
        Vec u = x - center;
        return radial_cycle_eval(u, kappa, omega, beta);
      },
      [=](const Vec& x) {
        Vec u = x - center;
        return radial_cycle_jac(u, kappa, omega, beta);
      },
      "radial-cycle");
}

VectorField multi_cycle_field(const MultiCycleSpec& spec) {
  if (spec.centers.size() < 2) throw std::invalid_argument("multi_cycle_field: need >= 2 centers");
  if (!(spec.disc_r_in > 1.0 && spec.disc_r_out > spec.disc_r_in))
    throw std::invalid_argument("multi_cycle_field: disc radii must cover the unit cycle");
  for (std::size_t i = 0; i < spec.centers.size(); ++i)
    for (std::size_t j = i + 1; j < spec.centers.size(); ++j)
      if ((spec.centers[i] - spec.centers[j]).norm() < 2.0 * spec.disc_r_out)
        throw std::invalid_argument("multi_cycle_field: cutoff discs overlap");

  const MultiCycleSpec s = spec;
  auto eval = [s](const Vec& x) {
    Vec f = Vec::Zero(2);
    for (const Vec& c : s.centers) {
      Vec u = x - c;
      const double rho = u.norm();
      if (rho >= s.disc_r_out) continue;
      const double w = plateau(rho, s.disc_r_in, s.disc_r_out);
      f += w * radial_cycle_eval(u, s.kappa, s.omega, s.beta);
    }
    return f;
  };
  auto jac = [s](const Vec& x) {
    Mat j = Mat::Zero(2, 2);
    for (const Vec& c : s.centers) {
      Vec u = x - c;
      const double rho = u.norm();
      if (rho >= s.disc_r_out) continue;
      const double w = plateau(rho, s.disc_r_in, s.disc_r_out);
      j += w * radial_cycle_jac(u, s.kappa, s.omega, s.beta);
      if (rho > s.disc_r_in && rho > 1e-12) {
        const double dw = plateau_deriv(rho, s.disc_r_in, s.disc_r_out);
        const Vec grad_w = (dw / rho) * u;
        j += radial_cycle_eval(u, s.kappa, s.omega, s.beta) * grad_w.transpose();
      }
    }
    return j;
  };
  return VectorField(2, eval, jac, "multi-cycle");
}

MultiCycleSpec multi_cycle_2_spec() {
  MultiCycleSpec spec;
  spec.centers = {make_vec({-2.5, 0.0}), make_vec({2.5, 0.0})};
  return spec;
}

double multi_cycle_separation(const MultiCycleSpec& spec) {
  double sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spec.centers.size(); ++i)
    for (std::size_t j = i + 1; j < spec.centers.size(); ++j)
      sep = std::min(sep, (spec.centers[i] - spec.centers[j]).norm() - 2.0);
  return sep;
}

VectorField ring_attractor_field(double kappa) {
  return VectorField(
      2,
      [kappa](const Vec& x) {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        return Vec(kappa * (1.0 - r2) * x);
      },
      [kappa](const Vec& x) {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        Mat j = (kappa * (1.0 - r2)) * Mat::Identity(2, 2);
        j -= (2.0 * kappa) * (x * x.transpose());
        return j;
      },
      "ring");
}

VectorField line_attractor_field(double a, double b, double kappa_t, double lambda_n) {
  if (!(a < b)) throw std::invalid_argument("line_attractor_field: need a < b");
  auto hinge = [a, b](double x) {
    if (x > b) return (x - b) * (x - b) * (x - b);
    if (x < a) return (x - a) * (x - a) * (x - a);
    return 0.0;
  };
  auto hinge_d = [a, b](double x) {
    if (x > b) return 3.0 * (x - b) * (x - b);
    if (x < a) return 3.0 * (x - a) * (x - a);
    return 0.0;
  };
  return VectorField(
      2,
      [=](const Vec& x) { return make_vec({-kappa_t * hinge(x[0]), -lambda_n * x[1]}); },
      [=](const Vec& x) {
        Mat j = Mat::Zero(2, 2);
        j(0, 0) = -kappa_t * hinge_d(x[0]);
        j(1, 1) = -lambda_n;
        return j;
      },
      "line");
}

VectorField iso_cylinder_field(double kappa, double omega, AxialMode mode, double mu) {
  return VectorField(
      3,
      [=](const Vec& x) {
        Vec u = make_vec({x[0], x[1]});
        Vec p = radial_cycle_eval(u, kappa, omega, 0.0);
        Vec f(3);
        f[0] = p[0];
        f[1] = p[1];
        f[2] = (mode == AxialMode::Linear) ? -mu * x[2] : 0.0;
        return f;
      },
      [=](const Vec& x) {
        Vec u = make_vec({x[0], x[1]});
        Mat p = radial_cycle_jac(u, kappa, omega, 0.0);
        Mat j = Mat::Zero(3, 3);
        j.topLeftCorner(2, 2) = p;
        j(2, 2) = (mode == AxialMode::Linear) ? -mu : 0.0;
        return j;
      },
      "iso-cylinder");
}

VectorField make_perturbed(const VectorField& base, const VectorField& g, double nu) {
  if (base.dimension() != g.dimension())
    throw std::invalid_argument("make_perturbed: dimension mismatch");
  if (nu < 0.0) throw std::invalid_argument("make_perturbed: nu must be >= 0");
  const bool analytic = base.has_analytic_jacobian() && g.has_analytic_jacobian();
  return VectorField(
      base.dimension(),
      [base, g, nu](const Vec& x) { return Vec(base(x) + nu * g(x)); },
      analytic ? VectorField::JacFn([base, g, nu](const Vec& x) {
        return Mat(base.jacobian(x) + nu * g.jacobian(x));
      })
               : VectorField::JacFn(nullptr),
      base.name() + "+perturbation");
}

VectorField scale_field(const VectorField& field, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("scale_field: c must be positive");
  const bool analytic = field.has_analytic_jacobian();
  return VectorField(
      field.dimension(), [field, c](const Vec& x) { return Vec(c * field(x)); },
      analytic ? VectorField::JacFn([field, c](const Vec& x) { return Mat(c * field.jacobian(x)); })
               : VectorField::JacFn(nullptr),
      field.name() + "*scaled");
}

PerturbationFamily PerturbationFamily::make(const VectorField& base, const VectorField& g,
                                            double nu, const Domain& domain, int n_probe) {
  PerturbationFamily fam;
  fam.base = base;
  fam.g = g;
  fam.nu = nu;
  double c0 = 0.0, c1 = 0.0;
  SamplerSpec probe{SamplerKind::LowDiscrepancy, n_probe, 0};
  for (const Vec& x : sample_domain(domain, probe)) {
    c0 = std::max(c0, g(x).norm());
    c1 = std::max(c1, operator_norm(g.jacobian(x)));
  }
  fam.g_c0_norm = c0;
  fam.g_c1_norm = c0 + c1;
  if (c0 > 1.0 + 1e-9)
    throw std::invalid_argument("PerturbationFamily: sup||g|| exceeds 1");
  return fam;
}

VectorField make_field(const std::string& id, const std::map<std::string, double>& params) {
  auto get = [&params](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  auto check_keys = [&params, &id](std::initializer_list<const char*> allowed) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : params)
      if (!ok.count(k))
        throw std::invalid_argument("make_field(" + id + "): unknown parameter '" + k + "'");
  };

  if (id == "double-well") {
    check_keys({});
    return double_well_field();
  }
  if (id == "radial-cycle") {
    check_keys({"kappa", "omega", "beta"});
    return radial_cycle_field(get("kappa", 1.0), get("omega", 1.0), get("beta", 0.0));
  }
  if (id == "multi-cycle-2") {
    check_keys({"kappa", "omega", "beta"});
    MultiCycleSpec spec = multi_cycle_2_spec();
    spec.kappa = get("kappa", 1.0);
    spec.omega = get("omega", 1.0);
    spec.beta = get("beta", 0.0);
    return multi_cycle_field(spec);
  }
  if (id == "ring") {
    check_keys({"kappa"});
    return ring_attractor_field(get("kappa", 1.0));
  }
  if (id == "line") {
    check_keys({"a", "b", "kappa_t", "lambda_n"});
    return line_attractor_field(get("a", -1.0), get("b", 1.0), get("kappa_t", 1.0),
                                get("lambda_n", 2.0));
  }
  if (id == "iso-cylinder") {
    check_keys({"kappa", "omega", "mu", "axial"});
    const double axial = get("axial", 0.0);
    return iso_cylinder_field(get("kappa", 1.0), get("omega", 1.0),
                              axial != 0.0 ? AxialMode::Linear : AxialMode::None,
                              get("mu", 1.0));
  }
  throw std::invalid_argument("make_field: unknown field id '" + id + "'");
}

Domain default_domain(const std::string& id) {
  if (id == "double-well") return double_well_domain();
  if (id == "radial-cycle" || id == "ring")
    return Domain(make_vec({-1.6, -1.6}), make_vec({1.6, 1.6}));
  if (id == "line") return Domain(make_vec({-1.8, -1.2}), make_vec({1.8, 1.2}));
  if (id == "multi-cycle-2") return Domain(make_vec({-5.0, -2.6}), make_vec({5.0, 2.6}));
  if (id == "iso-cylinder") return Domain(make_vec({-1.6, -1.6, -0.8}), make_vec({1.6, 1.6, 0.8}));
  throw std::invalid_argument("default_domain: unknown field id '" + id + "'");
}

}  // namespace approx
