#include "approx/sampling.hpp"

#include <cmath>
#include <stdexcept>

namespace approx {

std::uint64_t SampleRng::hash(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

SampleRng::SampleRng(std::uint64_t seed, std::uint64_t stream)
    : state_(hash(hash(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 1))) {}

std::uint64_t SampleRng::next_u64() {
  state_ += 0x9e3779b97f4a7c15ULL;
  return hash(state_);
}

double SampleRng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SampleRng::next_in(double lo, double hi) {
  return lo + (hi - lo) * next_double();
}

namespace {

// Generalized golden-ratio constants for the R2 additive recurrence:
// phi_d is the unique positive root of x^(d+1) = x + 1.
double phi_root(int d) {
  double x = 2.0;
  for (int it = 0; it < 64; ++it) x = std::pow(1.0 + x, 1.0 / (d + 1));
  return x;
}

double frac(double x) { return x - std::floor(x); }

}  // namespace

Vec low_discrepancy_point(int dim, std::uint64_t seed, int k) {
  const double phi = phi_root(dim);
  Vec p(dim);
  double a = 1.0;
  for (int d = 0; d < dim; ++d) {
    a /= phi;
    // Seeded scramble: per-dimension offset shifts the whole lattice.
    SampleRng rng(seed, 0xa11ce5ULL + static_cast<std::uint64_t>(d));
    const double offset = rng.next_double();
    p[d] = frac(offset + (k + 1) * a);
  }
  return p;
}

std::vector<Vec> sample_domain(const Domain& box, const SamplerSpec& spec) {
  if (spec.n <= 0) throw std::invalid_argument("sample_domain: n must be positive");
  const int dim = box.dimension();
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(spec.n));

  switch (spec.kind) {
    case SamplerKind::LowDiscrepancy: {
      for (int k = 0; k < spec.n; ++k) {
        Vec u = low_discrepancy_point(dim, spec.seed, k);
        Vec x(dim);
        for (int d = 0; d < dim; ++d) x[d] = box.lo[d] + (box.hi[d] - box.lo[d]) * u[d];
        out.push_back(std::move(x));
      }
      break;
    }
    case SamplerKind::Random: {
      for (int k = 0; k < spec.n; ++k) {
        SampleRng rng(spec.seed, static_cast<std::uint64_t>(k));
        Vec x(dim);
        for (int d = 0; d < dim; ++d) x[d] = rng.next_in(box.lo[d], box.hi[d]);
        out.push_back(std::move(x));
      }
      break;
    }
    case SamplerKind::Grid: {
      // Per-axis count: smallest m with m^dim >= n; cell midpoints.
      int m = 1;
      while (std::pow(static_cast<double>(m), dim) < static_cast<double>(spec.n)) ++m;
      std::vector<int> idx(static_cast<std::size_t>(dim), 0);
      while (static_cast<int>(out.size()) < spec.n) {
        Vec x(dim);
        for (int d = 0; d < dim; ++d)
          x[d] = box.lo[d] + (box.hi[d] - box.lo[d]) * ((idx[d] + 0.5) / m);
        out.push_back(std::move(x));
        int d = 0;
        while (d < dim && ++idx[d] == m) idx[d++] = 0;
        if (d == dim) break;
      }
      break;
    }
  }
  return out;
}

}  // namespace approx
