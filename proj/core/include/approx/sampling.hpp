#pragma once

#include <cstdint>
#include <vector>

#include "approx/types.hpp"
#include "approx/vector_field.hpp"

namespace approx {

/// Counter-based stream: state derived from (seed, stream index). Draws from
/// one stream never depend on other streams, so parallel workers reproduce
/// the single-threaded sequence exactly.
class SampleRng {
 public:
  SampleRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double next_double();
  /// Uniform in [lo, hi).
  double next_in(double lo, double hi);

  static std::uint64_t hash(std::uint64_t x);

 private:
  std::uint64_t state_;
};

enum class SamplerKind {
  LowDiscrepancy,  // seeded additive-recurrence (R2) lattice, scrambled
  Random,          // counter-based pseudo-random
  Grid,            // uniform tensor grid (1D/2D/3D)
};

struct SamplerSpec {
  SamplerKind kind = SamplerKind::LowDiscrepancy;
  int n = 1000;
  std::uint64_t seed = 0;
};

/// k-th point of the seeded d-dimensional low-discrepancy sequence, in [0,1)^d.
Vec low_discrepancy_point(int dim, std::uint64_t seed, int k);

/// Deterministic batch of initial conditions inside `box`.
std::vector<Vec> sample_domain(const Domain& box, const SamplerSpec& spec);

}  // namespace approx
