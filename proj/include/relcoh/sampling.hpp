#pragma once

#include <cstdint>
#include <iosfwd>

#include "relcoh/dynamics.hpp"
#include "relcoh/mesh.hpp"

namespace relcoh {

/// Sampling prescription from the Gronwall bound: two initial points closer
/// than epsilon = q * exp(-M * epoch) end up closer than the box size q.
struct SamplingAdvice {
  double q = 0.0;
  double M = 0.0;
  double epoch = 0.0;
  double epsilon = 0.0;
  unsigned dimension = 2;
  std::uint64_t points_per_box = 0;
  std::uint64_t box_count = 0;
  std::uint64_t total_points = 0;
};

/// Largest spectral norm of the velocity Jacobian over n_samples uniform
/// space-time samples (rect x [t0, t0 + tau]), by central differences with
/// step 1e-6 * max(width, height). Sample points where a gridded field is
/// not defined are skipped.
double estimate_lipschitz(const FlowSpec& spec, const Rect& rect, std::size_t n_samples,
                          std::uint64_t seed, unsigned workers = 0);

/// points_per_box = ceil((q / epsilon)^2). Throws ErrorCode::advisory when
/// the total does not fit in 64 bits.
SamplingAdvice advise(double q, double M, double epoch, std::uint64_t box_count);

/// Human-readable report followed by a "key = value" block.
void write_advice(std::ostream& out, const SamplingAdvice& advice);

}  // namespace relcoh
