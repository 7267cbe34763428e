#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "relcoh/transfer.hpp"

namespace relcoh {

enum class SvdWeighting {
  /// Decompose P as stored.
  plain,
  /// Decompose diag(p)^{1/2} P diag(v)^{-1/2} with v the pushforward of p,
  /// then map the singular vectors back by diag(p)^{-1/2}, diag(v)^{-1/2}.
  measure,
};

struct SpectralOptions {
  double tol = 1e-11;
  std::size_t max_iter = 20000;  // operator applications
  std::uint64_t seed = 0;
  std::size_t krylov_dim = 64;
  SvdWeighting weighting = SvdWeighting::plain;
  /// Row weights for SvdWeighting::measure.
  std::vector<double> row_weights;
};

struct SingularPair {
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  std::vector<double> left1;
  std::vector<double> right1;
  std::vector<double> left2;
  std::vector<double> right2;
  /// max(|A r2 - s2 l2|, |A^T l2 - s2 r2|) for the decomposed operator A.
  double residual = 0.0;
  bool degenerate = false;
  std::string warning;
  std::size_t matvecs = 0;
};

/// Top two singular triples of P via Lanczos on the normal operator; the
/// first triple is computed, then deflated for the second. Empty rows and
/// columns are dropped and come back as zeros. left2's largest-magnitude
/// entry is made positive and right2 follows it. Needs at least two
/// nonempty rows and columns.
SingularPair second_singular(const TransitionMatrix& P, const SpectralOptions& options);
SingularPair second_singular(const TransitionMatrix& P, double tol = 1e-11,
                             std::size_t max_iter = 20000, std::uint64_t seed = 0);

}  // namespace relcoh
