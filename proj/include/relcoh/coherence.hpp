#pragma once

#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "relcoh/mesh.hpp"
#include "relcoh/spectral.hpp"
#include "relcoh/transfer.hpp"

namespace relcoh {

/// A (row-set, column-set) pair: the X side is a union of domain cells, the
/// Y side a union of image cells.
struct CoherentPair {
  IndexSet rows;
  IndexSet cols;
  double rho = 0.0;
  double rho_complement = 0.0;
  double b_star = 0.0;
  double c_star = 0.0;
};

/// Fraction of the X-mass that lands in Y:
///   sum_{i in rows, j in cols} p_i P_ij / sum_{i in rows} p_i.
/// Throws ErrorCode::undefined_ratio when the row mass is not positive.
double coherence_ratio(const TransitionMatrix& P, std::span<const double> p,
                       std::span<const std::size_t> rows, std::span<const std::size_t> cols);

/// One scanned threshold pair.
struct SplitCandidate {
  double b = 0.0;
  double c = 0.0;
  double mass_x = 0.0;
  double mass_y = 0.0;
  double rho = 0.0;
  double rho_complement = 0.0;
  bool admissible = false;
};

struct SplitOptions {
  /// Both X and its complement must hold at least this fraction of the
  /// current mass.
  double min_mass = 0.05;
};

struct SplitResult {
  CoherentPair pair;
  CoherentPair complement;
  std::vector<SplitCandidate> trace;
};

/// Thresholding optimizer over the second singular vectors. For every
/// distinct entry b of left2, X(b) = {i : x_i > b}; Y(c) = {j : y_j > c}
/// takes the entry c of right2 whose pushforward mass v(Y(c)) is closest to
/// mu(X(b)). Among admissible candidates the pair maximizing
/// rho(X, Y) + rho(X^c, Y^c) wins; ties go to the more balanced split, then
/// to the smaller b. Rows with zero weight or no samples and columns with
/// no incoming mass are left out of both sides. Throws ErrorCode::no_split
/// when no candidate is admissible.
SplitResult optimize_split(const TransitionMatrix& P, std::span<const double> p,
                           const SingularPair& sv, const SplitOptions& options = {});

std::pair<CoherentPair, CoherentPair> optimize_split(const TransitionMatrix& P,
                                                     std::span<const double> p,
                                                     const SingularPair& sv, double min_mass);

/// Tab-separated dump of a candidate scan.
void write_trace(std::ostream& out, const std::vector<SplitCandidate>& trace);

}  // namespace relcoh
