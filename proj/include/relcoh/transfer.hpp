#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "relcoh/dynamics.hpp"
#include "relcoh/mesh.hpp"

namespace relcoh {

/// Row-substochastic Ulam estimate stored in CSR form. Entries keep their
/// integer transition counts so that row conservation
///   sum_j counts(i,j) + outflow_counts[i] == row_counts[i]
/// holds exactly; `values` are counts divided by the row count.
struct TransitionMatrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<std::size_t> row_ptr;  // n_rows + 1
  std::vector<std::size_t> col_idx;
  std::vector<double> values;
  std::vector<std::uint64_t> counts;
  std::vector<std::uint64_t> row_counts;
  std::vector<std::uint64_t> outflow_counts;
  std::vector<double> outflow;

  std::size_t nnz() const { return values.size(); }
  bool occupied(std::size_t i) const { return row_counts[i] > 0; }
  std::size_t occupied_rows() const;
  double row_sum(std::size_t i) const;
  /// Dense lookup; linear in the row length.
  double at(std::size_t i, std::size_t j) const;
};

/// Counting core shared by the mesh-based builder: rows[k] / cols[k] are
/// the source / image cell of sample k. A source of kOutside drops the
/// sample; an image of kOutside counts as outflow. Throws
/// ErrorCode::empty_matrix when no sample lands in a row.
TransitionMatrix build_matrix_from_cells(std::span<const std::size_t> rows,
                                         std::span<const std::size_t> cols, std::size_t n_rows,
                                         std::size_t n_cols, unsigned workers = 0);

/// P_ij = #{k : x_k in B_i and S(x_k) in C_j} / #{k : x_k in B_i}. Samples
/// starting outside the active domain cells are ignored; images outside the
/// active image cells, and flagged trajectories, accrue to outflow.
TransitionMatrix build_matrix(const TrajectoryEnsemble& ensemble, const Partition& domain,
                              const Partition& image, unsigned workers = 0);

/// v_j = sum_i p_i P_ij.
std::vector<double> push_measure(const TransitionMatrix& P, std::span<const double> p);

/// Submatrix over rows x cols, reindexed in the given order. Values are
/// kept as-is; mass leaving `cols` moves to the restricted outflow.
TransitionMatrix restrict(const TransitionMatrix& P, std::span<const std::size_t> rows,
                          std::span<const std::size_t> cols);

/// Hand-built matrix (tests, small examples). Nonempty rows get a nominal
/// row count of 1; integer entry counts are left at zero.
TransitionMatrix matrix_from_dense(const std::vector<std::vector<double>>& dense,
                                   std::span<const double> outflow = {});

/// "i j value" triplets under a header "n_rows n_cols nnz".
void write_matrix(std::ostream& out, const TransitionMatrix& P);
/// One line per row: "i row_count outflow".
void write_outflow(std::ostream& out, const TransitionMatrix& P);
/// Rebuilds the matrix (counts are recovered as round(value * row_count)).
TransitionMatrix read_matrix(std::istream& matrix_in, std::istream& outflow_in);

}  // namespace relcoh
