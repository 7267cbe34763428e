#include "relcoh/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "relcoh/error.hpp"
#include "relcoh/parallel.hpp"
#include "text_io.hpp"

namespace relcoh {

std::size_t TransitionMatrix::occupied_rows() const {
  return static_cast<std::size_t>(
      std::count_if(row_counts.begin(), row_counts.end(), [](auto c) { return c > 0; }));
}

double TransitionMatrix::row_sum(std::size_t i) const {
  double s = 0.0;
  for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += values[k];
  return s;
}

double TransitionMatrix::at(std::size_t i, std::size_t j) const {
  for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
    if (col_idx[k] == j) return values[k];
  return 0.0;
}

namespace {

void finalize_values(TransitionMatrix& P) {
  P.values.resize(P.counts.size());
  P.outflow.assign(P.n_rows, 0.0);
  for (std::size_t i = 0; i < P.n_rows; ++i) {
    if (P.row_counts[i] == 0) continue;
    const double n = static_cast<double>(P.row_counts[i]);
    for (std::size_t k = P.row_ptr[i]; k < P.row_ptr[i + 1]; ++k)
      P.values[k] = static_cast<double>(P.counts[k]) / n;
    P.outflow[i] = static_cast<double>(P.outflow_counts[i]) / n;
  }
}

}  // namespace

TransitionMatrix build_matrix_from_cells(std::span<const std::size_t> rows,
                                         std::span<const std::size_t> cols, std::size_t n_rows,
                                         std::size_t n_cols, unsigned workers) {
  if (rows.size() != cols.size())
    throw Error(ErrorCode::invalid_argument, "row and column label counts differ");
  if (n_rows == 0 || n_cols == 0)
    throw Error(ErrorCode::empty_matrix, "matrix has no rows or columns");

  // Keys i * (n_cols + 1) + j, with j == n_cols standing for outflow.
  const std::uint64_t stride = static_cast<std::uint64_t>(n_cols) + 1;
  const std::size_t chunks = chunk_count(rows.size(), workers);
  std::vector<std::vector<std::uint64_t>> keys(chunks);
  parallel_chunks(rows.size(), workers, [&](std::size_t c, std::size_t b, std::size_t e) {
    auto& out = keys[c];
    out.reserve(e - b);
    for (std::size_t k = b; k < e; ++k) {
      const std::size_t i = rows[k];
      if (i == kOutside) continue;
      if (i >= n_rows) throw Error(ErrorCode::invalid_argument, "row label out of range");
      std::size_t j = cols[k];
      if (j == kOutside) j = n_cols;
      else if (j >= n_cols) throw Error(ErrorCode::invalid_argument, "column label out of range");
      out.push_back(static_cast<std::uint64_t>(i) * stride + j);
    }
    std::sort(out.begin(), out.end());
  });

  std::vector<std::uint64_t> all;
  std::size_t total = 0;
  for (const auto& k : keys) total += k.size();
  if (total == 0) throw Error(ErrorCode::empty_matrix, "no sample starts in an active row");
  all.reserve(total);
  for (auto& k : keys) {
    const auto mid = all.size();
    all.insert(all.end(), k.begin(), k.end());
    std::inplace_merge(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(mid), all.end());
    k.clear();
    k.shrink_to_fit();
  }

  TransitionMatrix P;
  P.n_rows = n_rows;
  P.n_cols = n_cols;
  P.row_ptr.assign(n_rows + 1, 0);
  P.row_counts.assign(n_rows, 0);
  P.outflow_counts.assign(n_rows, 0);
  for (std::size_t a = 0; a < all.size();) {
    std::size_t b = a;
    while (b < all.size() && all[b] == all[a]) ++b;
    const auto i = static_cast<std::size_t>(all[a] / stride);
    const auto j = static_cast<std::size_t>(all[a] % stride);
    const auto n = static_cast<std::uint64_t>(b - a);
    P.row_counts[i] += n;
    if (j == n_cols) {
      P.outflow_counts[i] += n;
    } else {
      P.col_idx.push_back(j);
      P.counts.push_back(n);
      ++P.row_ptr[i + 1];
    }
    a = b;
  }
  for (std::size_t i = 0; i < n_rows; ++i) P.row_ptr[i + 1] += P.row_ptr[i];
  finalize_values(P);
  return P;
}

TransitionMatrix build_matrix(const TrajectoryEnsemble& ensemble, const Partition& domain,
                              const Partition& image, unsigned workers) {
  if (ensemble.size() == 0) throw Error(ErrorCode::empty_matrix, "empty ensemble");
  if (ensemble.final.size() != ensemble.size())
    throw Error(ErrorCode::invalid_argument, "ensemble initial/final lengths differ");
  if (!domain.mesh || !image.mesh) throw Error(ErrorCode::invalid_argument, "partition has no mesh");
  const bool has_flags = ensemble.flagged.size() == ensemble.size();

  std::vector<std::size_t> rows(ensemble.size());
  std::vector<std::size_t> cols(ensemble.size());
  parallel_chunks(ensemble.size(), workers, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      std::size_t i = domain.mesh->locate(ensemble.initial[k]);
      if (i != kOutside && !domain.is_active(i)) i = kOutside;
      rows[k] = i;
      std::size_t j = kOutside;
      const Point2& f = ensemble.final[k];
      if (!(has_flags && ensemble.flagged[k]) && is_finite(f)) {
        j = image.mesh->locate(f);
        if (j != kOutside && !image.is_active(j)) j = kOutside;
      }
      cols[k] = j;
    }
  });
  return build_matrix_from_cells(rows, cols, domain.size(), image.size(), workers);
}

std::vector<double> push_measure(const TransitionMatrix& P, std::span<const double> p) {
  if (p.size() != P.n_rows)
    throw Error(ErrorCode::invalid_argument, "weight vector length does not match rows");
  std::vector<double> v(P.n_cols, 0.0);
  for (std::size_t i = 0; i < P.n_rows; ++i) {
    if (p[i] == 0.0) continue;
    for (std::size_t k = P.row_ptr[i]; k < P.row_ptr[i + 1]; ++k)
      v[P.col_idx[k]] += p[i] * P.values[k];
  }
  return v;
}

TransitionMatrix restrict(const TransitionMatrix& P, std::span<const std::size_t> rows,
                          std::span<const std::size_t> cols) {
  if (rows.empty() || cols.empty())
    throw Error(ErrorCode::empty_selection, "restriction needs nonempty row and column sets");
  constexpr std::size_t kAbsent = kOutside;
  std::vector<std::size_t> col_map(P.n_cols, kAbsent);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (cols[c] >= P.n_cols) throw Error(ErrorCode::invalid_argument, "column index out of range");
    if (col_map[cols[c]] != kAbsent)
      throw Error(ErrorCode::invalid_argument, "duplicate column in selection");
    col_map[cols[c]] = c;
  }

  TransitionMatrix R;
  R.n_rows = rows.size();
  R.n_cols = cols.size();
  R.row_ptr.assign(R.n_rows + 1, 0);
  R.row_counts.resize(R.n_rows);
  R.outflow_counts.resize(R.n_rows);
  R.outflow.resize(R.n_rows);
  std::vector<unsigned char> seen(P.n_rows, 0);
  std::vector<std::pair<std::size_t, std::size_t>> row;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t i = rows[r];
    if (i >= P.n_rows) throw Error(ErrorCode::invalid_argument, "row index out of range");
    if (seen[i]) throw Error(ErrorCode::invalid_argument, "duplicate row in selection");
    seen[i] = 1;
    row.clear();
    std::uint64_t kept = 0;
    double removed = 0.0;
    for (std::size_t k = P.row_ptr[i]; k < P.row_ptr[i + 1]; ++k) {
      const std::size_t c = col_map[P.col_idx[k]];
      if (c == kAbsent) {
        removed += P.values[k];
        continue;
      }
      row.push_back({c, k});
      kept += P.counts[k];
    }
    std::sort(row.begin(), row.end());
    for (const auto& [c, k] : row) {
      R.col_idx.push_back(c);
      R.counts.push_back(P.counts[k]);
      R.values.push_back(P.values[k]);
    }
    R.row_ptr[r + 1] = R.col_idx.size();
    R.row_counts[r] = P.row_counts[i];
    R.outflow_counts[r] = P.row_counts[i] - std::min(kept, P.row_counts[i]);
    R.outflow[r] = P.outflow[i] + removed;
  }
  return R;
}

TransitionMatrix matrix_from_dense(const std::vector<std::vector<double>>& dense,
                                   std::span<const double> outflow) {
  TransitionMatrix P;
  P.n_rows = dense.size();
  P.n_cols = dense.empty() ? 0 : dense.front().size();
  if (!outflow.empty() && outflow.size() != P.n_rows)
    throw Error(ErrorCode::invalid_argument, "outflow length does not match rows");
  P.row_ptr.assign(P.n_rows + 1, 0);
  P.row_counts.assign(P.n_rows, 0);
  P.outflow_counts.assign(P.n_rows, 0);
  P.outflow.assign(P.n_rows, 0.0);
  for (std::size_t i = 0; i < P.n_rows; ++i) {
    if (dense[i].size() != P.n_cols)
      throw Error(ErrorCode::invalid_argument, "ragged dense matrix");
    for (std::size_t j = 0; j < P.n_cols; ++j) {
      const double v = dense[i][j];
      if (v < 0.0 || !std::isfinite(v))
        throw Error(ErrorCode::invalid_argument, "matrix entries must be finite and nonnegative");
      if (v == 0.0) continue;
      P.col_idx.push_back(j);
      P.values.push_back(v);
      P.counts.push_back(0);
    }
    P.row_ptr[i + 1] = P.col_idx.size();
    if (!outflow.empty()) P.outflow[i] = outflow[i];
    if (P.row_ptr[i + 1] > P.row_ptr[i] || P.outflow[i] > 0.0) P.row_counts[i] = 1;
  }
  return P;
}

void write_matrix(std::ostream& out, const TransitionMatrix& P) {
  out << "relcoh-matrix 1\n" << P.n_rows << ' ' << P.n_cols << ' ' << P.nnz() << '\n';
  for (std::size_t i = 0; i < P.n_rows; ++i)
    for (std::size_t k = P.row_ptr[i]; k < P.row_ptr[i + 1]; ++k)
      out << i << ' ' << P.col_idx[k] << ' ' << detail::fmt(P.values[k]) << '\n';
}

void write_outflow(std::ostream& out, const TransitionMatrix& P) {
  out << "relcoh-outflow 1\n" << P.n_rows << '\n';
  for (std::size_t i = 0; i < P.n_rows; ++i)
    out << i << ' ' << P.row_counts[i] << ' ' << detail::fmt(P.outflow[i]) << '\n';
}

TransitionMatrix read_matrix(std::istream& matrix_in, std::istream& outflow_in) {
  detail::TokenReader mr(matrix_in, "matrix");
  mr.expect("relcoh-matrix");
  if (mr.count() != 1) mr.fail("unsupported version");
  TransitionMatrix P;
  P.n_rows = mr.count();
  P.n_cols = mr.count();
  const std::size_t nnz = mr.count();

  detail::TokenReader orr(outflow_in, "outflow");
  orr.expect("relcoh-outflow");
  if (orr.count() != 1) orr.fail("unsupported version");
  if (orr.count() != P.n_rows) orr.fail("row count differs from matrix header");
  P.row_counts.resize(P.n_rows);
  P.outflow.resize(P.n_rows);
  P.outflow_counts.resize(P.n_rows);
  for (std::size_t i = 0; i < P.n_rows; ++i) {
    if (orr.count() != i) orr.fail("rows out of order");
    P.row_counts[i] = orr.count();
    P.outflow[i] = orr.real();
    P.outflow_counts[i] = static_cast<std::uint64_t>(
        std::llround(P.outflow[i] * static_cast<double>(P.row_counts[i])));
  }

  P.row_ptr.assign(P.n_rows + 1, 0);
  P.col_idx.reserve(nnz);
  P.values.reserve(nnz);
  P.counts.reserve(nnz);
  std::size_t prev_i = 0, prev_j = 0;
  for (std::size_t k = 0; k < nnz; ++k) {
    const std::size_t i = mr.count();
    const std::size_t j = mr.count();
    const double v = mr.real();
    if (i >= P.n_rows || j >= P.n_cols) mr.fail("entry index out of range");
    if (k > 0 && (i < prev_i || (i == prev_i && j <= prev_j))) mr.fail("entries not row-major sorted");
    prev_i = i;
    prev_j = j;
    P.col_idx.push_back(j);
    P.values.push_back(v);
    P.counts.push_back(static_cast<std::uint64_t>(
        std::llround(v * static_cast<double>(P.row_counts[i]))));
    ++P.row_ptr[i + 1];
  }
  for (std::size_t i = 0; i < P.n_rows; ++i) P.row_ptr[i + 1] += P.row_ptr[i];
  return P;
}

}  // namespace relcoh
