#include "relcoh/spectral.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <random>

#include "relcoh/error.hpp"
#include "text_io.hpp"

namespace relcoh {

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

Vec random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

// Two passes of classical Gram-Schmidt against the columns of Q.
void orthogonalize(Vec& w, const Eigen::Ref<const Mat>& Q) {
  if (Q.cols() == 0) return;
  for (int pass = 0; pass < 2; ++pass) w.noalias() -= Q * (Q.transpose() * w);
}

struct Eigenpair {
  double value = 0.0;
  Vec vector;
};

// Largest eigenpair of a symmetric positive semidefinite operator on the
// orthogonal complement of span(deflate), by thick-restart Lanczos with
// full reorthogonalization.
template <class Op>
Eigenpair top_eigenpair(const Op& op, Eigen::Index n, const Mat& deflate, double tol,
                        std::size_t max_ops, std::size_t krylov_dim, std::mt19937_64& rng,
                        std::size_t& ops) {
  const Eigen::Index free_dim = n - deflate.cols();
  if (free_dim < 1) throw Error(ErrorCode::invalid_argument, "no dimensions left after deflation");
  const Eigen::Index m = std::min<Eigen::Index>(static_cast<Eigen::Index>(krylov_dim), free_dim);
  const Eigen::Index keep = std::max<Eigen::Index>(1, m / 2);

  Mat V = Mat::Zero(n, m + 1);
  Mat H = Mat::Zero(m + 1, m + 1);

  auto fresh_direction = [&](Eigen::Index filled, Vec& out) {
    for (int attempt = 0; attempt < 4; ++attempt) {
      out = random_vector(n, rng);
      orthogonalize(out, deflate);
      orthogonalize(out, V.leftCols(filled));
      const double nrm = out.norm();
      if (nrm > 1e-8) {
        out /= nrm;
        return true;
      }
    }
    return false;
  };

  Vec start;
  if (!fresh_direction(0, start))
    throw Error(ErrorCode::invalid_argument, "could not draw a starting vector");
  V.col(0) = start;

  Eigen::Index kstart = 0;
  double last_residual = std::numeric_limits<double>::infinity();
  while (true) {
    Eigen::Index used = m;
    bool exhausted = false;
    double beta = 0.0;
    for (Eigen::Index j = kstart; j < m; ++j) {
      Vec w = op(V.col(j));
      ++ops;
      orthogonalize(w, deflate);
      Vec h = V.leftCols(j + 1).transpose() * w;
      w.noalias() -= V.leftCols(j + 1) * h;
      const Vec h2 = V.leftCols(j + 1).transpose() * w;
      w.noalias() -= V.leftCols(j + 1) * h2;
      h += h2;
      for (Eigen::Index i = 0; i <= j; ++i) H(i, j) = H(j, i) = h(i);

      beta = w.norm();
      const double scale = std::max(H.topLeftCorner(j + 1, j + 1).cwiseAbs().maxCoeff(),
                                    std::numeric_limits<double>::min());
      if (beta <= 1e-13 * scale) {
        // Invariant subspace: continue with a new direction, uncoupled.
        beta = 0.0;
        Vec r;
        if (j + 1 >= free_dim || !fresh_direction(j + 1, r)) {
          used = j + 1;
          exhausted = true;
          break;
        }
        V.col(j + 1) = r;
      } else {
        V.col(j + 1) = w / beta;
      }
      H(j + 1, j) = H(j, j + 1) = beta;
    }

    Eigen::SelfAdjointEigenSolver<Mat> es(H.topLeftCorner(used, used));
    const Vec& theta = es.eigenvalues();
    const Mat& Y = es.eigenvectors();
    const double top = theta(used - 1);
    const double res = exhausted ? 0.0 : std::abs(beta * Y(used - 1, used - 1));
    last_residual = res;

    if (exhausted || res <= tol * std::max(top, 1e-300)) {
      Vec x = V.leftCols(used) * Y.col(used - 1);
      x.normalize();
      return {top, x};
    }
    if (ops >= max_ops)
      throw Error(ErrorCode::convergence,
                  "Lanczos did not converge within " + std::to_string(max_ops) +
                      " operator applications (residual " + detail::fmt(last_residual) + ")");

    // Thick restart: keep the leading Ritz vectors plus the residual direction.
    const Eigen::Index k = std::min<Eigen::Index>(keep, used - 1);
    Mat Yk(used, k);
    for (Eigen::Index c = 0; c < k; ++c) Yk.col(c) = Y.col(used - 1 - c);
    Mat ritz = V.leftCols(used) * Yk;
    const Vec next = V.col(used);
    V.leftCols(k) = ritz;
    V.col(k) = next;
    H.setZero();
    for (Eigen::Index c = 0; c < k; ++c) {
      H(c, c) = theta(used - 1 - c);
      H(k, c) = H(c, k) = beta * Yk(used - 1, c);
    }
    kstart = k;
  }
}

void fix_sign(Vec& lead, Vec& follow) {
  Eigen::Index arg = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < lead.size(); ++i) {
    if (std::abs(lead(i)) > best) {
      best = std::abs(lead(i));
      arg = i;
    }
  }
  if (lead(arg) < 0.0) {
    lead = -lead;
    follow = -follow;
  }
}

std::vector<double> scatter(const Vec& compact, const std::vector<std::size_t>& where,
                            std::size_t n) {
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < where.size(); ++k) out[where[k]] = compact(static_cast<Eigen::Index>(k));
  return out;
}

}  // namespace

SingularPair second_singular(const TransitionMatrix& P, double tol, std::size_t max_iter,
                             std::uint64_t seed) {
  SpectralOptions opt;
  opt.tol = tol;
  opt.max_iter = max_iter;
  opt.seed = seed;
  return second_singular(P, opt);
}

SingularPair second_singular(const TransitionMatrix& P, const SpectralOptions& opt) {
  if (!(opt.tol > 0.0)) throw Error(ErrorCode::invalid_argument, "tolerance must be positive");
  const bool weighted = opt.weighting == SvdWeighting::measure;
  std::vector<double> colw;
  if (weighted) {
    if (opt.row_weights.size() != P.n_rows)
      throw Error(ErrorCode::invalid_argument, "measure weighting needs one weight per row");
    colw = push_measure(P, opt.row_weights);
  }

  // Compress away empty rows and columns.
  std::vector<std::size_t> row_ids;
  std::vector<std::size_t> col_pos(P.n_cols, kOutside);
  std::vector<std::size_t> col_ids;
  for (std::size_t i = 0; i < P.n_rows; ++i) {
    if (weighted && !(opt.row_weights[i] > 0.0)) continue;
    bool any = false;
    for (std::size_t k = P.row_ptr[i]; k < P.row_ptr[i + 1]; ++k) {
      if (P.values[k] == 0.0) continue;
      any = true;
      const std::size_t j = P.col_idx[k];
      if (col_pos[j] == kOutside) col_pos[j] = 0;
    }
    if (any) row_ids.push_back(i);
  }
  for (std::size_t j = 0; j < P.n_cols; ++j)
    if (col_pos[j] != kOutside) {
      col_pos[j] = col_ids.size();
      col_ids.push_back(j);
    }
  if (row_ids.size() < 2 || col_ids.size() < 2)
    throw Error(ErrorCode::invalid_argument,
                "second singular pair needs at least two occupied rows and columns");

  const auto m = static_cast<Eigen::Index>(row_ids.size());
  const auto n = static_cast<Eigen::Index>(col_ids.size());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(P.nnz());
  for (std::size_t r = 0; r < row_ids.size(); ++r) {
    const std::size_t i = row_ids[r];
    for (std::size_t k = P.row_ptr[i]; k < P.row_ptr[i + 1]; ++k) {
      if (P.values[k] == 0.0) continue;
      const std::size_t j = P.col_idx[k];
      double a = P.values[k];
      if (weighted) a *= std::sqrt(opt.row_weights[i]) / std::sqrt(colw[j]);
      trips.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col_pos[j]), a);
    }
  }
  SpMat A(m, n);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  const SpMat At = A.transpose();

  std::mt19937_64 rng(opt.seed);
  std::size_t ops = 0;
  const bool right_side = n <= m;
  const Eigen::Index dim = right_side ? n : m;
  auto normal_op = [&](const Vec& x) -> Vec {
    if (right_side) return At * (A * x);
    return A * (At * x);
  };

  const Mat none(dim, 0);
  Eigenpair first = top_eigenpair(normal_op, dim, none, opt.tol, opt.max_iter, opt.krylov_dim,
                                  rng, ops);
  Mat defl(dim, 1);
  defl.col(0) = first.vector;
  Eigenpair second = top_eigenpair(normal_op, dim, defl, opt.tol, opt.max_iter, opt.krylov_dim,
                                   rng, ops);

  // Complete each triple from the side that was iterated.
  auto complete = [&](const Vec& w, const Vec* orth_to, Vec& u, Vec& v, double& sigma) {
    Vec other = right_side ? Vec(A * w) : Vec(At * w);
    sigma = other.norm();
    if (sigma > 1e-300) {
      other /= sigma;
    } else {
      other = random_vector(other.size(), rng);
      if (orth_to) orthogonalize(other, *orth_to);
      other.normalize();
      sigma = 0.0;
    }
    if (right_side) {
      v = w;
      u = other;
    } else {
      u = w;
      v = other;
    }
  };

  Vec u1, v1, u2, v2;
  double s1 = 0.0, s2 = 0.0;
  complete(first.vector, nullptr, u1, v1, s1);
  Mat u1m(u1.size(), 1);
  u1m.col(0) = u1;
  complete(second.vector, nullptr, u2, v2, s2);
  if (s2 == 0.0) {
    Vec other = random_vector(u2.size(), rng);
    orthogonalize(other, u1m);
    u2 = other.normalized();
  }
  fix_sign(u1, v1);
  fix_sign(u2, v2);

  SingularPair out;
  out.sigma1 = s1;
  out.sigma2 = std::min(s2, s1);
  out.residual = std::max((A * v2 - out.sigma2 * u2).norm(), (At * u2 - out.sigma2 * v2).norm());
  out.matvecs = ops;
  if (out.sigma1 - out.sigma2 < opt.tol * std::max(1.0, out.sigma1)) {
    out.degenerate = true;
    out.warning = "sigma1 and sigma2 are numerically equal (" + detail::fmt(out.sigma1) + ", " +
                  detail::fmt(out.sigma2) + "); the second singular vectors are not unique";
  }

  if (weighted) {
    for (Eigen::Index r = 0; r < m; ++r) {
      const double s = std::sqrt(opt.row_weights[row_ids[static_cast<std::size_t>(r)]]);
      u1(r) /= s;
      u2(r) /= s;
    }
    for (Eigen::Index c = 0; c < n; ++c) {
      const double s = std::sqrt(colw[col_ids[static_cast<std::size_t>(c)]]);
      v1(c) /= s;
      v2(c) /= s;
    }
    u1.normalize();
    u2.normalize();
    v1.normalize();
    v2.normalize();
  }

  out.left1 = scatter(u1, row_ids, P.n_rows);
  out.right1 = scatter(v1, col_ids, P.n_cols);
  out.left2 = scatter(u2, row_ids, P.n_rows);
  out.right2 = scatter(v2, col_ids, P.n_cols);
  return out;
}

}  // namespace relcoh
