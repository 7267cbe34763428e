#include <doctest.h>

#include <algorithm>
#include <random>

#include "relcoh/coherence.hpp"
#include "relcoh/error.hpp"

using namespace relcoh;

namespace {

TransitionMatrix random_stochastic(std::size_t m, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> d(m, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    // Banded structure gives a nontrivial second vector.
    for (std::size_t j = 0; j < n; ++j) {
      const double di = std::abs(static_cast<double>(i) / m - static_cast<double>(j) / n);
      if (di < 0.15 && u(rng) < 0.7) s += (d[i][j] = u(rng));
    }
    if (s == 0.0) s = d[i][i * n / m] = 1.0;
    for (auto& x : d[i]) x /= s;
  }
  return matrix_from_dense(d);
}

}  // namespace

TEST_CASE("coherence ratio examples") {
  const TransitionMatrix I = matrix_from_dense({{1, 0}, {0, 1}});
  const std::vector<double> p = {0.5, 0.5};
  CHECK(coherence_ratio(I, p, IndexSet{0}, IndexSet{0}) == 1.0);
  const TransitionMatrix P = matrix_from_dense({{0.9, 0.1}, {0.1, 0.9}});
  CHECK(coherence_ratio(P, p, IndexSet{0}, IndexSet{0}) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(coherence_ratio(P, p, IndexSet{0, 1}, IndexSet{0, 1}) == doctest::Approx(1.0).epsilon(1e-15));
  try {
    coherence_ratio(P, std::vector<double>{0.0, 1.0}, IndexSet{0}, IndexSet{0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::undefined_ratio);
  }
}

TEST_CASE("coherence ratio is scale invariant") {
  const TransitionMatrix P = random_stochastic(30, 30, 4);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> p(30);
  for (auto& x : p) x = u(rng);
  const IndexSet rows = {0, 3, 4, 9, 17, 22}, cols = {1, 2, 3, 10, 20};
  const double r = coherence_ratio(P, p, rows, cols);
  CHECK(r >= 0.0);
  CHECK(r <= 1.0);
  for (double c : {1e-3, 0.37, 12.0, 1e4}) {
    std::vector<double> q = p;
    for (auto& x : q) x *= c;
    CHECK(std::abs(coherence_ratio(P, q, rows, cols) - r) <= 1e-12);
  }
}

TEST_CASE("two-state split") {
  const TransitionMatrix P = matrix_from_dense({{0.9, 0.1}, {0.1, 0.9}});
  const std::vector<double> p = {0.5, 0.5};
  const SingularPair sv = second_singular(P);
  const auto [a, b] = optimize_split(P, p, sv, 0.05);
  CHECK(a.rows.size() == 1);
  CHECK(b.rows.size() == 1);
  CHECK(a.rows != b.rows);
  CHECK(a.rows == a.cols);
  CHECK(a.rho == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(a.rho_complement == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(b.rho == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("block-invariant split from a given second vector") {
  const TransitionMatrix I = matrix_from_dense({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}});
  SingularPair sv;
  sv.sigma1 = sv.sigma2 = 1.0;
  sv.left2 = sv.right2 = {0.5, 0.5, -0.5, -0.5};
  const std::vector<double> p(4, 0.25);
  const auto [a, b] = optimize_split(I, p, sv, 0.05);
  CHECK(a.rows == IndexSet{0, 1});
  CHECK(a.cols == IndexSet{0, 1});
  CHECK(b.rows == IndexSet{2, 3});
  CHECK(a.rho == 1.0);
  CHECK(a.rho_complement == 1.0);
  CHECK(a.b_star == -0.5);
}

TEST_CASE("min_mass excludes lopsided candidates") {
  const TransitionMatrix I = matrix_from_dense({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  SingularPair sv;
  sv.left2 = sv.right2 = {0.9, 0.1, -0.5};
  const std::vector<double> p = {0.02, 0.49, 0.49};
  const SplitResult r = optimize_split(I, p, sv, SplitOptions{0.05});
  CHECK(r.pair.rows == IndexSet{0, 1});
  CHECK_FALSE(r.trace.front().admissible);
  try {
    optimize_split(I, std::vector<double>{0.02, 0.96, 0.02}, sv, SplitOptions{0.05});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::no_split);
  }
  CHECK_THROWS_AS(optimize_split(I, p, sv, SplitOptions{0.5}), Error);
}

TEST_CASE("returned split is optimal over the scanned candidates") {
  for (std::uint64_t seed : {2u, 7u, 13u}) {
    const TransitionMatrix P = random_stochastic(40, 36, seed);
    const std::vector<double> p(40, 1.0 / 40);
    const SingularPair sv = second_singular(P);
    const SplitResult r = optimize_split(P, p, sv);
    CHECK(std::abs(coherence_ratio(P, p, r.pair.rows, r.pair.cols) - r.pair.rho) <= 1e-12);
    CHECK(std::abs(coherence_ratio(P, p, r.complement.rows, r.complement.cols) -
                   r.pair.rho_complement) <= 1e-12);
    const double best = r.pair.rho + r.pair.rho_complement;

    const std::vector<double> v = push_measure(P, p);
    for (const SplitCandidate& c : r.trace) {
      if (!c.admissible) continue;
      // Rebuild the candidate's sets from its thresholds.
      IndexSet x, xc, y, yc;
      for (std::size_t i = 0; i < P.n_rows; ++i) (sv.left2[i] > c.b ? x : xc).push_back(i);
      for (std::size_t j = 0; j < P.n_cols; ++j)
        if (v[j] > 0.0) (sv.right2[j] > c.c ? y : yc).push_back(j);
      const double rho = y.empty() ? 0.0 : coherence_ratio(P, p, x, y);
      const double rhoc = yc.empty() ? 0.0 : coherence_ratio(P, p, xc, yc);
      CHECK(std::abs(rho - c.rho) <= 1e-12);
      CHECK(std::abs(rhoc - c.rho_complement) <= 1e-12);
      CHECK(rho + rhoc <= best + 1e-12);
      CHECK(c.rho >= 0.0);
      CHECK(c.rho <= 1.0);
    }
  }
}
