#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "relcoh/error.hpp"
#include "relcoh/spectral.hpp"

using namespace relcoh;

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

std::vector<std::vector<double>> random_sparse(std::size_t m, std::size_t n, double density,
                                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> d(m, std::vector<double>(n, 0.0));
  for (auto& row : d) {
    double s = 0.0;
    for (auto& x : row)
      if (u(rng) < density) s += (x = u(rng));
    if (s == 0.0) s += (row[static_cast<std::size_t>(u(rng) * static_cast<double>(n)) % n] = 1.0);
    for (auto& x : row) x /= s;
  }
  return d;
}

}  // namespace

TEST_CASE("symmetric 2x2 example") {
  const SingularPair s = second_singular(matrix_from_dense({{0.9, 0.1}, {0.1, 0.9}}));
  CHECK(s.sigma1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.sigma2 == doctest::Approx(0.8).epsilon(1e-12));
  CHECK_FALSE(s.degenerate);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(std::abs(s.left2[0]) - r) < 1e-10);
  CHECK(s.left2[0] * s.left2[1] < 0.0);
  CHECK(std::abs(std::abs(s.right2[0]) - r) < 1e-10);
  CHECK(s.right2[0] * s.right2[1] < 0.0);
}

TEST_CASE("permutation and identity are degenerate") {
  const SingularPair p = second_singular(matrix_from_dense({{0, 1}, {1, 0}}));
  CHECK(p.sigma1 == doctest::Approx(1.0));
  CHECK(p.sigma2 == doctest::Approx(1.0));
  CHECK(p.degenerate);
  CHECK_FALSE(p.warning.empty());
  const SingularPair i = second_singular(matrix_from_dense({{1, 0}, {0, 1}}));
  CHECK(i.sigma2 == doctest::Approx(1.0));
  CHECK(i.degenerate);
}

TEST_CASE("agreement with a dense SVD") {
  int compared = 0;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto d = random_sparse(60, 80, 0.08, seed);
    const TransitionMatrix P = matrix_from_dense(d);
    Eigen::MatrixXd A(60, 80);
    for (int i = 0; i < 60; ++i)
      for (int j = 0; j < 80; ++j) A(i, j) = d[i][j];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto sv = svd.singularValues();
    const SingularPair s = second_singular(P, 1e-12, 50000, seed);

    CHECK(s.sigma1 >= s.sigma2);
    CHECK(std::abs(norm(s.left2) - 1.0) < 1e-10);
    CHECK(std::abs(norm(s.right2) - 1.0) < 1e-10);
    CHECK(s.residual <= 1e-8);
    CHECK(std::abs(dot(s.left1, s.left2)) <= 1e-8);
    CHECK(std::abs(dot(s.right1, s.right2)) <= 1e-8);
    if (sv(1) - sv(2) <= 1e-6 || sv(0) - sv(1) <= 1e-6) continue;
    ++compared;
    CHECK(std::abs(s.sigma1 - sv(0)) <= 1e-8);
    CHECK(std::abs(s.sigma2 - sv(1)) <= 1e-8);
    std::vector<double> u(60), v(80);
    for (int i = 0; i < 60; ++i) u[i] = svd.matrixU()(i, 1);
    for (int j = 0; j < 80; ++j) v[j] = svd.matrixV()(j, 1);
    CHECK(std::abs(dot(u, s.left2)) >= 1.0 - 1e-8);
    CHECK(std::abs(dot(v, s.right2)) >= 1.0 - 1e-8);
  }
  CHECK(compared >= 6);
}

TEST_CASE("empty rows and columns get zero vector entries") {
  const TransitionMatrix P = matrix_from_dense({{0.5, 0.5, 0.0, 0.0},
                                                {0.0, 0.0, 0.0, 0.0},
                                                {0.2, 0.0, 0.8, 0.0},
                                                {0.0, 0.3, 0.0, 0.7}});
  const SingularPair s = second_singular(P);
  CHECK(s.left2[1] == 0.0);
  CHECK(s.left1[1] == 0.0);
  CHECK(std::abs(norm(s.left2) - 1.0) < 1e-10);
}

TEST_CASE("fixed seed gives identical output") {
  const TransitionMatrix P = matrix_from_dense(random_sparse(40, 40, 0.2, 77));
  const SingularPair a = second_singular(P, 1e-11, 20000, 3);
  const SingularPair b = second_singular(P, 1e-11, 20000, 3);
  CHECK(a.left2 == b.left2);
  CHECK(a.sigma2 == b.sigma2);
}

TEST_CASE("measure weighting option") {
  const TransitionMatrix P = matrix_from_dense({{0.9, 0.1}, {0.1, 0.9}});
  SpectralOptions o;
  o.weighting = SvdWeighting::measure;
  o.row_weights = {0.5, 0.5};
  const SingularPair s = second_singular(P, o);
  CHECK(s.sigma2 == doctest::Approx(0.8).epsilon(1e-10));
  o.row_weights = {1.0};
  CHECK_THROWS_AS(second_singular(P, o), Error);
}
