#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "relcoh/error.hpp"
#include "relcoh/mesh.hpp"

using namespace relcoh;

namespace {

// Wilson-Hilferty upper quantile of chi-square with k degrees of freedom.
double chi2_upper(double k, double z) {
  const double a = 2.0 / (9.0 * k);
  return k * std::pow(1.0 - a + z * std::sqrt(a), 3.0);
}

}  // namespace

TEST_CASE("triangle counts of the uniform meshes") {
  CHECK(build_uniform({0, 2, 0, 1}, 110, 110).size() == 24200);
  CHECK(build_uniform({0, 1, 0, 1}, 100, 100).size() == 20000);
  const TriMesh one = build_uniform({0, 1, 0, 1}, 1, 1);
  REQUIRE(one.size() == 2);
  CHECK(one.triangle_area(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(one.triangle_area(1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("degenerate rect is rejected") {
  try {
    build_uniform({1, 1, 0, 1}, 2, 2);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_domain);
  }
  CHECK_THROWS_AS(build_uniform({0, 1, 0, 1}, 0, 2), Error);
}

TEST_CASE("locate examples") {
  const TriMesh m = build_uniform({0, 1, 0, 1}, 1, 1);
  CHECK(m.locate({0.75, 0.25}) == 0);
  CHECK(m.locate({0.25, 0.75}) == 1);
  CHECK(m.locate({-0.5, 0.5}) == kOutside);
  CHECK(m.locate({0.5, 0.5}) == 0);
  CHECK(locate(m, {1.0, 1.0}) != kOutside);
  try {
    m.locate({std::nan(""), 0.5});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_point);
  }
}

TEST_CASE("area sums to the rect area") {
  const TriMesh m = build_uniform({-1.5, 2.25, 0.5, 3.0}, 37, 23);
  double total = 0.0;
  for (std::size_t t = 0; t < m.size(); ++t) total += m.triangle_area(t);
  CHECK(std::abs(total - m.rect().area()) <= 1e-12 * m.rect().area());
}

TEST_CASE("centroids locate to their own triangle") {
  const TriMesh m = build_uniform({0, 2, 0, 1}, 40, 20);
  for (std::size_t t = 0; t < m.size(); ++t) REQUIRE(m.locate(m.centroid(t)) == t);
}

TEST_CASE("uniform points tile the mesh (chi-square)") {
  const TriMesh m = build_uniform({0, 2, 0, 1}, 10, 10);
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> ux(0.0, 2.0), uy(0.0, 1.0);
  const std::size_t n = 100000;
  std::vector<double> counts(m.size(), 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t t = m.locate({ux(rng), uy(rng)});
    REQUIRE(t != kOutside);
    counts[t] += 1.0;
  }
  const double expected = static_cast<double>(n) / static_cast<double>(m.size());
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // z = 4.753 is the standard normal quantile for 1e-6.
  CHECK(chi2 < chi2_upper(static_cast<double>(m.size() - 1), 4.753));
}

TEST_CASE("uniform partition weights") {
  auto two = std::make_shared<const TriMesh>(build_uniform({0, 1, 0, 1}, 1, 1));
  const Partition p2 = uniform_partition(two, all_cells(*two));
  CHECK(p2.weights == std::vector<double>{0.5, 0.5});

  auto big = std::make_shared<const TriMesh>(build_uniform({0, 2, 0, 1}, 110, 110));
  const Partition pb = uniform_partition(big, all_cells(*big));
  CHECK(pb.weights.front() == doctest::Approx(1.0 / 24200));
  CHECK(pb.total() == doctest::Approx(1.0));

  auto four = std::make_shared<const TriMesh>(build_uniform({0, 2, 0, 1}, 2, 1));
  const Partition p4 = uniform_partition(four, {0, 1});
  CHECK(p4.weights == std::vector<double>{0.5, 0.5, 0.0, 0.0});
  CHECK(p4.is_active(1));
  CHECK_FALSE(p4.is_active(2));

  try {
    uniform_partition(four, {});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::empty_partition);
  }
}

TEST_CASE("occupancy mask examples") {
  const TriMesh two = build_uniform({0, 1, 0, 1}, 1, 1);
  std::vector<Point2> inside = {{0.8, 0.1}, {0.9, 0.2}, {0.7, 0.05}};
  CHECK(occupancy_mask(two, inside) == IndexSet{0});

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point2> full(10000);
  for (auto& p : full) p = {u(rng), u(rng)};
  CHECK(occupancy_mask(two, full) == IndexSet{0, 1});

  const TriMesh grid = build_uniform({0, 1, 0, 1}, 2, 2);
  std::vector<Point2> lower(5000);
  for (auto& p : lower) p = {u(rng), 0.5 * u(rng)};
  const IndexSet mask = occupancy_mask(grid, lower);
  for (std::size_t t : mask) CHECK(grid.centroid(t).y < 0.5);
  CHECK(mask.size() == 4);

  std::vector<Point2> outside = {{2.0, 2.0}};
  CHECK(occupancy_mask(grid, outside).empty());
}

TEST_CASE("mesh description round trip") {
  const TriMesh m = build_uniform({0.25, 3.5, -1, 2}, 7, 5);
  const IndexSet active = {0, 3, 4, 69};
  std::stringstream s;
  write_mesh(s, m, active);
  const MeshDescription d = read_mesh(s);
  CHECK(d.rect == m.rect());
  CHECK(d.nx == 7);
  CHECK(d.ny == 5);
  CHECK(d.active == active);
}
