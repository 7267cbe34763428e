#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "relcoh/error.hpp"
#include "relcoh/transfer.hpp"

using namespace relcoh;

namespace {

std::vector<std::vector<double>> dense(const TransitionMatrix& P) {
  std::vector<std::vector<double>> d(P.n_rows, std::vector<double>(P.n_cols, 0.0));
  for (std::size_t i = 0; i < P.n_rows; ++i)
    for (std::size_t k = P.row_ptr[i]; k < P.row_ptr[i + 1]; ++k) d[i][P.col_idx[k]] = P.values[k];
  return d;
}

// Circle translation x -> x + r/m (mod 1), counted on m equal boxes.
TransitionMatrix circle_matrix(std::size_t m, std::size_t r, std::size_t n, unsigned workers) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::size_t> rows(n), cols(n);
  const double shift = static_cast<double>(r) / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = u(rng);
    double y = x + shift;
    y -= std::floor(y);
    rows[k] = std::min(m - 1, static_cast<std::size_t>(x * static_cast<double>(m)));
    cols[k] = std::min(m - 1, static_cast<std::size_t>(y * static_cast<double>(m)));
  }
  return build_matrix_from_cells(rows, cols, m, m, workers);
}

std::shared_ptr<const TriMesh> mesh(const Rect& r, std::size_t nx, std::size_t ny) {
  return std::make_shared<const TriMesh>(build_uniform(r, nx, ny));
}

}  // namespace

TEST_CASE("identity flow gives the identity matrix") {
  auto m = mesh({0, 1, 0, 1}, 3, 2);
  const Partition part = uniform_partition(m, all_cells(*m));
  TrajectoryEnsemble e;
  e.initial = seed_uniform(m->rect(), 3000, 4);
  e.final = e.initial;
  e.flagged.assign(e.size(), 0);
  const TransitionMatrix P = build_matrix(e, part, part);
  for (std::size_t i = 0; i < P.n_rows; ++i)
    for (std::size_t j = 0; j < P.n_cols; ++j) CHECK(P.at(i, j) == (i == j ? 1.0 : 0.0));
}

TEST_CASE("half-turn translation on two boxes is an exact swap") {
  const TransitionMatrix P = circle_matrix(2, 1, 500, 1);
  CHECK(dense(P) == std::vector<std::vector<double>>{{0.0, 1.0}, {1.0, 0.0}});
}

TEST_CASE("translation counting oracle on m boxes") {
  for (std::size_t r : {1, 3, 5}) {
    const TransitionMatrix P = circle_matrix(8, r, 10000, 0);
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < 8; ++j) CHECK(P.at(i, j) == ((i + r) % 8 == j ? 1.0 : 0.0));
  }
}

TEST_CASE("points mapped out of the image are outflow") {
  auto m = mesh({0, 1, 0, 1}, 2, 2);
  const Partition part = uniform_partition(m, all_cells(*m));
  TrajectoryEnsemble e;
  e.initial = seed_uniform(m->rect(), 1000, 8);
  for (const Point2& p : e.initial) e.final.push_back({p.x + 5.0, p.y});
  e.flagged.assign(e.size(), 0);
  const TransitionMatrix P = build_matrix(e, part, part);
  CHECK(P.nnz() == 0);
  for (std::size_t i = 0; i < P.n_rows; ++i) CHECK(P.outflow[i] == 1.0);

  TrajectoryEnsemble outside;
  outside.initial = {{3.0, 3.0}};
  outside.final = {{0.5, 0.5}};
  try {
    build_matrix(outside, part, part);
    FAIL("expected an error");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::empty_matrix);
  }
}

TEST_CASE("flagged trajectories count as outflow") {
  auto m = mesh({0, 1, 0, 1}, 1, 1);
  const Partition part = uniform_partition(m, all_cells(*m));
  TrajectoryEnsemble e;
  e.initial = {{0.9, 0.1}, {0.8, 0.1}};
  e.final = e.initial;
  e.flagged = {1, 0};
  const TransitionMatrix P = build_matrix(e, part, part);
  CHECK(P.at(0, 0) == 0.5);
  CHECK(P.outflow[0] == 0.5);
  CHECK(P.row_counts[1] == 0);
}

TEST_CASE("row conservation is exact in counts") {
  const TransitionMatrix P = circle_matrix(5, 2, 777, 3);
  for (std::size_t i = 0; i < P.n_rows; ++i) {
    std::uint64_t c = P.outflow_counts[i];
    for (std::size_t k = P.row_ptr[i]; k < P.row_ptr[i + 1]; ++k) c += P.counts[k];
    CHECK(c == P.row_counts[i]);
    CHECK(std::abs(P.row_sum(i) + P.outflow[i] - 1.0) <= 1e-12);
  }
}

TEST_CASE("push measure examples") {
  const TransitionMatrix I = matrix_from_dense({{1, 0}, {0, 1}});
  CHECK(push_measure(I, std::vector<double>{0.5, 0.5}) == std::vector<double>{0.5, 0.5});
  const TransitionMatrix S = matrix_from_dense({{0, 1}, {1, 0}});
  const auto v = push_measure(S, std::vector<double>{0.7, 0.3});
  CHECK(v[0] == doctest::Approx(0.3));
  CHECK(v[1] == doctest::Approx(0.7));
  const TransitionMatrix L = matrix_from_dense({{0, 0}, {0, 1}}, std::vector<double>{1.0, 0.0});
  CHECK(push_measure(L, std::vector<double>{1.0, 0.0}) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("restrict examples") {
  const TransitionMatrix P = matrix_from_dense({{0.9, 0.1}, {0.1, 0.9}});
  const TransitionMatrix all = restrict(P, IndexSet{0, 1}, IndexSet{0, 1});
  CHECK(dense(all) == dense(P));
  CHECK(all.outflow == P.outflow);

  const TransitionMatrix one = restrict(P, IndexSet{0}, IndexSet{0});
  CHECK(one.n_rows == 1);
  CHECK(one.nnz() == 1);
  CHECK(one.at(0, 0) == 0.9);
  CHECK(one.outflow[0] == doctest::Approx(0.1).epsilon(1e-15));

  try {
    restrict(P, IndexSet{0}, IndexSet{});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::empty_selection);
  }
}

TEST_CASE("matrix is independent of the worker count") {
  const TransitionMatrix a = circle_matrix(16, 7, 20000, 1);
  for (unsigned w : {2u, 4u, 8u}) {
    const TransitionMatrix b = circle_matrix(16, 7, 20000, w);
    CHECK(a.row_ptr == b.row_ptr);
    CHECK(a.col_idx == b.col_idx);
    CHECK(a.counts == b.counts);
    CHECK(a.values == b.values);
  }
}

TEST_CASE("matrix text round trip") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> pick(0, 6);
  std::vector<std::size_t> rows(4000), cols(4000);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    rows[k] = pick(rng) % 5;
    const std::size_t j = pick(rng);
    cols[k] = j == 6 ? kOutside : j;
  }
  const TransitionMatrix P = build_matrix_from_cells(rows, cols, 6, 6);
  std::stringstream m, o;
  write_matrix(m, P);
  write_outflow(o, P);
  const TransitionMatrix Q = read_matrix(m, o);
  CHECK(Q.n_rows == P.n_rows);
  CHECK(Q.row_ptr == P.row_ptr);
  CHECK(Q.col_idx == P.col_idx);
  CHECK(Q.values == P.values);
  CHECK(Q.counts == P.counts);
  CHECK(Q.row_counts == P.row_counts);
  CHECK(Q.outflow == P.outflow);
  CHECK(Q.outflow_counts == P.outflow_counts);
}
