#include <doctest.h>

#include <set>
#include <sstream>

#include "relcoh/coherence.hpp"
#include "relcoh/error.hpp"
#include "relcoh/hierarchy.hpp"

using namespace relcoh;

namespace {

// Four nearly invariant blocks of `size` cells, coupled at strength eps.
TransitionMatrix four_blocks(std::size_t size, double eps) {
  const std::size_t n = 4 * size;
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = i / size;
    const std::size_t partner = b ^ 1;  // pairs (0,1) and (2,3) are closer
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t c = j / size;
      if (c == b) d[i][j] = (1.0 - 3 * eps) / size;
      else if (c == partner) d[i][j] = 2 * eps / size;
      else d[i][j] = 0.5 * eps / size;
    }
  }
  return matrix_from_dense(d);
}

}  // namespace

TEST_CASE("relative weights examples") {
  const std::vector<double> p = {0.2, 0.3, 0.5};
  CHECK(relative_weights(p, IndexSet{0, 1, 2}) == std::vector<double>{0.2, 0.3, 0.5});
  const auto w = relative_weights(p, IndexSet{0, 1});
  CHECK(w[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(w[1] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(w[2] == 0.0);
  const auto z = relative_weights(p, IndexSet{2});
  CHECK(z[2] == 1.0);
  try {
    relative_weights(std::vector<double>{0.0, 1.0}, IndexSet{0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::undefined_measure);
  }
}

TEST_CASE("decoupled blocks give two invariant leaves") {
  const TransitionMatrix P = matrix_from_dense({{1, 0}, {0, 1}});
  const HierarchyTree t = build_tree(P, std::vector<double>{0.5, 0.5}, 0.5, 1, 0.05, 0);
  REQUIRE(t.root.children.size() == 2);
  CHECK(t.leaf_count() == 2);
  CHECK(t.root.children[0].rho == 1.0);
  CHECK(t.root.children[1].rho == 1.0);
  CHECK(t.root.children[0].label == "1");
  CHECK(t.root.children[1].label == "2");
  const CellLabels l = assign_labels(t);
  std::multiset<std::string> got(l.x.begin(), l.x.end());
  CHECK(got == std::multiset<std::string>{"1", "2"});
}

TEST_CASE("nested blocks build a depth-2 tree") {
  const TransitionMatrix P = four_blocks(5, 0.01);
  const std::vector<double> p(20, 1.0 / 20);
  const HierarchyTree t = build_tree(P, p, 0.9, 2, 0.05, 0);
  CHECK(t.reached_depth() == 2);
  CHECK(t.leaf_count() == 4);
  for (const auto* n : t.nodes()) {
    if (n->is_leaf()) {
      CHECK(n->rows.size() == 5);
      CHECK(n->status == NodeStatus::max_depth);
      continue;
    }
    CHECK(n->status == NodeStatus::split);
    CHECK(*n->rho_star >= 0.9);
    CHECK(*n->rho_star == std::min(n->split_rho, n->split_rho_complement));
    const auto& a = n->children[0];
    const auto& b = n->children[1];
    CHECK(a.label == n->label + "1");
    CHECK(b.label == n->label + "2");
    for (std::size_t i : a.rows) {
      CHECK(std::binary_search(n->rows.begin(), n->rows.end(), i));
      CHECK_FALSE(std::binary_search(b.rows.begin(), b.rows.end(), i));
    }
    for (std::size_t j : a.cols) CHECK(std::binary_search(n->cols.begin(), n->cols.end(), j));
  }
  const CellLabels l = assign_labels(t);
  for (const auto& s : l.x) CHECK(std::set<std::string>{"11", "12", "21", "22"}.count(s) == 1);
}

TEST_CASE("stopping rule yields below-threshold leaves") {
  const TransitionMatrix P = four_blocks(5, 0.01);
  const std::vector<double> p(20, 1.0 / 20);
  const HierarchyTree t = build_tree(P, p, 0.999, 3, 0.05, 0);
  CHECK(t.root.status == NodeStatus::below_threshold);
  CHECK(t.leaf_count() == 1);
  CHECK(t.root.rho_star.has_value());
  CHECK(*t.root.rho_star < 0.999);
}

TEST_CASE("node ratios agree with global weights") {
  const TransitionMatrix P = four_blocks(6, 0.02);
  std::vector<double> p(24);
  for (std::size_t i = 0; i < 24; ++i) p[i] = 1.0 + 0.1 * static_cast<double>(i % 5);
  double s = 0.0;
  for (double x : p) s += x;
  for (double& x : p) x /= s;
  const HierarchyTree t = build_tree(P, p, 0.8, 3, 0.05, 0);
  for (const auto* n : t.nodes()) {
    CHECK(std::abs(coherence_ratio(P, p, n->rows, n->cols) - n->rho) <= 1e-12);
    if (n->label.empty()) continue;
    const auto w = relative_weights(p, n->rows);
    double total = 0.0;
    for (std::size_t i : n->rows) total += w[i];
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("unoccupied rows stay unassigned") {
  const TransitionMatrix P = matrix_from_dense({{1, 0, 0}, {0, 0, 0}, {0, 0, 1}});
  const HierarchyTree t = build_tree(P, std::vector<double>{0.5, 0.0, 0.5}, 0.5, 1, 0.05, 0);
  const CellLabels l = assign_labels(t, 3, 3);
  CHECK(l.x[1] == kUnassigned);
  CHECK(l.y[1] == kUnassigned);
  CHECK(l.x[0] != l.x[2]);
}

TEST_CASE("tree text round trip and determinism") {
  const TransitionMatrix P = four_blocks(4, 0.03);
  const std::vector<double> p(16, 1.0 / 16);
  const HierarchyTree t = build_tree(P, p, 0.85, 3, 0.05, 1);
  std::stringstream a;
  write_tree(a, t);
  const HierarchyTree r = read_tree(a);
  std::stringstream b;
  write_tree(b, r);
  CHECK(a.str() == b.str());
  CHECK(r.leaf_count() == t.leaf_count());

  std::stringstream c;
  write_tree(c, build_tree(P, p, 0.85, 3, 0.05, 1));
  CHECK(c.str() == a.str());

  const std::vector<std::string> labels = {"11", "-", "2", "12"};
  std::stringstream ls;
  write_labels(ls, labels);
  CHECK(read_labels(ls) == labels);
}

TEST_CASE("invalid tree options") {
  const TransitionMatrix P = matrix_from_dense({{1, 0}, {0, 1}});
  const std::vector<double> p = {0.5, 0.5};
  CHECK_THROWS_AS(build_tree(P, p, 1.0, 2, 0.05, 0), Error);
  CHECK_THROWS_AS(build_tree(P, p, 0.9, 0, 0.05, 0), Error);
}
