#include "relcoh/verify.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "relcoh/coherence.hpp"
#include "relcoh/error.hpp"
#include "text_io.hpp"

namespace relcoh {

bool VerifyReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* VerifyReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

constexpr double kRowTol = 1e-12;
constexpr double kRhoTol = 1e-12;

std::string node_name(const HierarchyNode& n) { return n.label.empty() ? "root" : n.label; }

CheckResult check_nonnegative(const TransitionMatrix& P) {
  for (std::size_t i = 0; i < P.n_rows; ++i) {
    for (std::size_t k = P.row_ptr[i]; k < P.row_ptr[i + 1]; ++k)
      if (!(P.values[k] >= 0.0) || !std::isfinite(P.values[k]))
        return {"matrix-nonnegative", false,
                "row " + std::to_string(i) + ": entry (" + std::to_string(i) + ", " +
                    std::to_string(P.col_idx[k]) + ") = " + detail::fmt(P.values[k])};
    if (!(P.outflow[i] >= 0.0) || !std::isfinite(P.outflow[i]))
      return {"matrix-nonnegative", false,
              "row " + std::to_string(i) + ": outflow " + detail::fmt(P.outflow[i])};
  }
  return {"matrix-nonnegative", true, std::to_string(P.nnz()) + " entries"};
}

CheckResult check_rows(const TransitionMatrix& P) {
  std::size_t occupied = 0;
  for (std::size_t i = 0; i < P.n_rows; ++i) {
    const std::string row = "row " + std::to_string(i) + ": ";
    if (P.row_counts[i] == 0) {
      if (P.row_ptr[i + 1] != P.row_ptr[i] || P.outflow[i] != 0.0)
        return {"row-conservation", false, row + "entries in a row with no samples"};
      continue;
    }
    ++occupied;
    const double rc = static_cast<double>(P.row_counts[i]);
    double sum = P.outflow[i];
    std::uint64_t count_sum = P.outflow_counts[i];
    auto integral = [&](double v) { return std::abs(v * rc - std::round(v * rc)) <= 1e-6; };
    if (!integral(P.outflow[i]))
      return {"row-conservation", false, row + "outflow is not a multiple of 1/" +
                                             std::to_string(P.row_counts[i])};
    for (std::size_t k = P.row_ptr[i]; k < P.row_ptr[i + 1]; ++k) {
      if (!integral(P.values[k]))
        return {"row-conservation", false,
                row + "entry " + std::to_string(P.col_idx[k]) + " = " + detail::fmt(P.values[k]) +
                    " is not a multiple of 1/" + std::to_string(P.row_counts[i])};
      sum += P.values[k];
      count_sum += P.counts[k];
    }
    if (count_sum != P.row_counts[i])
      return {"row-conservation", false,
              row + "counts sum to " + std::to_string(count_sum) + " of " +
                  std::to_string(P.row_counts[i])};
    if (std::abs(sum - 1.0) > kRowTol)
      return {"row-conservation", false, row + "row sum + outflow = " + detail::fmt(sum)};
  }
  return {"row-conservation", true, std::to_string(occupied) + " occupied rows sum to 1"};
}

CheckResult check_closed(const TransitionMatrix& P, bool open) {
  double total = 0.0;
  std::size_t leaking = 0;
  for (std::size_t i = 0; i < P.n_rows; ++i) {
    total += P.outflow[i];
    leaking += P.outflow[i] > 0.0 ? 1 : 0;
  }
  if (open)
    return {"closed-outflow", true,
            "open system: " + std::to_string(leaking) + " rows with outflow, total " +
                detail::fmt(total)};
  for (std::size_t i = 0; i < P.n_rows; ++i)
    if (P.outflow[i] != 0.0)
      return {"closed-outflow", false,
              "row " + std::to_string(i) + ": outflow " + detail::fmt(P.outflow[i]) +
                  " in a closed system"};
  return {"closed-outflow", true, "no outflow"};
}

bool sorted_unique(const IndexSet& s) {
  return std::adjacent_find(s.begin(), s.end(), std::greater_equal<>()) == s.end();
}

bool subset_of(const IndexSet& a, const IndexSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

bool disjoint(const IndexSet& a, const IndexSet& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return false;
    a[i] < b[j] ? ++i : ++j;
  }
  return true;
}

CheckResult check_nesting(const HierarchyTree& tree, const TransitionMatrix& P) {
  if (tree.n_rows != P.n_rows || tree.n_cols != P.n_cols)
    return {"tree-nesting", false, "tree dimensions differ from the matrix"};
  for (const auto* n : tree.nodes()) {
    const std::string at = "node " + node_name(*n) + ": ";
    if (!sorted_unique(n->rows) || !sorted_unique(n->cols))
      return {"tree-nesting", false, at + "index lists are not sorted and unique"};
    if ((!n->rows.empty() && n->rows.back() >= P.n_rows) ||
        (!n->cols.empty() && n->cols.back() >= P.n_cols))
      return {"tree-nesting", false, at + "index out of range"};
    if (n->is_leaf()) continue;
    if (n->children.size() != 2)
      return {"tree-nesting", false, at + "has " + std::to_string(n->children.size()) + " children"};
    const auto& a = n->children[0];
    const auto& b = n->children[1];
    if (a.label != n->label + '1' || b.label != n->label + '2')
      return {"tree-nesting", false, at + "children are not labeled " + n->label + "1/" + n->label + "2"};
    if (!subset_of(a.rows, n->rows) || !subset_of(b.rows, n->rows))
      return {"tree-nesting", false, at + "child rows are not a subset of the parent's"};
    if (!subset_of(a.cols, n->cols) || !subset_of(b.cols, n->cols))
      return {"tree-nesting", false, at + "child columns are not a subset of the parent's"};
    if (!disjoint(a.rows, b.rows)) return {"tree-nesting", false, at + "child rows overlap"};
    if (!disjoint(a.cols, b.cols)) return {"tree-nesting", false, at + "child columns overlap"};
  }
  return {"tree-nesting", true, std::to_string(tree.nodes().size()) + " nodes nested and disjoint"};
}

CheckResult check_stopping(const HierarchyTree& tree) {
  std::size_t internal = 0;
  for (const auto* n : tree.nodes()) {
    const std::string at = "node " + node_name(*n) + ": ";
    if (n->depth > tree.max_depth)
      return {"stopping-soundness", false, at + "depth exceeds max_depth"};
    if (!n->is_leaf()) {
      ++internal;
      if (n->status != NodeStatus::split)
        return {"stopping-soundness", false, at + "internal node with status " + to_string(n->status)};
      if (!n->rho_star || *n->rho_star < tree.rho0)
        return {"stopping-soundness", false,
                at + "internal node with rho_star " +
                    (n->rho_star ? detail::fmt(*n->rho_star) : std::string("none")) + " < rho0 " +
                    detail::fmt(tree.rho0)};
      continue;
    }
    switch (n->status) {
      case NodeStatus::split:
        return {"stopping-soundness", false, at + "leaf marked as split"};
      case NodeStatus::below_threshold:
        if (!n->rho_star || *n->rho_star >= tree.rho0)
          return {"stopping-soundness", false, at + "below-threshold leaf with rho_star >= rho0"};
        break;
      case NodeStatus::max_depth:
        if (n->depth != tree.max_depth)
          return {"stopping-soundness", false, at + "max-depth leaf above max_depth"};
        break;
      case NodeStatus::no_split: break;
    }
  }
  return {"stopping-soundness", true,
          std::to_string(internal) + " internal nodes with rho_star >= " + detail::fmt(tree.rho0)};
}

CheckResult check_rho(const HierarchyTree& tree, const TransitionMatrix& P,
                      const std::vector<double>& p) {
  if (p.size() != P.n_rows) return {"rho-recomputation", false, "domain weights do not match rows"};
  double worst = 0.0;
  for (const auto* n : tree.nodes()) {
    const std::string at = "node " + node_name(*n) + ": ";
    if (n->rows.empty()) continue;
    double rho;
    try {
      rho = coherence_ratio(P, p, n->rows, n->cols);
    } catch (const Error& e) {
      return {"rho-recomputation", false, at + e.what()};
    }
    const double err = std::abs(rho - n->rho);
    worst = std::max(worst, err);
    if (err > kRhoTol)
      return {"rho-recomputation", false,
              at + "stored rho " + detail::fmt(n->rho) + ", recomputed " + detail::fmt(rho)};
    if (!n->is_leaf()) {
      if (n->split_rho != n->children[0].rho || n->split_rho_complement != n->children[1].rho)
        return {"rho-recomputation", false, at + "split ratios differ from the children's rho"};
      if (*n->rho_star != std::min(n->split_rho, n->split_rho_complement))
        return {"rho-recomputation", false, at + "rho_star is not min(rho, rho_complement)"};
    }
  }
  return {"rho-recomputation", true, "max deviation " + detail::fmt(worst)};
}

CheckResult check_labels(const LoadedBundle& b) {
  if (b.labels_x.size() != b.domain_mesh->size() || b.labels_y.size() != b.image_mesh->size())
    return {"cell-labels", false, "label files do not match the mesh sizes"};
  const CellLabels expect = assign_labels(b.tree, b.labels_x.size(), b.labels_y.size());
  for (std::size_t i = 0; i < expect.x.size(); ++i)
    if (expect.x[i] != b.labels_x[i])
      return {"cell-labels", false,
              "domain cell " + std::to_string(i) + ": label " + b.labels_x[i] + ", tree says " +
                  expect.x[i]};
  for (std::size_t j = 0; j < expect.y.size(); ++j)
    if (expect.y[j] != b.labels_y[j])
      return {"cell-labels", false,
              "image cell " + std::to_string(j) + ": label " + b.labels_y[j] + ", tree says " +
                  expect.y[j]};
  return {"cell-labels", true, "labels match the tree leaves"};
}

}  // namespace

VerifyReport verify_bundle(const LoadedBundle& b) {
  VerifyReport r;
  const TransitionMatrix& P = b.matrix;
  r.checks.push_back(check_nonnegative(P));
  r.checks.push_back(check_rows(P));
  r.checks.push_back(check_closed(P, b.config.open()));
  r.checks.push_back(check_nesting(b.tree, P));
  r.checks.push_back(check_stopping(b.tree));
  r.checks.push_back(check_rho(b.tree, P, b.domain.weights));
  r.checks.push_back(check_labels(b));
  return r;
}

VerifyReport verify_bundle(const std::string& dir) {
  LoadedBundle b;
  try {
    b = load_bundle(dir);
  } catch (const Error& e) {
    throw Error(ErrorCode::io, "cannot read bundle '" + dir + "': " + e.what());
  }
  return verify_bundle(b);
}

void write_report(std::ostream& out, const VerifyReport& report) {
  for (const auto& c : report.checks)
    out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  out << (report.ok() ? "all checks passed" : "verification failed") << '\n';
}

}  // namespace relcoh
