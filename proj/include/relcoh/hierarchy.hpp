#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relcoh/coherence.hpp"
#include "relcoh/spectral.hpp"
#include "relcoh/transfer.hpp"

namespace relcoh {

/// mu restricted to `subset` and renormalized: parent_i / mu(subset) on the
/// subset, 0 elsewhere. Throws ErrorCode::undefined_measure when the subset
/// carries no mass.
std::vector<double> relative_weights(std::span<const double> parent,
                                     std::span<const std::size_t> subset);

enum class NodeStatus {
  split,            // internal node
  below_threshold,  // best split had rho* < rho0
  no_split,         // no admissible threshold pair
  max_depth,        // depth limit reached, no split attempted
};

const char* to_string(NodeStatus s);
NodeStatus node_status_from_string(const std::string& s);

struct HierarchyNode {
  /// Path from the root over {1, 2}; empty for the root.
  std::string label;
  std::size_t depth = 0;
  IndexSet rows;
  IndexSet cols;
  NodeStatus status = NodeStatus::max_depth;
  /// min(rho, rho_complement) of the best split of this node, when one was
  /// computed.
  std::optional<double> rho_star;
  /// Root-measure mass of the rows.
  double mass = 0.0;
  /// Coherence of this node's own pair (rows, cols); 1 for the root in a
  /// closed system.
  double rho = 1.0;
  /// Best split diagnostics (meaningful when rho_star is set).
  double split_rho = 0.0;
  double split_rho_complement = 0.0;
  double sigma2 = 0.0;
  /// Largest change in the split's rho when X gains or loses one cell at
  /// the threshold.
  double rho_sensitivity = 0.0;
  bool degenerate = false;
  std::vector<HierarchyNode> children;

  bool is_leaf() const { return children.empty(); }
};

struct HierarchyTree {
  HierarchyNode root;
  double rho0 = 0.9;
  std::size_t max_depth = 1;
  double min_mass = 0.05;
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;

  std::size_t leaf_count() const;
  std::size_t reached_depth() const;
  /// Pre-order list of all nodes.
  std::vector<const HierarchyNode*> nodes() const;
};

struct TreeOptions {
  double rho0 = 0.9;
  std::size_t max_depth = 4;
  double min_mass = 0.05;
  std::uint64_t seed = 0;
  double tol = 1e-11;
  std::size_t max_iter = 20000;
  SvdWeighting weighting = SvdWeighting::plain;
};

/// Recursive bisection into relatively coherent pairs. Each node restricts
/// P to its (rows, cols), renormalizes p over its rows, recomputes the
/// second singular pair of the restricted matrix and thresholds it. A node
/// becomes internal only when min(rho, rho_complement) >= rho0; child "1"
/// is the thresholded pair, child "2" its complement.
HierarchyTree build_tree(const TransitionMatrix& P, std::span<const double> p,
                         const TreeOptions& options);
HierarchyTree build_tree(const TransitionMatrix& P, std::span<const double> p, double rho0,
                         std::size_t max_depth, double min_mass, std::uint64_t seed);

inline constexpr const char* kUnassigned = "-";

struct CellLabels {
  std::vector<std::string> x;  // per domain cell
  std::vector<std::string> y;  // per image cell
};

/// Leaf label of every cell on each side; kUnassigned where no leaf holds
/// the cell. The root label is written as "root".
CellLabels assign_labels(const HierarchyTree& tree);
CellLabels assign_labels(const HierarchyTree& tree, std::size_t n_rows, std::size_t n_cols);

void write_tree(std::ostream& out, const HierarchyTree& tree);
HierarchyTree read_tree(std::istream& in);

void write_labels(std::ostream& out, const std::vector<std::string>& labels);
std::vector<std::string> read_labels(std::istream& in);

}  // namespace relcoh
