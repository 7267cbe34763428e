#include "relcoh/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "relcoh/error.hpp"
#include "text_io.hpp"

namespace relcoh {

std::vector<double> relative_weights(std::span<const double> parent,
                                     std::span<const std::size_t> subset) {
  double mass = 0.0;
  for (std::size_t i : subset) {
    if (i >= parent.size()) throw Error(ErrorCode::invalid_argument, "subset index out of range");
    mass += parent[i];
  }
  if (!(mass > 0.0))
    throw Error(ErrorCode::undefined_measure, "relative measure on a set of zero mass");
  std::vector<double> w(parent.size(), 0.0);
  for (std::size_t i : subset) w[i] = parent[i] / mass;
  return w;
}

const char* to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::split: return "split";
    case NodeStatus::below_threshold: return "below-threshold";
    case NodeStatus::no_split: return "no-split";
    case NodeStatus::max_depth: return "max-depth";
  }
  return "unknown";
}

NodeStatus node_status_from_string(const std::string& s) {
  for (NodeStatus st : {NodeStatus::split, NodeStatus::below_threshold, NodeStatus::no_split,
                        NodeStatus::max_depth})
    if (s == to_string(st)) return st;
  throw Error(ErrorCode::parse, "unknown node status '" + s + "'");
}

namespace {

void collect(const HierarchyNode& n, std::vector<const HierarchyNode*>& out) {
  out.push_back(&n);
  for (const auto& c : n.children) collect(c, out);
}

std::uint64_t label_seed(std::uint64_t seed, const std::string& label) {
  std::uint64_t h = 1469598103934665603ull ^ seed;
  for (char ch : label) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ull;
  }
  return h;
}

double mass_of(std::span<const double> p, const IndexSet& rows) {
  double m = 0.0;
  for (std::size_t i : rows) m += p[i];
  return m;
}

class TreeBuilder {
 public:
  TreeBuilder(const TransitionMatrix& P, std::span<const double> p, const TreeOptions& opt)
      : P_(P), p_(p), opt_(opt) {}

  void grow(HierarchyNode& node) {
    if (node.depth >= opt_.max_depth) {
      node.status = NodeStatus::max_depth;
      return;
    }
    const TransitionMatrix local = restrict(P_, node.rows, node.cols);
    std::vector<double> local_p(node.rows.size());
    for (std::size_t r = 0; r < node.rows.size(); ++r) local_p[r] = p_[node.rows[r]];
    {
      // Relative measure of the node's X side.
      IndexSet all(local_p.size());
      for (std::size_t r = 0; r < all.size(); ++r) all[r] = r;
      local_p = relative_weights(local_p, all);
    }

    SpectralOptions so;
    so.tol = opt_.tol;
    so.max_iter = opt_.max_iter;
    so.seed = label_seed(opt_.seed, node.label);
    so.weighting = opt_.weighting;
    if (opt_.weighting == SvdWeighting::measure) so.row_weights = local_p;

    SingularPair sv;
    SplitResult split;
    try {
      sv = second_singular(local, so);
      split = optimize_split(local, local_p, sv, SplitOptions{opt_.min_mass});
    } catch (const Error& e) {
      // Too few occupied cells for a second singular pair, or no admissible
      // threshold: either way the branch ends here.
      if (e.code() != ErrorCode::no_split && e.code() != ErrorCode::invalid_argument) throw;
      node.status = NodeStatus::no_split;
      return;
    }

    node.sigma2 = sv.sigma2;
    node.degenerate = sv.degenerate;
    node.split_rho = split.pair.rho;
    node.split_rho_complement = split.complement.rho;
    node.rho_star = std::min(split.pair.rho, split.complement.rho);
    node.rho_sensitivity = sensitivity(local, local_p, sv, split.pair);
    if (*node.rho_star < opt_.rho0) {
      node.status = NodeStatus::below_threshold;
      return;
    }

    node.status = NodeStatus::split;
    const CoherentPair* sides[2] = {&split.pair, &split.complement};
    for (int s = 0; s < 2; ++s) {
      HierarchyNode child;
      child.label = node.label + (s == 0 ? '1' : '2');
      child.depth = node.depth + 1;
      for (std::size_t r : sides[s]->rows) child.rows.push_back(node.rows[r]);
      for (std::size_t c : sides[s]->cols) child.cols.push_back(node.cols[c]);
      std::sort(child.rows.begin(), child.rows.end());
      std::sort(child.cols.begin(), child.cols.end());
      child.mass = mass_of(p_, child.rows);
      child.rho = sides[s]->rho;
      node.children.push_back(std::move(child));
    }
    for (auto& c : node.children) grow(c);
  }

 private:
  static double sensitivity(const TransitionMatrix& local, const std::vector<double>& p,
                            const SingularPair& sv, const CoherentPair& pair) {
    std::vector<unsigned char> in_x(local.n_rows, 0);
    for (std::size_t i : pair.rows) in_x[i] = 1;
    std::size_t lowest_in = kOutside, highest_out = kOutside;
    for (std::size_t i = 0; i < local.n_rows; ++i) {
      if (!(p[i] > 0.0) || local.row_counts[i] == 0) continue;
      if (in_x[i]) {
        if (lowest_in == kOutside || sv.left2[i] < sv.left2[lowest_in]) lowest_in = i;
      } else if (highest_out == kOutside || sv.left2[i] > sv.left2[highest_out]) {
        highest_out = i;
      }
    }
    double worst = 0.0;
    if (highest_out != kOutside) {
      IndexSet grown = pair.rows;
      grown.push_back(highest_out);
      worst = std::max(worst, std::abs(coherence_ratio(local, p, grown, pair.cols) - pair.rho));
    }
    if (lowest_in != kOutside && pair.rows.size() > 1) {
      IndexSet shrunk;
      for (std::size_t i : pair.rows)
        if (i != lowest_in) shrunk.push_back(i);
      worst = std::max(worst, std::abs(coherence_ratio(local, p, shrunk, pair.cols) - pair.rho));
    }
    return worst;
  }

  const TransitionMatrix& P_;
  std::span<const double> p_;
  const TreeOptions& opt_;
};

}  // namespace

std::size_t HierarchyTree::leaf_count() const {
  std::size_t n = 0;
  for (const auto* node : nodes()) n += node->is_leaf() ? 1 : 0;
  return n;
}

std::size_t HierarchyTree::reached_depth() const {
  std::size_t d = 0;
  for (const auto* node : nodes()) d = std::max(d, node->depth);
  return d;
}

std::vector<const HierarchyNode*> HierarchyTree::nodes() const {
  std::vector<const HierarchyNode*> out;
  collect(root, out);
  return out;
}

HierarchyTree build_tree(const TransitionMatrix& P, std::span<const double> p,
                         const TreeOptions& options) {
  if (!(options.rho0 > 0.0 && options.rho0 < 1.0))
    throw Error(ErrorCode::invalid_argument, "rho0 must lie in (0, 1)");
  if (options.max_depth < 1) throw Error(ErrorCode::invalid_argument, "max_depth must be >= 1");
  if (p.size() != P.n_rows)
    throw Error(ErrorCode::invalid_argument, "weight vector length does not match rows");

  HierarchyTree tree;
  tree.rho0 = options.rho0;
  tree.max_depth = options.max_depth;
  tree.min_mass = options.min_mass;
  tree.n_rows = P.n_rows;
  tree.n_cols = P.n_cols;

  HierarchyNode& root = tree.root;
  for (std::size_t i = 0; i < P.n_rows; ++i)
    if (p[i] > 0.0 && P.row_counts[i] > 0) root.rows.push_back(i);
  if (root.rows.empty()) throw Error(ErrorCode::empty_matrix, "no weighted occupied rows");
  std::vector<double> pw(P.n_rows, 0.0);
  for (std::size_t i : root.rows) pw[i] = p[i];
  const std::vector<double> v = push_measure(P, pw);
  for (std::size_t j = 0; j < P.n_cols; ++j)
    if (v[j] > 0.0) root.cols.push_back(j);
  root.mass = mass_of(p, root.rows);
  if (root.cols.empty()) {
    root.rho = 0.0;
    root.status = NodeStatus::no_split;
    return tree;
  }
  root.rho = coherence_ratio(P, p, root.rows, root.cols);

  TreeBuilder(P, p, options).grow(root);
  return tree;
}

HierarchyTree build_tree(const TransitionMatrix& P, std::span<const double> p, double rho0,
                         std::size_t max_depth, double min_mass, std::uint64_t seed) {
  TreeOptions opt;
  opt.rho0 = rho0;
  opt.max_depth = max_depth;
  opt.min_mass = min_mass;
  opt.seed = seed;
  return build_tree(P, p, opt);
}

CellLabels assign_labels(const HierarchyTree& tree, std::size_t n_rows, std::size_t n_cols) {
  CellLabels out;
  out.x.assign(n_rows, kUnassigned);
  out.y.assign(n_cols, kUnassigned);
  for (const auto* node : tree.nodes()) {
    if (!node->is_leaf()) continue;
    const std::string name = node->label.empty() ? "root" : node->label;
    for (std::size_t i : node->rows)
      if (i < n_rows) out.x[i] = name;
    for (std::size_t j : node->cols)
      if (j < n_cols) out.y[j] = name;
  }
  return out;
}

CellLabels assign_labels(const HierarchyTree& tree) {
  return assign_labels(tree, tree.n_rows, tree.n_cols);
}

namespace {

void write_indices(std::ostream& out, const char* key, const IndexSet& ids) {
  out << key << ' ' << ids.size();
  for (std::size_t i : ids) out << ' ' << i;
  out << '\n';
}

std::string opt_fmt(const std::optional<double>& v) { return v ? detail::fmt(*v) : "none"; }

}  // namespace

void write_tree(std::ostream& out, const HierarchyTree& tree) {
  const auto nodes = tree.nodes();
  out << "relcoh-tree 1\n";
  out << "rho0 " << detail::fmt(tree.rho0) << '\n';
  out << "max_depth " << tree.max_depth << '\n';
  out << "min_mass " << detail::fmt(tree.min_mass) << '\n';
  out << "n_rows " << tree.n_rows << '\n';
  out << "n_cols " << tree.n_cols << '\n';
  out << "nodes " << nodes.size() << '\n';
  for (const auto* n : nodes) {
    out << "node " << (n->label.empty() ? "root" : n->label) << " depth " << n->depth
        << " status " << to_string(n->status) << " rho_star " << opt_fmt(n->rho_star)
        << " mass " << detail::fmt(n->mass) << " rho " << detail::fmt(n->rho) << " split_rho "
        << detail::fmt(n->split_rho) << " split_rho_complement "
        << detail::fmt(n->split_rho_complement) << " sigma2 " << detail::fmt(n->sigma2)
        << " sensitivity " << detail::fmt(n->rho_sensitivity) << " degenerate "
        << (n->degenerate ? 1 : 0) << '\n';
    write_indices(out, "rows", n->rows);
    write_indices(out, "cols", n->cols);
  }
}

HierarchyTree read_tree(std::istream& in) {
  detail::TokenReader rd(in, "tree");
  rd.expect("relcoh-tree");
  if (rd.count() != 1) rd.fail("unsupported version");
  HierarchyTree tree;
  rd.expect("rho0");
  tree.rho0 = rd.real();
  rd.expect("max_depth");
  tree.max_depth = rd.count();
  rd.expect("min_mass");
  tree.min_mass = rd.real();
  rd.expect("n_rows");
  tree.n_rows = rd.count();
  rd.expect("n_cols");
  tree.n_cols = rd.count();
  rd.expect("nodes");
  const std::size_t count = rd.count();

  // Pre-order records; rebuild by walking the label prefixes.
  std::vector<HierarchyNode*> path;
  for (std::size_t k = 0; k < count; ++k) {
    HierarchyNode n;
    rd.expect("node");
    n.label = rd.word();
    if (n.label == "root") n.label.clear();
    if (n.label.find_first_not_of("12") != std::string::npos) rd.fail("bad label '" + n.label + "'");
    rd.expect("depth");
    n.depth = rd.count();
    rd.expect("status");
    n.status = node_status_from_string(rd.word());
    rd.expect("rho_star");
    const std::string rs = rd.word();
    if (rs != "none") {
      std::istringstream one(rs);
      detail::TokenReader r1(one, "tree rho_star");
      n.rho_star = r1.real();
    }
    rd.expect("mass");
    n.mass = rd.real();
    rd.expect("rho");
    n.rho = rd.real();
    rd.expect("split_rho");
    n.split_rho = rd.real();
    rd.expect("split_rho_complement");
    n.split_rho_complement = rd.real();
    rd.expect("sigma2");
    n.sigma2 = rd.real();
    rd.expect("sensitivity");
    n.rho_sensitivity = rd.real();
    rd.expect("degenerate");
    n.degenerate = rd.count() != 0;
    for (const char* key : {"rows", "cols"}) {
      rd.expect(key);
      IndexSet& ids = std::string(key) == "rows" ? n.rows : n.cols;
      ids.resize(rd.count());
      for (auto& i : ids) i = rd.count();
    }

    if (k == 0) {
      if (!n.label.empty()) rd.fail("first node must be the root");
      tree.root = std::move(n);
      path = {&tree.root};
      continue;
    }
    const std::size_t depth = n.label.size();
    if (n.depth != depth) rd.fail("node '" + n.label + "' depth does not match its label");
    if (depth == 0 || depth > path.size()) rd.fail("node '" + n.label + "' has no parent");
    path.resize(depth);
    HierarchyNode* parent = path.back();
    if (n.label.compare(0, parent->label.size(), parent->label) != 0)
      rd.fail("node '" + n.label + "' does not extend its parent label");
    parent->children.push_back(std::move(n));
    path.push_back(&parent->children.back());
  }
  return tree;
}

void write_labels(std::ostream& out, const std::vector<std::string>& labels) {
  out << "relcoh-labels 1\n" << labels.size() << '\n';
  for (std::size_t i = 0; i < labels.size(); ++i) out << i << ' ' << labels[i] << '\n';
}

std::vector<std::string> read_labels(std::istream& in) {
  detail::TokenReader rd(in, "labels");
  rd.expect("relcoh-labels");
  if (rd.count() != 1) rd.fail("unsupported version");
  std::vector<std::string> labels(rd.count());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (rd.count() != i) rd.fail("labels out of order");
    labels[i] = rd.word();
  }
  return labels;
}

}  // namespace relcoh
