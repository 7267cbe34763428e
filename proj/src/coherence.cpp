#include "relcoh/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "relcoh/error.hpp"
#include "text_io.hpp"

namespace relcoh {

double coherence_ratio(const TransitionMatrix& P, std::span<const double> p,
                       std::span<const std::size_t> rows, std::span<const std::size_t> cols) {
  if (p.size() != P.n_rows)
    throw Error(ErrorCode::invalid_argument, "weight vector length does not match rows");
  std::vector<unsigned char> in_cols(P.n_cols, 0);
  for (std::size_t j : cols) {
    if (j >= P.n_cols) throw Error(ErrorCode::invalid_argument, "column index out of range");
    in_cols[j] = 1;
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i : rows) {
    if (i >= P.n_rows) throw Error(ErrorCode::invalid_argument, "row index out of range");
    den += p[i];
    double kept = 0.0;
    for (std::size_t k = P.row_ptr[i]; k < P.row_ptr[i + 1]; ++k)
      if (in_cols[P.col_idx[k]]) kept += P.values[k];
    num += p[i] * kept;
  }
  if (!(den > 0.0))
    throw Error(ErrorCode::undefined_ratio, "coherence ratio of a set with zero mass");
  return num / den;
}

namespace {

// Indices sorted by descending value (ties by ascending index), cut into
// groups of equal value. starts[g] is the first position of group g.
struct Ordering {
  std::vector<std::size_t> order;
  std::vector<std::size_t> starts;
  std::size_t groups() const { return starts.size() - 1; }
};

Ordering order_by_value(std::vector<std::size_t> ids, const std::vector<double>& value) {
  std::sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
    if (value[a] != value[b]) return value[a] > value[b];
    return a < b;
  });
  Ordering o;
  o.order = std::move(ids);
  for (std::size_t k = 0; k < o.order.size(); ++k)
    if (k == 0 || value[o.order[k]] != value[o.order[k - 1]]) o.starts.push_back(k);
  o.starts.push_back(o.order.size());
  return o;
}

constexpr double kTie = 1e-12;

}  // namespace

SplitResult optimize_split(const TransitionMatrix& P, std::span<const double> p,
                           const SingularPair& sv, const SplitOptions& options) {
  if (!(options.min_mass > 0.0 && options.min_mass < 0.5))
    throw Error(ErrorCode::invalid_argument, "min_mass must lie in (0, 0.5)");
  if (p.size() != P.n_rows || sv.left2.size() != P.n_rows || sv.right2.size() != P.n_cols)
    throw Error(ErrorCode::invalid_argument, "vector lengths do not match the matrix");

  std::vector<std::size_t> rows;
  double total_mass = 0.0;
  for (std::size_t i = 0; i < P.n_rows; ++i) {
    if (p[i] > 0.0 && P.row_counts[i] > 0) {
      rows.push_back(i);
      total_mass += p[i];
    }
  }
  std::vector<double> pw(P.n_rows, 0.0);
  for (std::size_t i : rows) pw[i] = p[i];
  const std::vector<double> v = push_measure(P, pw);
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < P.n_cols; ++j)
    if (v[j] > 0.0) cols.push_back(j);

  if (rows.size() < 2 || cols.size() < 2)
    throw Error(ErrorCode::no_split, "fewer than two weighted rows or columns");

  const Ordering xo = order_by_value(rows, sv.left2);
  const Ordering yo = order_by_value(cols, sv.right2);
  const std::size_t G = xo.groups();
  const std::size_t H = yo.groups();
  if (G < 2 || H < 2)
    throw Error(ErrorCode::no_split, "singular vector takes a single value on the active cells");

  // Pushforward mass of the first h column groups.
  std::vector<double> ymass(H + 1, 0.0);
  for (std::size_t h = 0; h < H; ++h) {
    double s = 0.0;
    for (std::size_t k = yo.starts[h]; k < yo.starts[h + 1]; ++k) s += v[yo.order[k]];
    ymass[h + 1] = ymass[h] + s;
  }
  const double retained = ymass[H];

  // Column-major view of the weighted entries p_i P_ij of active rows.
  std::vector<std::size_t> col_ptr(P.n_cols + 1, 0);
  for (std::size_t i : rows)
    for (std::size_t k = P.row_ptr[i]; k < P.row_ptr[i + 1]; ++k) ++col_ptr[P.col_idx[k] + 1];
  for (std::size_t j = 0; j < P.n_cols; ++j) col_ptr[j + 1] += col_ptr[j];
  std::vector<std::pair<std::size_t, double>> col_entries(col_ptr.back());
  {
    std::vector<std::size_t> fill(col_ptr.begin(), col_ptr.end() - 1);
    for (std::size_t i : rows)
      for (std::size_t k = P.row_ptr[i]; k < P.row_ptr[i + 1]; ++k)
        col_entries[fill[P.col_idx[k]]++] = {i, p[i] * P.values[k]};
  }

  std::vector<unsigned char> in_x(P.n_rows, 0);
  std::vector<unsigned char> in_y(P.n_cols, 0);
  double both = 0.0;        // sum over X x Y of p_i P_ij
  double x_retained = 0.0;  // sum over X of p_i sum_j P_ij
  double mass_x = 0.0;
  std::size_t h = 0;

  auto add_col_group = [&](std::size_t g) {
    for (std::size_t k = yo.starts[g]; k < yo.starts[g + 1]; ++k) {
      const std::size_t j = yo.order[k];
      in_y[j] = 1;
      for (std::size_t e = col_ptr[j]; e < col_ptr[j + 1]; ++e)
        if (in_x[col_entries[e].first]) both += col_entries[e].second;
    }
  };
  add_col_group(0);
  h = 1;

  SplitResult result;
  result.trace.reserve(G - 1);
  const double floor_mass = options.min_mass * total_mass;
  std::size_t best = kOutside;
  std::size_t best_h = 0;
  double best_score = -1.0;
  double best_balance = 0.0;

  for (std::size_t g = 1; g < G; ++g) {
    for (std::size_t k = xo.starts[g - 1]; k < xo.starts[g]; ++k) {
      const std::size_t i = xo.order[k];
      in_x[i] = 1;
      mass_x += p[i];
      double row_all = 0.0;
      for (std::size_t e = P.row_ptr[i]; e < P.row_ptr[i + 1]; ++e) {
        row_all += P.values[e];
        if (in_y[P.col_idx[e]]) both += p[i] * P.values[e];
      }
      x_retained += p[i] * row_all;
    }
    // Mass matching: |ymass[h] - mass_x| is unimodal in h since every
    // active column group carries positive mass.
    while (h + 1 <= H - 1 &&
           std::abs(ymass[h + 1] - mass_x) < std::abs(ymass[h] - mass_x)) {
      add_col_group(h);
      ++h;
    }

    SplitCandidate cand;
    cand.b = sv.left2[xo.order[xo.starts[g]]];
    cand.c = sv.right2[yo.order[yo.starts[h]]];
    cand.mass_x = mass_x;
    cand.mass_y = ymass[h];
    const double mass_xc = total_mass - mass_x;
    cand.rho = mass_x > 0.0 ? both / mass_x : 0.0;
    cand.rho_complement =
        mass_xc > 0.0 ? (retained - x_retained - ymass[h] + both) / mass_xc : 0.0;
    cand.admissible = mass_x >= floor_mass && mass_xc >= floor_mass;
    result.trace.push_back(cand);

    if (!cand.admissible) continue;
    const double score = cand.rho + cand.rho_complement;
    const double balance = std::abs(mass_x - 0.5 * total_mass);
    // Later candidates have smaller b, so an exact tie in both keys moves on.
    const bool better = best == kOutside || score > best_score + kTie ||
                        (score >= best_score - kTie && balance <= best_balance + kTie);
    if (better) {
      best = g;
      best_h = h;
      best_score = score;
      best_balance = balance;
    }
  }

  if (best == kOutside)
    throw Error(ErrorCode::no_split, "no threshold pair leaves both sides with mass >= " +
                                         detail::fmt(options.min_mass));

  IndexSet x_set(xo.order.begin(), xo.order.begin() + static_cast<std::ptrdiff_t>(xo.starts[best]));
  IndexSet xc_set(xo.order.begin() + static_cast<std::ptrdiff_t>(xo.starts[best]), xo.order.end());
  IndexSet y_set(yo.order.begin(), yo.order.begin() + static_cast<std::ptrdiff_t>(yo.starts[best_h]));
  IndexSet yc_set(yo.order.begin() + static_cast<std::ptrdiff_t>(yo.starts[best_h]), yo.order.end());
  for (auto* s : {&x_set, &xc_set, &y_set, &yc_set}) std::sort(s->begin(), s->end());

  const double b_star = sv.left2[xo.order[xo.starts[best]]];
  const double c_star = sv.right2[yo.order[yo.starts[best_h]]];
  const double rho = coherence_ratio(P, p, x_set, y_set);
  const double rho_c = coherence_ratio(P, p, xc_set, yc_set);

  result.pair = {std::move(x_set), std::move(y_set), rho, rho_c, b_star, c_star};
  result.complement = {std::move(xc_set), std::move(yc_set), rho_c, rho, b_star, c_star};
  return result;
}

std::pair<CoherentPair, CoherentPair> optimize_split(const TransitionMatrix& P,
                                                     std::span<const double> p,
                                                     const SingularPair& sv, double min_mass) {
  SplitResult r = optimize_split(P, p, sv, SplitOptions{min_mass});
  return {std::move(r.pair), std::move(r.complement)};
}

void write_trace(std::ostream& out, const std::vector<SplitCandidate>& trace) {
  out << "b\tc\tmass_x\tmass_y\trho\trho_complement\tadmissible\n";
  for (const auto& c : trace)
    out << detail::fmt(c.b) << '\t' << detail::fmt(c.c) << '\t' << detail::fmt(c.mass_x) << '\t'
        << detail::fmt(c.mass_y) << '\t' << detail::fmt(c.rho) << '\t'
        << detail::fmt(c.rho_complement) << '\t' << (c.admissible ? 1 : 0) << '\n';
}

}  // namespace relcoh
