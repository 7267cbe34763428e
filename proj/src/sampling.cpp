#include "relcoh/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "relcoh/error.hpp"
#include "relcoh/parallel.hpp"
#include "text_io.hpp"

namespace relcoh {

namespace {

// Largest singular value of [[a, b], [c, d]].
double spectral_norm(double a, double b, double c, double d) {
  const double s = a * a + b * b + c * c + d * d;
  const double det = a * d - b * c;
  const double disc = std::sqrt(std::max(0.0, s * s - 4.0 * det * det));
  return std::sqrt(0.5 * (s + disc));
}

}  // namespace

double estimate_lipschitz(const FlowSpec& spec, const Rect& rect, std::size_t n_samples,
                          std::uint64_t seed, unsigned workers) {
  rect.validate();
  spec.validate();
  if (!spec.continuous())
    throw Error(ErrorCode::invalid_argument, "Lipschitz estimate needs a continuous flow");
  if (n_samples == 0) throw Error(ErrorCode::invalid_argument, "n_samples must be positive");

  // Draw all samples up front so the result does not depend on chunking.
  std::mt19937_64 rng(seed);
  auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  struct Sample {
    Point2 p;
    double t;
  };
  std::vector<Sample> samples(n_samples);
  for (auto& s : samples) {
    s.p = {rect.xmin + unit() * rect.width(), rect.ymin + unit() * rect.height()};
    s.t = spec.t0 + unit() * spec.tau;
  }

  const double h = 1e-6 * std::max(rect.width(), rect.height());
  std::vector<double> chunk_max(chunk_count(n_samples, workers), 0.0);
  parallel_chunks(n_samples, workers, [&](std::size_t c, std::size_t b, std::size_t e) {
    double best = 0.0;
    for (std::size_t k = b; k < e; ++k) {
      const auto& [p, t] = samples[k];
      Vec2 xp, xm, yp, ym;
      try {
        xp = velocity(spec, {p.x + h, p.y}, t);
        xm = velocity(spec, {p.x - h, p.y}, t);
        yp = velocity(spec, {p.x, p.y + h}, t);
        ym = velocity(spec, {p.x, p.y - h}, t);
      } catch (const Error& err) {
        if (err.code() == ErrorCode::out_of_range) continue;
        throw;
      }
      const double a = (xp.x - xm.x) / (2 * h);
      const double bb = (yp.x - ym.x) / (2 * h);
      const double cc = (xp.y - xm.y) / (2 * h);
      const double d = (yp.y - ym.y) / (2 * h);
      const double norm = spectral_norm(a, bb, cc, d);
      if (!std::isfinite(norm))
        throw Error(ErrorCode::diverged, "non-finite velocity Jacobian at (" +
                                             detail::fmt(p.x) + ", " + detail::fmt(p.y) + ")");
      best = std::max(best, norm);
    }
    chunk_max[c] = best;
  });
  return *std::max_element(chunk_max.begin(), chunk_max.end());
}

SamplingAdvice advise(double q, double M, double epoch, std::uint64_t box_count) {
  if (!(q > 0.0) || !(M >= 0.0) || !(epoch >= 0.0) || box_count == 0 || !std::isfinite(q) ||
      !std::isfinite(M) || !std::isfinite(epoch))
    throw Error(ErrorCode::invalid_argument,
                "advise needs q > 0, M >= 0, epoch >= 0 and a positive box count");
  SamplingAdvice a;
  a.q = q;
  a.M = M;
  a.epoch = epoch;
  a.box_count = box_count;
  a.epsilon = q * std::exp(-M * epoch);
  const double per_axis = q / a.epsilon;
  const double per_box = std::pow(per_axis, static_cast<double>(a.dimension));
  // exp/log round trips land a few ulps above integers (e.g. 100.00000000000003);
  // those must not round up to the next count.
  const double rounded = std::ceil(per_box * (1.0 - 8 * std::numeric_limits<double>::epsilon()));
  constexpr double kLimit = 1.8e19;  // below 2^64
  if (!std::isfinite(per_box) || rounded >= kLimit || a.epsilon == 0.0)
    throw Error(ErrorCode::advisory, "required sampling overflows; use a coarser grid (larger q) "
                                     "or a shorter epoch");
  a.points_per_box = static_cast<std::uint64_t>(std::max(1.0, rounded));
  if (a.points_per_box > std::numeric_limits<std::uint64_t>::max() / box_count)
    throw Error(ErrorCode::advisory,
                "total point count overflows; use a coarser grid or a shorter epoch");
  a.total_points = a.points_per_box * box_count;
  return a;
}

void write_advice(std::ostream& out, const SamplingAdvice& a) {
  out << "Sampling advice\n"
      << "  box side q            " << detail::fmt(a.q) << '\n'
      << "  Lipschitz constant M  " << detail::fmt(a.M) << '\n'
      << "  epoch |t - t0|        " << detail::fmt(a.epoch) << '\n'
      << "  spacing epsilon       " << detail::fmt(a.epsilon) << "  (q * exp(-M * epoch))\n"
      << "  points per box        " << a.points_per_box << "  (ceil((q/epsilon)^" << a.dimension
      << "))\n"
      << "  boxes                 " << a.box_count << '\n'
      << "  total points          " << a.total_points << "\n\n";
  out << "[advice]\n"
      << "q = " << detail::fmt(a.q) << '\n'
      << "M = " << detail::fmt(a.M) << '\n'
      << "epoch = " << detail::fmt(a.epoch) << '\n'
      << "epsilon = " << detail::fmt(a.epsilon) << '\n'
      << "dimension = " << a.dimension << '\n'
      << "points_per_box = " << a.points_per_box << '\n'
      << "box_count = " << a.box_count << '\n'
      << "total_points = " << a.total_points << '\n';
}

}  // namespace relcoh
