#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "relcoh/geometry.hpp"
#include "relcoh/mesh.hpp"

namespace relcoh {

/// Velocity samples on a rectilinear space-time grid. Arrays are stored
/// time-major then row-major (index ((it * ny) + iy) * nx + ix). A NaN in
/// either component marks land / invalid water at that sample.
struct GriddedField {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> t;
  std::vector<double> u;
  std::vector<double> v;
  /// Length of one file time unit in seconds (86400 for days).
  double time_unit_seconds = 1.0;

  std::size_t nx() const { return x.size(); }
  std::size_t ny() const { return y.size(); }
  std::size_t nt() const { return t.size(); }
  std::size_t index(std::size_t it, std::size_t iy, std::size_t ix) const {
    return (it * ny() + iy) * nx() + ix;
  }
  bool wet(std::size_t it, std::size_t iy, std::size_t ix) const;
  /// Wet mask per (iy, ix) node: wet at every time sample.
  std::vector<unsigned char> wet_mask() const;
  /// True when all four grid nodes around p are wet at the time slice
  /// nearest to time.
  bool is_water(const Point2& p, double time) const;

  /// Throws ErrorCode::parse on inconsistent shapes or non-monotone axes.
  void validate() const;
};

GriddedField load_gridded(const std::string& path);
GriddedField read_gridded(std::istream& in);
void save_gridded(const std::string& path, const GriddedField& field);
void write_gridded(std::ostream& out, const GriddedField& field);

enum class FlowKind { double_gyre, standard_map, rossby, gridded, linear };

const char* to_string(FlowKind kind);
FlowKind flow_kind_from_string(const std::string& name);

/// A flow map definition. For the standard map, tau is the iteration count
/// and integrator_step is unused.
struct FlowSpec {
  FlowKind kind = FlowKind::double_gyre;
  std::map<std::string, double> params;
  double t0 = 0.0;
  double tau = 0.0;
  double integrator_step = 0.01;
  std::shared_ptr<const GriddedField> field;

  bool continuous() const { return kind != FlowKind::standard_map; }
  double param(const std::string& name) const;
  /// Optional "x_period" parameter of continuous flows: final x positions
  /// are reduced into [0, x_period) (zonal channels). 0 when absent.
  double x_period() const;
  /// Throws ErrorCode::invalid_argument when required parameters are
  /// missing or the step is not positive.
  void validate() const;
};

std::vector<std::string> required_params(FlowKind kind);

FlowSpec double_gyre_flow(double A = 0.25, double epsilon = 0.25,
                          double omega = 6.283185307179586, double t0 = 0.0,
                          double tau = 10.0, double step = 0.01);
FlowSpec standard_map_flow(double K, unsigned iterations);
/// Idealized stratospheric jet. Only U0, c3, A1..A3 come with the published
/// example; L, k1..k3, sigma1, sigma2 (and the inert c2) are defaults from
/// the jet literature and should be treated as tunable.
FlowSpec rossby_flow(double tau_seconds = 10 * 86400.0, double step_seconds = 1800.0);
std::map<std::string, double> rossby_default_params();
FlowSpec gridded_flow(std::shared_ptr<const GriddedField> field, double t0, double tau,
                      double step);
/// dx/dt = a11 x + a12 y + b1, dy/dt = a21 x + a22 y + b2.
FlowSpec linear_flow(double a11, double a12, double a21, double a22, double b1 = 0.0,
                     double b2 = 0.0);

Vec2 velocity(const FlowSpec& spec, const Point2& p, double t);

/// One standard-map iteration in angle units; both coordinates reduced to
/// [0, 2pi).
void standard_map_step(double& theta, double& p, double K);

struct TrajectoryEnsemble {
  std::vector<Point2> initial;
  std::vector<Point2> final;
  /// Non-zero for trajectories that left the gridded field; their final
  /// point is the last valid position.
  std::vector<unsigned char> flagged;
  double t0 = 0.0;
  double tau = 0.0;
  std::uint64_t seed = 0;

  std::size_t size() const { return initial.size(); }
  std::size_t flagged_count() const;
};

/// Fixed-step RK4 from t0 to t0 + tau (final step shortened) for continuous
/// flows; exact iteration for the standard map, whose points are given in
/// unit-torus coordinates (theta / 2pi, p / 2pi). Output order matches
/// input order for any worker count.
TrajectoryEnsemble advect(const FlowSpec& spec, std::span<const Point2> initial,
                          std::uint64_t seed, unsigned workers = 0);

/// n i.i.d. uniform points on rect from mt19937_64(seed), using the top 53
/// bits of each draw.
std::vector<Point2> seed_uniform(const Rect& rect, std::size_t n, std::uint64_t seed);

/// Uniform points restricted to the water region of a gridded field at
/// time t (rejection sampling on the same generator).
std::vector<Point2> seed_uniform_water(const Rect& rect, std::size_t n, std::uint64_t seed,
                                       const GriddedField& field, double t);

void write_ensemble(std::ostream& out, const TrajectoryEnsemble& ens);
TrajectoryEnsemble read_ensemble(std::istream& in);

}  // namespace relcoh
