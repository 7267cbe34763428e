#include "relcoh/dynamics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>

#include "relcoh/error.hpp"
#include "relcoh/parallel.hpp"
#include "text_io.hpp"

namespace relcoh {

static_assert(std::endian::native == std::endian::little,
              "binary artifact formats assume a little-endian host");

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr char kFieldMagic[8] = {'R', 'E', 'L', 'C', 'O', 'H', 'G', 'F'};
constexpr char kEnsembleMagic[8] = {'R', 'E', 'L', 'C', 'O', 'H', 'E', 'N'};

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void put_array(std::ostream& out, const std::vector<T>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
T get(std::istream& in, const char* what) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw Error(ErrorCode::parse, std::string("truncated ") + what);
  return v;
}

template <class T>
void get_array(std::istream& in, std::vector<T>& v, std::size_t n, const char* what) {
  v.resize(n);
  if (n > 0 && !in.read(reinterpret_cast<char*>(v.data()),
                        static_cast<std::streamsize>(n * sizeof(T))))
    throw Error(ErrorCode::parse, std::string("truncated ") + what);
}

bool strictly_increasing(const std::vector<double>& a) {
  for (std::size_t i = 0; i + 1 < a.size(); ++i)
    if (!(a[i] < a[i + 1])) return false;
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

// Bracketing interval of `value` in a strictly increasing axis.
std::size_t bracket(const std::vector<double>& axis, double value, const char* name) {
  if (!(value >= axis.front() && value <= axis.back()))
    throw Error(ErrorCode::out_of_range, std::string(name) + " = " + detail::fmt(value) +
                                             " outside [" + detail::fmt(axis.front()) + ", " +
                                             detail::fmt(axis.back()) + "]");
  auto it = std::upper_bound(axis.begin(), axis.end(), value);
  std::size_t i = static_cast<std::size_t>(it - axis.begin());
  i = i == 0 ? 0 : i - 1;
  return std::min(i, axis.size() - 2);
}

Vec2 gridded_velocity(const GriddedField& f, const Point2& p, double time) {
  const std::size_t ix = bracket(f.x, p.x, "x");
  const std::size_t iy = bracket(f.y, p.y, "y");
  const double wx = (p.x - f.x[ix]) / (f.x[ix + 1] - f.x[ix]);
  const double wy = (p.y - f.y[iy]) / (f.y[iy + 1] - f.y[iy]);

  auto slice = [&](std::size_t it) {
    auto at = [&](const std::vector<double>& c, std::size_t jy, std::size_t jx) {
      const std::size_t k = f.index(it, jy, jx);
      // Land contributes zero velocity.
      return std::isnan(f.u[k]) || std::isnan(f.v[k]) ? 0.0 : c[k];
    };
    auto bilinear = [&](const std::vector<double>& c) {
      return (1 - wy) * ((1 - wx) * at(c, iy, ix) + wx * at(c, iy, ix + 1)) +
             wy * ((1 - wx) * at(c, iy + 1, ix) + wx * at(c, iy + 1, ix + 1));
    };
    return Vec2{bilinear(f.u), bilinear(f.v)};
  };

  if (f.nt() == 1) return slice(0);
  const std::size_t it = bracket(f.t, time, "t");
  const double wt = (time - f.t[it]) / (f.t[it + 1] - f.t[it]);
  const Vec2 a = slice(it);
  const Vec2 b = slice(it + 1);
  return {(1 - wt) * a.x + wt * b.x, (1 - wt) * a.y + wt * b.y};
}

// Flow parameters pulled out of the spec once, so the integrator does no
// name lookups per step.
struct FlowEval {
  FlowKind kind;
  double A = 0, eps = 0, omega = 0;
  double U0 = 0, c3 = 0, A1 = 0, A2 = 0, A3 = 0, L = 0, k1 = 0, k2 = 0, s1 = 0, s2 = 0;
  double a11 = 0, a12 = 0, a21 = 0, a22 = 0, b1 = 0, b2 = 0;
  const GriddedField* field = nullptr;

  explicit FlowEval(const FlowSpec& s) : kind(s.kind) {
    switch (kind) {
      case FlowKind::double_gyre:
        A = s.param("A");
        eps = s.param("epsilon");
        omega = s.param("omega");
        break;
      case FlowKind::rossby:
        U0 = s.param("U0");
        c3 = s.param("c3");
        A1 = s.param("A1");
        A2 = s.param("A2");
        A3 = s.param("A3");
        L = s.param("L");
        k1 = s.param("k1");
        k2 = s.param("k2");
        s1 = s.param("sigma1");
        s2 = s.param("sigma2");
        break;
      case FlowKind::linear:
        a11 = s.param("a11");
        a12 = s.param("a12");
        a21 = s.param("a21");
        a22 = s.param("a22");
        b1 = s.param("b1");
        b2 = s.param("b2");
        break;
      case FlowKind::gridded:
        if (!s.field) throw Error(ErrorCode::invalid_argument, "gridded flow has no field");
        field = s.field.get();
        break;
      case FlowKind::standard_map:
        throw Error(ErrorCode::invalid_argument, "velocity is undefined for an iterated map");
    }
  }

  // Time-only factors, shared by every point evaluated at the same t.
  struct Instant {
    double t = 0.0;
    double a = 0.0;
    double cos1 = 1.0, sin1 = 0.0, cos2 = 1.0, sin2 = 0.0;
  };

  Instant at_time(double t) const {
    Instant in;
    in.t = t;
    if (kind == FlowKind::double_gyre) in.a = eps * std::sin(omega * t);
    if (kind == FlowKind::rossby) {
      in.cos1 = std::cos(s1 * t);
      in.sin1 = std::sin(s1 * t);
      in.cos2 = std::cos(s2 * t);
      in.sin2 = std::sin(s2 * t);
    }
    return in;
  }

  Vec2 operator()(const Point2& p, double t) const { return (*this)(p, at_time(t)); }

  Vec2 operator()(const Point2& p, const Instant& in) const {
    const double t = in.t;
    switch (kind) {
      case FlowKind::double_gyre: return double_gyre(p, in.a);
      case FlowKind::rossby: return rossby(p, in);
      case FlowKind::linear:
        return {a11 * p.x + a12 * p.y + b1, a21 * p.x + a22 * p.y + b2};
      case FlowKind::gridded: return gridded_velocity(*field, p, t);
      case FlowKind::standard_map: break;
    }
    return {0.0, 0.0};
  }

  Vec2 double_gyre(const Point2& p, double a) const {
    const double b = 1.0 - 2.0 * a;
    const double f = a * p.x * p.x + b * p.x;
    const double dfdx = 2.0 * a * p.x + b;
    const double pi = std::numbers::pi;
    return {-pi * A * std::sin(pi * f) * std::cos(pi * p.y),
            pi * A * std::cos(pi * f) * std::sin(pi * p.y) * dfdx};
  }

  Vec2 rossby(const Point2& p, const Instant& in) const {
    const double th = std::tanh(p.y / L);
    const double sech2 = 1.0 - th * th;
    const double c1x = std::cos(k1 * p.x), s1x = std::sin(k1 * p.x);
    const double c2x = std::cos(k2 * p.x), s2x = std::sin(k2 * p.x);
    // cos(kx - st) and sin(kx - st) by angle subtraction.
    const double cos_w2 = c2x * in.cos2 + s2x * in.sin2;
    const double sin_w2 = s2x * in.cos2 - c2x * in.sin2;
    const double cos_w1 = c1x * in.cos1 + s1x * in.sin1;
    const double sin_w1 = s1x * in.cos1 - c1x * in.sin1;
    const double w = A3 * c1x + A2 * cos_w2 + A1 * cos_w1;
    const double wx = -A3 * k1 * s1x - A2 * k2 * sin_w2 - A1 * k1 * sin_w1;
    // Stream function partials; d/dy sech^2(y/L) = -(2/L) sech^2 tanh.
    const double dphi_dy = c3 - U0 * sech2 - 2.0 * U0 * w * sech2 * th;
    const double dphi_dx = U0 * L * sech2 * wx;
    return {-dphi_dy, dphi_dx};
  }
};

struct StepTimes {
  FlowEval::Instant start, mid, end;
};

StepTimes step_times(const FlowEval& f, double t, double h) {
  return {f.at_time(t), f.at_time(t + 0.5 * h), f.at_time(t + h)};
}

Point2 rk4_step(const FlowEval& f, const Point2& z, const StepTimes& ts, double h) {
  const Vec2 k1 = f(z, ts.start);
  const Vec2 k2 = f({z.x + 0.5 * h * k1.x, z.y + 0.5 * h * k1.y}, ts.mid);
  const Vec2 k3 = f({z.x + 0.5 * h * k2.x, z.y + 0.5 * h * k2.y}, ts.mid);
  const Vec2 k4 = f({z.x + h * k3.x, z.y + h * k3.y}, ts.end);
  return {z.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
          z.y + h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y)};
}

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

double wrap_unit(double a) { return a >= 1.0 ? a - 1.0 : a; }

}  // namespace

// ---------------------------------------------------------------------------
// GriddedField

bool GriddedField::wet(std::size_t it, std::size_t iy, std::size_t ix) const {
  const std::size_t k = index(it, iy, ix);
  return !std::isnan(u[k]) && !std::isnan(v[k]);
}

std::vector<unsigned char> GriddedField::wet_mask() const {
  std::vector<unsigned char> mask(ny() * nx(), 1);
  for (std::size_t it = 0; it < nt(); ++it)
    for (std::size_t iy = 0; iy < ny(); ++iy)
      for (std::size_t ix = 0; ix < nx(); ++ix)
        if (!wet(it, iy, ix)) mask[iy * nx() + ix] = 0;
  return mask;
}

bool GriddedField::is_water(const Point2& p, double time) const {
  if (!(p.x >= x.front() && p.x <= x.back() && p.y >= y.front() && p.y <= y.back()))
    return false;
  const std::size_t ix = bracket(x, p.x, "x");
  const std::size_t iy = bracket(y, p.y, "y");
  std::size_t it = 0;
  if (nt() > 1) {
    const double tc = std::clamp(time, t.front(), t.back());
    const std::size_t lo = bracket(t, tc, "t");
    it = (tc - t[lo]) <= (t[lo + 1] - tc) ? lo : lo + 1;
  }
  return wet(it, iy, ix) && wet(it, iy, ix + 1) && wet(it, iy + 1, ix) &&
         wet(it, iy + 1, ix + 1);
}

void GriddedField::validate() const {
  if (nx() < 2 || ny() < 2 || nt() < 1)
    throw Error(ErrorCode::parse, "gridded field needs at least 2 x, 2 y and 1 t samples");
  if (!strictly_increasing(x)) throw Error(ErrorCode::parse, "x axis not strictly increasing");
  if (!strictly_increasing(y)) throw Error(ErrorCode::parse, "y axis not strictly increasing");
  if (!strictly_increasing(t)) throw Error(ErrorCode::parse, "t axis not strictly increasing");
  const std::size_t n = nx() * ny() * nt();
  if (u.size() != n || v.size() != n)
    throw Error(ErrorCode::parse, "velocity arrays do not match axis lengths");
  if (!(time_unit_seconds > 0.0) || !std::isfinite(time_unit_seconds))
    throw Error(ErrorCode::parse, "time unit must be positive");
  for (std::size_t it = 0; it < nt(); ++it) {
    bool any = false;
    for (std::size_t k = 0; k < nx() * ny() && !any; ++k)
      any = wet(it, k / nx(), k % nx());
    if (!any)
      throw Error(ErrorCode::parse, "time slice " + std::to_string(it) + " has no wet samples");
  }
}

// Layout: 8-byte magic "RELCOHGF", u32 version (1), u32 reserved (0),
// u64 nx, u64 ny, u64 nt, f64 time_unit_seconds, f64 x[nx], f64 y[ny],
// f64 t[nt], f64 u[nt*ny*nx], f64 v[nt*ny*nx]; all little-endian.
void write_gridded(std::ostream& out, const GriddedField& f) {
  f.validate();
  out.write(kFieldMagic, sizeof(kFieldMagic));
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, 0);
  put<std::uint64_t>(out, f.nx());
  put<std::uint64_t>(out, f.ny());
  put<std::uint64_t>(out, f.nt());
  put<double>(out, f.time_unit_seconds);
  put_array(out, f.x);
  put_array(out, f.y);
  put_array(out, f.t);
  put_array(out, f.u);
  put_array(out, f.v);
  if (!out) throw Error(ErrorCode::io, "failed writing gridded field");
}

GriddedField read_gridded(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kFieldMagic, sizeof(magic)) != 0)
    throw Error(ErrorCode::parse, "not a gridded field file (bad magic)");
  const auto version = get<std::uint32_t>(in, "header");
  if (version != 1) throw Error(ErrorCode::parse, "unsupported gridded field version");
  (void)get<std::uint32_t>(in, "header");
  const auto nx = get<std::uint64_t>(in, "header");
  const auto ny = get<std::uint64_t>(in, "header");
  const auto nt = get<std::uint64_t>(in, "header");
  constexpr std::uint64_t kMax = std::uint64_t{1} << 32;
  if (nx > kMax || ny > kMax || nt > kMax || nx * ny > kMax || nx * ny * nt > kMax)
    throw Error(ErrorCode::parse, "gridded field header has implausible axis lengths");
  GriddedField f;
  f.time_unit_seconds = get<double>(in, "header");
  get_array(in, f.x, nx, "x axis");
  get_array(in, f.y, ny, "y axis");
  get_array(in, f.t, nt, "t axis");
  get_array(in, f.u, nx * ny * nt, "u block");
  get_array(in, f.v, nx * ny * nt, "v block");
  if (in.peek() != std::char_traits<char>::eof())
    throw Error(ErrorCode::parse, "trailing bytes after v block (shape mismatch)");
  f.validate();
  return f;
}

GriddedField load_gridded(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open gridded field '" + path + "'");
  return read_gridded(in);
}

void save_gridded(const std::string& path, const GriddedField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot create '" + path + "'");
  write_gridded(out, field);
}

// ---------------------------------------------------------------------------
// FlowSpec

const char* to_string(FlowKind kind) {
  switch (kind) {
    case FlowKind::double_gyre: return "double-gyre";
    case FlowKind::standard_map: return "standard-map";
    case FlowKind::rossby: return "rossby";
    case FlowKind::gridded: return "gridded";
    case FlowKind::linear: return "linear";
  }
  return "unknown";
}

FlowKind flow_kind_from_string(const std::string& name) {
  for (FlowKind k : {FlowKind::double_gyre, FlowKind::standard_map, FlowKind::rossby,
                     FlowKind::gridded, FlowKind::linear})
    if (name == to_string(k)) return k;
  throw Error(ErrorCode::invalid_argument, "unknown flow kind '" + name + "'");
}

std::vector<std::string> required_params(FlowKind kind) {
  switch (kind) {
    case FlowKind::double_gyre: return {"A", "epsilon", "omega"};
    case FlowKind::standard_map: return {"K"};
    case FlowKind::rossby:
      return {"U0", "c2", "c3", "A1", "A2", "A3", "L", "k1", "k2", "k3", "sigma1", "sigma2"};
    case FlowKind::linear: return {"a11", "a12", "a21", "a22", "b1", "b2"};
    case FlowKind::gridded: return {};
  }
  return {};
}

double FlowSpec::param(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end())
    throw Error(ErrorCode::invalid_argument,
                std::string(to_string(kind)) + " flow is missing parameter '" + name + "'");
  return it->second;
}

double FlowSpec::x_period() const {
  auto it = params.find("x_period");
  return it == params.end() ? 0.0 : it->second;
}

void FlowSpec::validate() const {
  if (!(x_period() >= 0.0) || !std::isfinite(x_period()))
    throw Error(ErrorCode::invalid_argument, "x_period must be a nonnegative length");
  for (const auto& name : required_params(kind)) {
    const double v = param(name);
    if (!std::isfinite(v))
      throw Error(ErrorCode::invalid_argument, "parameter '" + name + "' is not finite");
  }
  if (!std::isfinite(t0) || !std::isfinite(tau) || tau < 0.0)
    throw Error(ErrorCode::invalid_argument, "t0 must be finite and tau nonnegative");
  if (kind == FlowKind::standard_map) {
    if (tau != std::floor(tau))
      throw Error(ErrorCode::invalid_argument, "standard map tau must be an integer count");
  } else if (!(integrator_step > 0.0) || !std::isfinite(integrator_step)) {
    throw Error(ErrorCode::invalid_argument, "integrator_step must be positive");
  }
  if (kind == FlowKind::gridded && !field)
    throw Error(ErrorCode::invalid_argument, "gridded flow has no field attached");
}

FlowSpec double_gyre_flow(double A, double epsilon, double omega, double t0, double tau,
                          double step) {
  FlowSpec s;
  s.kind = FlowKind::double_gyre;
  s.params = {{"A", A}, {"epsilon", epsilon}, {"omega", omega}};
  s.t0 = t0;
  s.tau = tau;
  s.integrator_step = step;
  return s;
}

FlowSpec standard_map_flow(double K, unsigned iterations) {
  FlowSpec s;
  s.kind = FlowKind::standard_map;
  s.params = {{"K", K}};
  s.tau = iterations;
  return s;
}

std::map<std::string, double> rossby_default_params() {
  const double U0 = 63.66;            // m/s
  const double r0 = 6.371e6;          // m
  const double c2 = 0.205 * U0;
  const double c3 = 0.7 * U0;
  const double k1 = 2.0 / r0;
  const double k2 = 4.0 / r0;
  const double k3 = 6.0 / r0;
  const double sigma2 = k2 * (c2 - c3);
  return {{"U0", U0},        {"c2", c2},           {"c3", c3},          {"A1", 0.075},
          {"A2", 0.4},       {"A3", 0.2},          {"L", 1.77e6},       {"k1", k1},
          {"k2", k2},        {"k3", k3},           {"sigma1", 0.5 * sigma2}, {"sigma2", sigma2}};
}

FlowSpec rossby_flow(double tau_seconds, double step_seconds) {
  FlowSpec s;
  s.kind = FlowKind::rossby;
  s.params = rossby_default_params();
  s.tau = tau_seconds;
  s.integrator_step = step_seconds;
  return s;
}

FlowSpec gridded_flow(std::shared_ptr<const GriddedField> field, double t0, double tau,
                      double step) {
  FlowSpec s;
  s.kind = FlowKind::gridded;
  s.field = std::move(field);
  s.t0 = t0;
  s.tau = tau;
  s.integrator_step = step;
  return s;
}

FlowSpec linear_flow(double a11, double a12, double a21, double a22, double b1, double b2) {
  FlowSpec s;
  s.kind = FlowKind::linear;
  s.params = {{"a11", a11}, {"a12", a12}, {"a21", a21}, {"a22", a22}, {"b1", b1}, {"b2", b2}};
  s.tau = 1.0;
  return s;
}

Vec2 velocity(const FlowSpec& spec, const Point2& p, double t) {
  return FlowEval(spec)(p, t);
}

void standard_map_step(double& theta, double& p, double K) {
  p = wrap_angle(p + K * std::sin(theta));
  theta = wrap_angle(theta + p);
}

// ---------------------------------------------------------------------------
// Advection

std::size_t TrajectoryEnsemble::flagged_count() const {
  return static_cast<std::size_t>(std::count(flagged.begin(), flagged.end(), 1));
}

TrajectoryEnsemble advect(const FlowSpec& spec, std::span<const Point2> initial,
                          std::uint64_t seed, unsigned workers) {
  spec.validate();
  TrajectoryEnsemble ens;
  ens.initial.assign(initial.begin(), initial.end());
  ens.final.resize(initial.size());
  ens.flagged.assign(initial.size(), 0);
  ens.t0 = spec.t0;
  ens.tau = spec.tau;
  ens.seed = seed;

  if (spec.kind == FlowKind::standard_map) {
    const double K = spec.param("K");
    const auto iters = static_cast<std::uint64_t>(spec.tau);
    parallel_chunks(initial.size(), workers, [&](std::size_t, std::size_t b, std::size_t e) {
      for (std::size_t k = b; k < e; ++k) {
        double theta = wrap_angle(kTwoPi * initial[k].x);
        double p = wrap_angle(kTwoPi * initial[k].y);
        for (std::uint64_t n = 0; n < iters; ++n) standard_map_step(theta, p, K);
        ens.final[k] = {wrap_unit(theta / kTwoPi), wrap_unit(p / kTwoPi)};
      }
    });
    return ens;
  }

  const double h = spec.integrator_step;
  auto full_steps = static_cast<std::uint64_t>(std::floor(spec.tau / h));
  double last = spec.tau - static_cast<double>(full_steps) * h;
  if (last <= 1e-12 * std::max(1.0, spec.tau)) last = 0.0;
  const bool open_field = spec.kind == FlowKind::gridded;
  const FlowEval flow(spec);
  const double period = spec.x_period();
  std::vector<StepTimes> times(full_steps + 1);
  for (std::uint64_t n = 0; n < full_steps; ++n)
    times[n] = step_times(flow, spec.t0 + static_cast<double>(n) * h, h);
  if (last > 0.0)
    times[full_steps] = step_times(flow, spec.t0 + static_cast<double>(full_steps) * h, last);

  parallel_chunks(initial.size(), workers, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      Point2 z = initial[k];
      bool frozen = false;
      auto advance = [&](std::uint64_t n, double dt) {
        if (frozen) return;
        Point2 next;
        if (open_field) {
          try {
            next = rk4_step(flow, z, times[n], dt);
          } catch (const Error& err) {
            if (err.code() != ErrorCode::out_of_range) throw;
            frozen = true;
            return;
          }
        } else {
          next = rk4_step(flow, z, times[n], dt);
        }
        if (!is_finite(next))
          throw Error(ErrorCode::diverged, "trajectory " + std::to_string(k) +
                                               " diverged at t = " + detail::fmt(times[n].start.t));
        z = next;
      };
      for (std::uint64_t n = 0; n < full_steps && !frozen; ++n)
        advance(n, h);
      if (last > 0.0) advance(full_steps, last);
      if (period > 0.0) z.x -= period * std::floor(z.x / period);
      ens.final[k] = z;
      ens.flagged[k] = frozen ? 1 : 0;
    }
  });
  return ens;
}

std::vector<Point2> seed_uniform(const Rect& rect, std::size_t n, std::uint64_t seed) {
  rect.validate();
  std::mt19937_64 rng(seed);
  auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<Point2> pts(n);
  for (auto& p : pts) {
    p.x = rect.xmin + unit() * rect.width();
    p.y = rect.ymin + unit() * rect.height();
  }
  return pts;
}

std::vector<Point2> seed_uniform_water(const Rect& rect, std::size_t n, std::uint64_t seed,
                                       const GriddedField& field, double t) {
  rect.validate();
  std::mt19937_64 rng(seed);
  auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<Point2> pts;
  pts.reserve(n);
  std::size_t attempts = 0;
  const std::size_t limit = 1000 * std::max<std::size_t>(n, 1000);
  while (pts.size() < n) {
    if (++attempts > limit)
      throw Error(ErrorCode::invalid_domain, "seeding window contains almost no water");
    Point2 p{rect.xmin + unit() * rect.width(), rect.ymin + unit() * rect.height()};
    if (field.is_water(p, t)) pts.push_back(p);
  }
  return pts;
}

// Layout: magic "RELCOHEN", u64 n, f64 t0, f64 tau, u64 seed, then n records
// of f64 (x0, y0, x1, y1), then n flag bytes.
void write_ensemble(std::ostream& out, const TrajectoryEnsemble& ens) {
  out.write(kEnsembleMagic, sizeof(kEnsembleMagic));
  put<std::uint64_t>(out, ens.size());
  put<double>(out, ens.t0);
  put<double>(out, ens.tau);
  put<std::uint64_t>(out, ens.seed);
  for (std::size_t k = 0; k < ens.size(); ++k) {
    put(out, ens.initial[k].x);
    put(out, ens.initial[k].y);
    put(out, ens.final[k].x);
    put(out, ens.final[k].y);
  }
  put_array(out, ens.flagged);
  if (!out) throw Error(ErrorCode::io, "failed writing ensemble");
}

TrajectoryEnsemble read_ensemble(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kEnsembleMagic, sizeof(magic)) != 0)
    throw Error(ErrorCode::parse, "not an ensemble file (bad magic)");
  TrajectoryEnsemble ens;
  const auto n = get<std::uint64_t>(in, "ensemble header");
  ens.t0 = get<double>(in, "ensemble header");
  ens.tau = get<double>(in, "ensemble header");
  ens.seed = get<std::uint64_t>(in, "ensemble header");
  std::vector<double> raw;
  get_array(in, raw, 4 * n, "ensemble points");
  ens.initial.resize(n);
  ens.final.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    ens.initial[k] = {raw[4 * k], raw[4 * k + 1]};
    ens.final[k] = {raw[4 * k + 2], raw[4 * k + 3]};
  }
  get_array(in, ens.flagged, n, "ensemble flags");
  return ens;
}

}  // namespace relcoh
