#include "relcoh/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "relcoh/error.hpp"
#include "text_io.hpp"

namespace relcoh {

const char* to_string(ImageMode m) { return m == ImageMode::same ? "same" : "occupancy"; }
const char* to_string(DomainMask m) { return m == DomainMask::all ? "all" : "water"; }
const char* to_string(SvdWeighting w) { return w == SvdWeighting::plain ? "plain" : "measure"; }

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::validation, msg); }

template <typename T>
T get(const YAML::Node& node, const std::string& key, T fallback) {
  const YAML::Node v = node[key];
  if (!v) return fallback;
  try {
    return v.as<T>();
  } catch (const YAML::Exception&) {
    bad("config key '" + key + "' has the wrong type");
  }
}

Rect get_rect(const YAML::Node& node, const std::string& where) {
  const YAML::Node r = node["rect"];
  if (!r || !r.IsSequence() || r.size() != 4) bad(where + ".rect must be [xmin, xmax, ymin, ymax]");
  Rect rect{r[0].as<double>(), r[1].as<double>(), r[2].as<double>(), r[3].as<double>()};
  try {
    rect.validate();
  } catch (const Error& e) {
    bad(where + ".rect: " + e.what());
  }
  return rect;
}

void get_grid(const YAML::Node& node, const std::string& where, std::size_t& nx, std::size_t& ny) {
  const YAML::Node g = node["grid"];
  if (!g || !g.IsSequence() || g.size() != 2) bad(where + ".grid must be [nx, ny]");
  const long long a = g[0].as<long long>();
  const long long b = g[1].as<long long>();
  if (a < 1 || b < 1) bad(where + ".grid counts must be positive");
  nx = static_cast<std::size_t>(a);
  ny = static_cast<std::size_t>(b);
}

std::map<std::string, double> default_params(FlowKind kind) {
  switch (kind) {
    case FlowKind::double_gyre: return double_gyre_flow().params;
    case FlowKind::rossby: return rossby_default_params();
    case FlowKind::linear: return linear_flow(0, 0, 0, 0).params;
    default: return {};
  }
}

}  // namespace

TreeOptions RunConfig::tree_options() const {
  TreeOptions o;
  o.rho0 = rho0;
  o.max_depth = max_depth;
  o.min_mass = min_mass;
  o.seed = seed;
  o.tol = tol;
  o.max_iter = max_iter;
  o.weighting = weighting;
  return o;
}

void RunConfig::validate() const {
  if (n_points == 0) bad("sampling.n_points must be positive");
  if (!(rho0 > 0.0 && rho0 < 1.0)) bad("tree.rho0 must lie in (0, 1)");
  if (max_depth < 1) bad("tree.max_depth must be >= 1");
  if (!(min_mass > 0.0 && min_mass < 0.5)) bad("tree.min_mass must lie in (0, 0.5)");
  if (!(tol > 0.0) || max_iter == 0) bad("spectral.tol and spectral.max_iter must be positive");
  if (advisor_q < 0.0 || !(advisor_safety >= 1.0) || lipschitz_samples == 0)
    bad("advisor settings must be positive (safety >= 1)");
  if (domain_mask == DomainMask::water && flow.kind != FlowKind::gridded)
    bad("domain.mask = water needs a gridded flow");
  try {
    domain_rect.validate();
    image_rect.validate();
    flow.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
}

RunConfig parse_config(const std::string& yaml_text, const std::string& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::parse, std::string("config: ") + e.what());
  }
  if (!root.IsMap()) bad("config must be a mapping");

  RunConfig c;
  try {
    const YAML::Node flow = root["flow"];
    if (!flow) bad("config has no flow section");
    try {
      c.flow.kind = flow_kind_from_string(get<std::string>(flow, "kind", ""));
    } catch (const Error& e) {
      bad(e.what());
    }
    c.flow.params = default_params(c.flow.kind);
    if (const YAML::Node params = flow["params"]) {
      if (!params.IsMap()) bad("flow.params must be a mapping");
      for (const auto& kv : params) c.flow.params[kv.first.as<std::string>()] = kv.second.as<double>();
    }
    c.flow.t0 = get<double>(flow, "t0", 0.0);
    c.flow.tau = get<double>(flow, "tau", 0.0);
    if (flow["tau_days"]) c.flow.tau = get<double>(flow, "tau_days", 0.0) * 86400.0;
    c.flow.integrator_step = get<double>(flow, "integrator_step", 0.01);
    c.field_path = get<std::string>(flow, "field", "");
    if (c.flow.kind == FlowKind::gridded) {
      if (c.field_path.empty()) bad("gridded flow needs flow.field");
      std::filesystem::path fp(c.field_path);
      if (fp.is_relative()) fp = std::filesystem::path(base_dir) / fp;
      fp = std::filesystem::absolute(fp).lexically_normal();
      c.field_path = fp.string();
      c.flow.field = std::make_shared<GriddedField>(load_gridded(fp.string()));
    }

    const YAML::Node domain = root["domain"];
    if (!domain) bad("config has no domain section");
    c.domain_rect = get_rect(domain, "domain");
    get_grid(domain, "domain", c.domain_nx, c.domain_ny);
    const std::string mask = get<std::string>(domain, "mask", "all");
    if (mask == "all") c.domain_mask = DomainMask::all;
    else if (mask == "water") c.domain_mask = DomainMask::water;
    else bad("domain.mask must be all or water");

    c.image_rect = c.domain_rect;
    c.image_nx = c.domain_nx;
    c.image_ny = c.domain_ny;
    if (const YAML::Node image = root["image"]) {
      if (image["rect"]) c.image_rect = get_rect(image, "image");
      if (image["grid"]) get_grid(image, "image", c.image_nx, c.image_ny);
      const std::string mode = get<std::string>(image, "mode", "same");
      if (mode == "same") c.image_mode = ImageMode::same;
      else if (mode == "occupancy") c.image_mode = ImageMode::occupancy;
      else bad("image.mode must be same or occupancy");
    }
    if (c.image_mode == ImageMode::same &&
        (!(c.image_rect == c.domain_rect) || c.image_nx != c.domain_nx ||
         c.image_ny != c.domain_ny))
      bad("image.mode = same requires the image window and grid to equal the domain's");

    const YAML::Node sampling = root["sampling"];
    if (!sampling) bad("config has no sampling section");
    const long long n = get<long long>(sampling, "n_points", 0);
    if (n <= 0) bad("sampling.n_points must be positive");
    c.n_points = static_cast<std::size_t>(n);
    c.seed = get<std::uint64_t>(sampling, "seed", 0);

    if (const YAML::Node tree = root["tree"]) {
      c.rho0 = get<double>(tree, "rho0", c.rho0);
      const long long d = get<long long>(tree, "max_depth", 4);
      if (d < 1) bad("tree.max_depth must be >= 1");
      c.max_depth = static_cast<std::size_t>(d);
      c.min_mass = get<double>(tree, "min_mass", c.min_mass);
      const std::string w = get<std::string>(tree, "weighting", "plain");
      if (w == "plain") c.weighting = SvdWeighting::plain;
      else if (w == "measure") c.weighting = SvdWeighting::measure;
      else bad("tree.weighting must be plain or measure");
    }
    if (const YAML::Node sp = root["spectral"]) {
      c.tol = get<double>(sp, "tol", c.tol);
      c.max_iter = get<std::size_t>(sp, "max_iter", c.max_iter);
    }
    if (const YAML::Node adv = root["advisor"]) {
      c.advisor_q = get<double>(adv, "q", 0.0);
      c.advisor_safety = get<double>(adv, "safety", c.advisor_safety);
      c.lipschitz_samples = get<std::size_t>(adv, "lipschitz_samples", c.lipschitz_samples);
    }
    c.workers = get<unsigned>(root, "workers", 0);
    c.output = get<std::string>(root, "output", "out");
  } catch (const YAML::Exception& e) {
    bad(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  const auto base = std::filesystem::path(path).parent_path();
  return parse_config(text.str(), base.empty() ? "." : base.string());
}

void write_config(std::ostream& out, const RunConfig& c) {
  using detail::fmt;
  out << "flow:\n  kind: " << to_string(c.flow.kind) << "\n  params:\n";
  for (const auto& [k, v] : c.flow.params) out << "    " << k << ": " << fmt(v) << '\n';
  out << "  t0: " << fmt(c.flow.t0) << "\n  tau: " << fmt(c.flow.tau)
      << "\n  integrator_step: " << fmt(c.flow.integrator_step) << '\n';
  if (!c.field_path.empty()) out << "  field: " << c.field_path << '\n';
  auto rect = [&](const Rect& r) {
    return "[" + fmt(r.xmin) + ", " + fmt(r.xmax) + ", " + fmt(r.ymin) + ", " + fmt(r.ymax) + "]";
  };
  out << "domain:\n  rect: " << rect(c.domain_rect) << "\n  grid: [" << c.domain_nx << ", "
      << c.domain_ny << "]\n  mask: " << to_string(c.domain_mask) << '\n';
  out << "image:\n  rect: " << rect(c.image_rect) << "\n  grid: [" << c.image_nx << ", "
      << c.image_ny << "]\n  mode: " << to_string(c.image_mode) << '\n';
  out << "sampling:\n  n_points: " << c.n_points << "\n  seed: " << c.seed << '\n';
  out << "tree:\n  rho0: " << fmt(c.rho0) << "\n  max_depth: " << c.max_depth
      << "\n  min_mass: " << fmt(c.min_mass) << "\n  weighting: " << to_string(c.weighting) << '\n';
  out << "spectral:\n  tol: " << fmt(c.tol) << "\n  max_iter: " << c.max_iter << '\n';
  out << "advisor:\n  q: " << fmt(c.advisor_q) << "\n  safety: " << fmt(c.advisor_safety)
      << "\n  lipschitz_samples: " << c.lipschitz_samples << '\n';
}

}  // namespace relcoh
