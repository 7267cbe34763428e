#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "relcoh/dynamics.hpp"
#include "relcoh/hierarchy.hpp"
#include "relcoh/mesh.hpp"

namespace relcoh {

enum class ImageMode {
  same,       // image partition = domain partition (closed systems)
  occupancy,  // active image cells = cells hit by a final point
};

enum class DomainMask {
  all,    // every domain cell is active
  water,  // cells whose centroid is water at t0 (gridded fields)
};

/// One run, fully determined by its config file.
///
///   flow:     { kind, params: {..}, t0, tau, integrator_step, field }
///   domain:   { rect: [xmin, xmax, ymin, ymax], grid: [nx, ny], mask: all|water }
///   image:    { rect, grid, mode: same|occupancy }          (optional)
///   sampling: { n_points, seed }
///   tree:     { rho0, max_depth, min_mass, weighting: plain|measure }
///   spectral: { tol, max_iter }
///   advisor:  { q, safety, lipschitz_samples }              (optional)
///   workers, output
struct RunConfig {
  FlowSpec flow;
  std::string field_path;

  Rect domain_rect;
  std::size_t domain_nx = 1;
  std::size_t domain_ny = 1;
  DomainMask domain_mask = DomainMask::all;

  Rect image_rect;
  std::size_t image_nx = 1;
  std::size_t image_ny = 1;
  ImageMode image_mode = ImageMode::same;

  std::size_t n_points = 0;
  std::uint64_t seed = 0;

  double rho0 = 0.9;
  std::size_t max_depth = 4;
  double min_mass = 0.05;
  SvdWeighting weighting = SvdWeighting::plain;
  double tol = 1e-11;
  std::size_t max_iter = 20000;

  double advisor_q = 0.0;  // 0: cell side of the domain grid
  double advisor_safety = 1.1;
  std::size_t lipschitz_samples = 100000;

  unsigned workers = 0;
  std::string output = "out";

  /// Open systems track mass leaving the image window.
  bool open() const { return image_mode == ImageMode::occupancy; }
  TreeOptions tree_options() const;
  void validate() const;
};

/// Relative paths inside the file (field) resolve against base_dir.
RunConfig parse_config(const std::string& yaml_text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);
/// Canonical form; worker count and output directory are not part of it.
void write_config(std::ostream& out, const RunConfig& config);

const char* to_string(ImageMode m);
const char* to_string(DomainMask m);
const char* to_string(SvdWeighting w);

}  // namespace relcoh
