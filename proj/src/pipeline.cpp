#include "relcoh/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "relcoh/error.hpp"
#include "text_io.hpp"

namespace fs = std::filesystem;

namespace relcoh {

namespace {

template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  } catch (const std::exception& e) {
    throw StageError(stage, Error(ErrorCode::io, e.what()));
  }
}

std::ofstream open_out(const fs::path& p, bool binary = false) {
  std::ofstream out(p, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + p.string() + "'");
  return out;
}

std::ifstream open_in(const fs::path& p, bool binary = false) {
  std::ifstream in(p, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error(ErrorCode::io, "cannot read '" + p.string() + "'");
  return in;
}

void finish(std::ofstream& out, const fs::path& p) {
  out.flush();
  if (!out) throw Error(ErrorCode::io, "write to '" + p.string() + "' failed");
}

std::shared_ptr<const TriMesh> domain_mesh(const RunConfig& c) {
  return std::make_shared<const TriMesh>(c.domain_rect, c.domain_nx, c.domain_ny);
}

void write_summary(std::ostream& out, const TrajectoryEnsemble& ens) {
  out << "relcoh-ensemble-summary 1\n"
      << "points " << ens.size() << '\n'
      << "flagged " << ens.flagged_count() << '\n'
      << "t0 " << detail::fmt(ens.t0) << '\n'
      << "tau " << detail::fmt(ens.tau) << '\n'
      << "seed " << ens.seed << '\n';
  if (ens.size() == 0) return;
  Rect box{ens.final[0].x, ens.final[0].x, ens.final[0].y, ens.final[0].y};
  for (const auto& q : ens.final) {
    box.xmin = std::min(box.xmin, q.x);
    box.xmax = std::max(box.xmax, q.x);
    box.ymin = std::min(box.ymin, q.y);
    box.ymax = std::max(box.ymax, q.y);
  }
  out << "final_bounds " << detail::fmt(box.xmin) << ' ' << detail::fmt(box.xmax) << ' '
      << detail::fmt(box.ymin) << ' ' << detail::fmt(box.ymax) << '\n';
}

void save_ensemble(const fs::path& dir, const TrajectoryEnsemble& ens) {
  {
    const fs::path p = dir / bundle::kEnsemble;
    auto out = open_out(p, true);
    write_ensemble(out, ens);
    finish(out, p);
  }
  const fs::path p = dir / bundle::kEnsembleSummary;
  auto out = open_out(p);
  write_summary(out, ens);
  finish(out, p);
}

void save_matrix_stage(const fs::path& dir, const MatrixStage& m) {
  auto put = [&](const char* name, auto&& writer) {
    const fs::path p = dir / name;
    auto out = open_out(p);
    writer(out);
    finish(out, p);
  };
  put(bundle::kDomainMesh, [&](std::ostream& o) { write_mesh(o, *m.domain.mesh, m.domain.active); });
  put(bundle::kImageMesh, [&](std::ostream& o) { write_mesh(o, *m.image.mesh, m.image.active); });
  put(bundle::kMatrix, [&](std::ostream& o) { write_matrix(o, m.matrix); });
  put(bundle::kOutflow, [&](std::ostream& o) { write_outflow(o, m.matrix); });
}

void save_tree(const fs::path& dir, const HierarchyTree& tree, const CellLabels& labels) {
  auto put = [&](const char* name, auto&& writer) {
    const fs::path p = dir / name;
    auto out = open_out(p);
    writer(out);
    finish(out, p);
  };
  put(bundle::kTree, [&](std::ostream& o) { write_tree(o, tree); });
  put(bundle::kLabelsX, [&](std::ostream& o) { write_labels(o, labels.x); });
  put(bundle::kLabelsY, [&](std::ostream& o) { write_labels(o, labels.y); });
}

void save_config(const fs::path& dir, const RunConfig& c) {
  const fs::path p = dir / bundle::kConfig;
  auto out = open_out(p);
  write_config(out, c);
  finish(out, p);
}

Partition partition_from_file(const fs::path& p) {
  auto in = open_in(p);
  MeshDescription d = read_mesh(in);
  auto mesh = std::make_shared<const TriMesh>(d.rect, d.nx, d.ny);
  return uniform_partition(mesh, std::move(d.active));
}

TransitionMatrix matrix_from_files(const fs::path& dir) {
  auto m = open_in(dir / bundle::kMatrix);
  auto o = open_in(dir / bundle::kOutflow);
  return read_matrix(m, o);
}

}  // namespace

Partition domain_partition(const RunConfig& c) {
  auto mesh = domain_mesh(c);
  if (c.domain_mask == DomainMask::all) return uniform_partition(mesh, all_cells(*mesh));
  IndexSet wet;
  for (std::size_t t = 0; t < mesh->size(); ++t)
    if (c.flow.field->is_water(mesh->centroid(t), c.flow.t0)) wet.push_back(t);
  return uniform_partition(mesh, std::move(wet));
}

TrajectoryEnsemble run_advect(const RunConfig& c) {
  c.validate();
  std::vector<Point2> initial =
      c.domain_mask == DomainMask::water
          ? seed_uniform_water(c.domain_rect, c.n_points, c.seed, *c.flow.field, c.flow.t0)
          : seed_uniform(c.domain_rect, c.n_points, c.seed);
  return advect(c.flow, initial, c.seed, c.workers);
}

MatrixStage run_matrix(const RunConfig& c, const TrajectoryEnsemble& ens) {
  MatrixStage m;
  m.domain = domain_partition(c);
  if (c.image_mode == ImageMode::same) {
    m.image = m.domain;
  } else {
    auto mesh = std::make_shared<const TriMesh>(c.image_rect, c.image_nx, c.image_ny);
    std::vector<Point2> landed;
    landed.reserve(ens.size());
    for (std::size_t k = 0; k < ens.size(); ++k)
      if (!ens.flagged[k] && m.domain.is_active(m.domain.mesh->locate(ens.initial[k])))
        landed.push_back(ens.final[k]);
    IndexSet occupied = occupancy_mask(*mesh, landed);
    if (occupied.empty())
      throw Error(ErrorCode::empty_partition, "no final point lies inside the image window");
    m.image = uniform_partition(mesh, std::move(occupied));
  }
  m.matrix = build_matrix(ens, m.domain, m.image, c.workers);
  return m;
}

HierarchyTree run_tree(const RunConfig& c, const TransitionMatrix& P, const Partition& domain) {
  return build_tree(P, domain.weights, c.tree_options());
}

PipelineResult run_pipeline(const RunConfig& config) {
  in_stage("config", [&] { config.validate(); });
  const fs::path target = fs::absolute(config.output).lexically_normal();
  const fs::path scratch = target.parent_path() / (target.filename().string() + ".partial");

  PipelineResult r;
  r.directory = target.string();
  try {
    in_stage("output", [&] {
      fs::remove_all(scratch);
      fs::create_directories(scratch);
      save_config(scratch, config);
    });
    r.ensemble = in_stage("advect", [&] {
      auto ens = run_advect(config);
      save_ensemble(scratch, ens);
      return ens;
    });
    r.stage = in_stage("matrix", [&] {
      auto m = run_matrix(config, r.ensemble);
      save_matrix_stage(scratch, m);
      return m;
    });
    in_stage("tree", [&] {
      r.tree = run_tree(config, r.stage.matrix, r.stage.domain);
      r.labels = assign_labels(r.tree);
      save_tree(scratch, r.tree, r.labels);
    });
    in_stage("output", [&] {
      fs::remove_all(target);
      fs::rename(scratch, target);
    });
  } catch (...) {
    std::error_code ec;
    fs::remove_all(scratch, ec);
    throw;
  }
  return r;
}

void stage_advect(const RunConfig& config, const std::string& dir) {
  in_stage("advect", [&] {
    config.validate();
    fs::create_directories(dir);
    save_config(dir, config);
    save_ensemble(dir, run_advect(config));
  });
}

void stage_matrix(const RunConfig& config, const std::string& dir) {
  in_stage("matrix", [&] {
    config.validate();
    auto in = open_in(fs::path(dir) / bundle::kEnsemble, true);
    const TrajectoryEnsemble ens = read_ensemble(in);
    save_matrix_stage(dir, run_matrix(config, ens));
  });
}

void stage_tree(const RunConfig& config, const std::string& dir) {
  in_stage("tree", [&] {
    config.validate();
    const TransitionMatrix P = matrix_from_files(dir);
    const Partition domain = partition_from_file(fs::path(dir) / bundle::kDomainMesh);
    if (domain.size() != P.n_rows)
      throw Error(ErrorCode::validation, "domain mesh does not match the matrix rows");
    const HierarchyTree tree = run_tree(config, P, domain);
    save_config(dir, config);
    save_tree(dir, tree, assign_labels(tree));
  });
}

LoadedBundle load_bundle(const std::string& dir_name) {
  const fs::path dir(dir_name);
  if (!fs::is_directory(dir)) throw Error(ErrorCode::io, "no bundle directory '" + dir_name + "'");
  LoadedBundle b;
  b.config = load_config((dir / bundle::kConfig).string());
  b.domain = partition_from_file(dir / bundle::kDomainMesh);
  b.image = partition_from_file(dir / bundle::kImageMesh);
  b.domain_mesh = b.domain.mesh;
  b.image_mesh = b.image.mesh;
  b.matrix = matrix_from_files(dir);
  {
    auto in = open_in(dir / bundle::kTree);
    b.tree = read_tree(in);
  }
  {
    auto in = open_in(dir / bundle::kLabelsX);
    b.labels_x = read_labels(in);
  }
  {
    auto in = open_in(dir / bundle::kLabelsY);
    b.labels_y = read_labels(in);
  }
  return b;
}

SamplingAdvice advise_for(const RunConfig& c, double* raw_lipschitz) {
  const double M = estimate_lipschitz(c.flow, c.domain_rect, c.lipschitz_samples, c.seed, c.workers);
  if (raw_lipschitz) *raw_lipschitz = M;
  const double q = c.advisor_q > 0.0
                       ? c.advisor_q
                       : std::min(c.domain_rect.width() / static_cast<double>(c.domain_nx),
                                  c.domain_rect.height() / static_cast<double>(c.domain_ny));
  const Partition domain = domain_partition(c);
  return advise(q, M * c.advisor_safety, std::abs(c.flow.tau), domain.active.size());
}

}  // namespace relcoh
