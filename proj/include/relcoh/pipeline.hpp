#pragma once

#include <memory>
#include <string>
#include <vector>

#include "relcoh/config.hpp"
#include "relcoh/dynamics.hpp"
#include "relcoh/error.hpp"
#include "relcoh/hierarchy.hpp"
#include "relcoh/mesh.hpp"
#include "relcoh/sampling.hpp"
#include "relcoh/transfer.hpp"

namespace relcoh {

/// Error raised by a pipeline stage; what() carries the stage name prefix.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.code(), stage + ": " + cause.what()), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Domain partition of a config: uniform weights over all cells, or over
/// the water cells of a gridded field at t0.
Partition domain_partition(const RunConfig& config);

/// Seeds config.n_points uniform points (water points only for a water
/// mask) and advects them through the epoch.
TrajectoryEnsemble run_advect(const RunConfig& config);

struct MatrixStage {
  Partition domain;
  Partition image;
  TransitionMatrix matrix;
};

/// Builds the two partitions and the Ulam matrix. Closed systems reuse the
/// domain partition; open systems take the occupancy mask of the final
/// points on the image grid.
MatrixStage run_matrix(const RunConfig& config, const TrajectoryEnsemble& ensemble);

HierarchyTree run_tree(const RunConfig& config, const TransitionMatrix& P,
                       const Partition& domain);

/// Bundle file names.
namespace bundle {
inline constexpr const char* kConfig = "config.yaml";
inline constexpr const char* kEnsemble = "ensemble.bin";
inline constexpr const char* kEnsembleSummary = "ensemble.txt";
inline constexpr const char* kDomainMesh = "domain_mesh.txt";
inline constexpr const char* kImageMesh = "image_mesh.txt";
inline constexpr const char* kMatrix = "matrix.txt";
inline constexpr const char* kOutflow = "outflow.txt";
inline constexpr const char* kTree = "tree.txt";
inline constexpr const char* kLabelsX = "labels_x.txt";
inline constexpr const char* kLabelsY = "labels_y.txt";
}  // namespace bundle

struct PipelineResult {
  std::string directory;
  TrajectoryEnsemble ensemble;
  MatrixStage stage;
  HierarchyTree tree;
  CellLabels labels;
};

/// seed -> advect -> partitions -> matrix -> tree -> labels, written to
/// config.output. Outputs are assembled in a scratch directory and moved
/// into place only when every stage succeeded; failures throw StageError
/// and leave no partial bundle behind.
PipelineResult run_pipeline(const RunConfig& config);

/// Stage entry points used by the CLI. Each reads what it needs from dir
/// (written by the previous stage) and writes its own files there.
void stage_advect(const RunConfig& config, const std::string& dir);
void stage_matrix(const RunConfig& config, const std::string& dir);
void stage_tree(const RunConfig& config, const std::string& dir);

/// Everything persisted in a bundle directory.
struct LoadedBundle {
  RunConfig config;
  std::shared_ptr<const TriMesh> domain_mesh;
  std::shared_ptr<const TriMesh> image_mesh;
  Partition domain;
  Partition image;
  TransitionMatrix matrix;
  HierarchyTree tree;
  std::vector<std::string> labels_x;
  std::vector<std::string> labels_y;
};

LoadedBundle load_bundle(const std::string& dir);

/// Sampling advice for a config: M is the sampled Lipschitz estimate times
/// the safety factor, q the advisor box side (default: the smaller domain
/// cell side), epoch = tau, box count = active domain cells.
SamplingAdvice advise_for(const RunConfig& config, double* raw_lipschitz = nullptr);

}  // namespace relcoh
