// relcoh command-line interface.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "relcoh/coherence.hpp"
#include "relcoh/config.hpp"
#include "relcoh/error.hpp"
#include "relcoh/pipeline.hpp"
#include "relcoh/render.hpp"
#include "relcoh/sampling.hpp"
#include "relcoh/spectral.hpp"
#include "relcoh/verify.hpp"

namespace fs = std::filesystem;
using namespace relcoh;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> rho0;
  std::optional<std::size_t> depth;
  std::optional<unsigned> workers;
};

void add_common(CLI::App* cmd, Overrides& o, bool need_config = true) {
  auto* c = cmd->add_option("--config", o.config, "Run configuration (YAML)");
  if (need_config) c->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "Output / bundle directory (overrides config output)");
  cmd->add_option("--seed", o.seed, "Random seed (overrides sampling.seed)");
  cmd->add_option("--workers", o.workers, "Worker threads, 0 = all cores");
}

RunConfig configure(const Overrides& o) {
  RunConfig c = load_config(o.config);
  if (o.out) c.output = *o.out;
  if (o.seed) c.seed = *o.seed;
  if (o.rho0) c.rho0 = *o.rho0;
  if (o.depth) c.max_depth = *o.depth;
  if (o.workers) c.workers = *o.workers;
  c.validate();
  return c;
}

int fail(const std::string& stage, const std::string& msg) {
  std::cerr << "relcoh: " << stage << ": " << msg << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical relatively coherent sets from Ulam transfer matrices"};
  app.require_subcommand(1);

  Overrides run_o, adv_o, mat_o, tree_o, render_o, advise_o;

  auto* run = app.add_subcommand("run", "Full pipeline: advect, matrix, tree");
  add_common(run, run_o);
  run->add_option("--rho0", run_o.rho0, "Stopping threshold");
  run->add_option("--depth", run_o.depth, "Maximum tree depth");

  auto* advect_cmd = app.add_subcommand("advect", "Seed and advect the test points");
  add_common(advect_cmd, adv_o);

  auto* matrix_cmd = app.add_subcommand("matrix", "Build partitions and the Ulam matrix");
  add_common(matrix_cmd, mat_o);

  auto* tree_cmd = app.add_subcommand("tree", "Build the hierarchy tree from the matrix");
  add_common(tree_cmd, tree_o);
  tree_cmd->add_option("--rho0", tree_o.rho0, "Stopping threshold");
  tree_cmd->add_option("--depth", tree_o.depth, "Maximum tree depth");
  std::string trace_path;
  tree_cmd->add_option("--trace", trace_path, "Write the root optimizer trace (TSV)");

  auto* render_cmd = app.add_subcommand("render", "Draw colored partitions of a bundle");
  add_common(render_cmd, render_o, false);
  std::string side = "initial", format = "svg", image_path, diagram_path;
  std::size_t render_depth = 0, width = 800;
  render_cmd->add_option("--depth", render_depth, "Tree level to color (0 = leaves)");
  render_cmd->add_option("--side", side, "initial (X) or final (Y)")
      ->check(CLI::IsMember({"initial", "final"}));
  render_cmd->add_option("--format", format, "svg or ppm")->check(CLI::IsMember({"svg", "ppm"}));
  render_cmd->add_option("--width", width, "Figure width in pixels");
  render_cmd->add_option("-o,--output", image_path, "Image file")->required();
  render_cmd->add_option("--tree-diagram", diagram_path, "Also write the tree diagram (SVG)");

  auto* advise_cmd = app.add_subcommand("advise", "Sampling advice from the Gronwall bound");
  add_common(advise_cmd, advise_o, false);
  std::optional<double> q, M, epoch;
  std::optional<std::uint64_t> boxes;
  advise_cmd->add_option("--q", q, "Box side length");
  advise_cmd->add_option("--M", M, "Lipschitz constant (skips estimation)");
  advise_cmd->add_option("--epoch", epoch, "Time epoch |t - t0|");
  advise_cmd->add_option("--boxes", boxes, "Number of boxes");

  auto* verify_cmd = app.add_subcommand("verify", "Re-check the invariants of a bundle");
  std::string verify_dir;
  verify_cmd->add_option("bundle", verify_dir, "Bundle directory")->required();

  CLI11_PARSE(app, argc, argv);

  std::string stage = "config";
  try {
    if (run->parsed()) {
      const RunConfig c = configure(run_o);
      const PipelineResult r = run_pipeline(c);
      std::cout << "bundle " << r.directory << "\n"
                << "points " << r.ensemble.size() << ", flagged " << r.ensemble.flagged_count()
                << "\nmatrix " << r.stage.matrix.n_rows << " x " << r.stage.matrix.n_cols << ", nnz "
                << r.stage.matrix.nnz() << "\ntree leaves " << r.tree.leaf_count() << ", depth "
                << r.tree.reached_depth() << "\n";
      if (r.tree.root.rho_star)
        std::cout << "root split rho " << r.tree.root.split_rho << ", rho_complement "
                  << r.tree.root.split_rho_complement << " (" << to_string(r.tree.root.status)
                  << ")\n";
      return 0;
    }
    if (advect_cmd->parsed()) {
      const RunConfig c = configure(adv_o);
      stage_advect(c, c.output);
      std::cout << "wrote " << (fs::path(c.output) / bundle::kEnsemble).string() << '\n';
      return 0;
    }
    if (matrix_cmd->parsed()) {
      const RunConfig c = configure(mat_o);
      stage_matrix(c, c.output);
      std::cout << "wrote " << (fs::path(c.output) / bundle::kMatrix).string() << '\n';
      return 0;
    }
    if (tree_cmd->parsed()) {
      const RunConfig c = configure(tree_o);
      stage_tree(c, c.output);
      if (!trace_path.empty()) {
        const LoadedBundle b = load_bundle(c.output);
        SpectralOptions so;
        so.tol = c.tol;
        so.max_iter = c.max_iter;
        so.weighting = c.weighting;
        so.row_weights = b.domain.weights;
        const SingularPair sv = second_singular(b.matrix, so);
        const SplitResult split =
            optimize_split(b.matrix, b.domain.weights, sv, SplitOptions{c.min_mass});
        std::ofstream t(trace_path);
        if (!t) return fail("tree", "cannot write '" + trace_path + "'");
        write_trace(t, split.trace);
      }
      std::cout << "wrote " << (fs::path(c.output) / bundle::kTree).string() << '\n';
      return 0;
    }
    if (render_cmd->parsed()) {
      stage = "render";
      std::string dir;
      if (render_o.out) dir = *render_o.out;
      else if (!render_o.config.empty()) dir = load_config(render_o.config).output;
      else return fail(stage, "need --out <bundle> or --config");
      const LoadedBundle b = load_bundle(dir);
      RenderSpec spec;
      spec.side = side == "initial" ? RenderSide::initial : RenderSide::final;
      spec.format = format == "svg" ? RenderFormat::svg : RenderFormat::ppm;
      spec.depth = render_depth;
      spec.width = width;
      spec.palette_seed = render_o.seed.value_or(b.config.seed);
      std::ofstream out(image_path, std::ios::binary);
      if (!out) return fail(stage, "cannot write '" + image_path + "'");
      if (spec.side == RenderSide::initial)
        render(out, b.tree, b.labels_x, *b.domain_mesh, spec);
      else
        render(out, b.tree, b.labels_y, *b.image_mesh, spec);
      if (!diagram_path.empty()) {
        std::ofstream d(diagram_path);
        if (!d) return fail(stage, "cannot write '" + diagram_path + "'");
        render_tree_diagram(d, b.tree, spec.palette_seed);
      }
      return 0;
    }
    if (advise_cmd->parsed()) {
      stage = "advise";
      SamplingAdvice a;
      if (!advise_o.config.empty() && !M) {
        RunConfig c = configure(advise_o);
        if (q) c.advisor_q = *q;
        double raw = 0.0;
        a = advise_for(c, &raw);
        std::cout << "sampled Lipschitz estimate " << raw << " (safety factor "
                  << c.advisor_safety << ")\n";
      } else {
        if (!q || !M || !epoch) return fail(stage, "need --config, or --q, --M and --epoch");
        a = advise(*q, *M, *epoch, boxes.value_or(1));
      }
      write_advice(std::cout, a);
      return 0;
    }
    if (verify_cmd->parsed()) {
      stage = "verify";
      const VerifyReport report = verify_bundle(verify_dir);
      write_report(std::cout, report);
      return report.ok() ? 0 : 3;
    }
  } catch (const StageError& e) {
    std::cerr << "relcoh: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    return fail(stage, std::string(to_string(e.code())) + ": " + e.what());
  } catch (const std::exception& e) {
    return fail(stage, e.what());
  }
  return 0;
}
