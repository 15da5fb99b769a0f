// mfd3d: meshless finite-difference Poisson experiments.

#include "mfd3d/experiment.hpp"
#include "mfd3d/geometry.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <thread>

namespace {

using namespace mfd3d;

int cmd_run(const std::filesystem::path &config_path, const experiment::RunOptions &opts) {
  const auto config = experiment::load_config(config_path);
  const auto result = experiment::run_experiment(config, opts);
  if (config.csv.empty()) experiment::write_csv(std::cout, result);
  return 0;
}

int cmd_nodes(const std::filesystem::path &config_path, std::optional<std::uint64_t> seed) {
  auto config = experiment::load_config(config_path);
  if (seed) config.seed = *seed;
  if (config.source == experiment::NodeSource::File) throw Error("node source 'file' has nothing to generate");
  const auto domain = experiment::make_domain(config);
  std::filesystem::path prefix = config.nodes_out;
  if (prefix.empty()) prefix = config_path.parent_path() / config.name;
  const std::size_t levels = config.level_count();
  for (std::size_t lv = 0; lv < levels; ++lv) {
    const auto nodes = experiment::make_nodes(config, &domain, lv);
    std::filesystem::path path = prefix;
    path += "_L" + std::to_string(lv) + ".nodes";
    geometry::save_nodes(path, nodes);
    std::cout << "level " << lv << " h=" << *config.spacing(lv) << " N_int=" << nodes.interior.size()
              << " N_bnd=" << nodes.boundary.size() << " -> " << path.string() << '\n';
  }
  return 0;
}

int cmd_quality(const std::filesystem::path &path) {
  const auto mesh = geometry::load_tetmesh(path);
  const auto stats = geometry::mesh_quality_stats(mesh);
  std::printf("tets %zu\nmin_gamma %.6g\nmean_gamma %.6g\n", stats.count, stats.min_gamma, stats.mean_gamma);
  static const char *kBins[] = {"(0,0.25]", "(0.25,0.5]", "(0.5,0.75]", "(0.75,1]"};
  for (std::size_t b = 0; b < 4; ++b) std::printf("gamma %s %.6f\n", kBins[b], stats.bins[b]);
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Meshless finite-difference solver for the 3D Poisson-Dirichlet problem"};
  app.require_subcommand(1);
  app.fallthrough();

  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::optional<std::uint64_t> seed;
  std::string export_matrix;
  app.add_option("--threads", threads, "Worker threads for stencil computation")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--export-matrix", export_matrix, "Write each system matrix in Matrix Market format");

  std::string path;
  auto *run = app.add_subcommand("run", "Run the experiment sweep of a config");
  run->add_option("config", path, "Experiment config (INI)")->required();
  auto *nodes = app.add_subcommand("nodes", "Generate and save the node sets of a config");
  nodes->add_option("config", path, "Experiment config (INI)")->required();
  auto *quality = app.add_subcommand("quality", "Aspect-ratio statistics of a tetrahedral mesh");
  quality->add_option("tetmesh", path, "TetMesh file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      experiment::RunOptions opts;
      opts.threads = threads;
      opts.seed = seed;
      opts.export_matrix = export_matrix;
      opts.log = &std::cerr;
      return cmd_run(path, opts);
    }
    if (*nodes) return cmd_nodes(path, seed);
    if (*quality) return cmd_quality(path);
  } catch (const std::exception &e) {
    std::cerr << "mfd3d: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
