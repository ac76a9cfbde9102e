#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "polaron/run.hpp"
#include "polaron/segment_solver.hpp"

namespace {

using polaron::run::ResultRow;
using polaron::run::RunConfig;

void emit_single_row(const RunConfig& cfg, const ResultRow& row) {
  const bool csv = cfg.output.format == "csv";
  const std::string header = polaron::run::csv_header();
  const std::string line = csv ? polaron::run::to_csv(row) : polaron::run::to_jsonl(row);
  if (!cfg.output.out_path.empty()) {
    std::ofstream out(cfg.output.out_path);
    if (!out) throw polaron::run::ConfigError("cannot open output file '" + cfg.output.out_path + "'");
    if (csv) out << header << '\n';
    out << line << '\n';
  }
  if (csv) std::cout << header << '\n';
  std::cout << line << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;

  // The config file seeds the defaults; flags given on the command line win.
  std::string config_path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc)
      config_path = argv[i + 1];
    else if (arg.rfind("--config=", 0) == 0)
      config_path = arg.substr(9);
  }
  if (!config_path.empty()) {
    try {
      polaron::run::apply_ini_file(config_path, cfg);
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return 1;
    }
  }

  CLI::App app{"Holstein polaron ground states by eigenvector-continuation lattice stitching"};
  app.require_subcommand(1);

  std::string config_opt;
  app.add_option("--config", config_opt, "INI-style config file; flags override its values");
  app.add_option("--seed", cfg.seed, "global random seed");
  app.add_option("--threads", cfg.threads, "worker threads for sweeps");
  app.add_option("--oracle-cap", cfg.oracle_cap, "dimension cap for full-lattice solves");

  app.add_option("--ns", cfg.model.ns, "lattice sites");
  app.add_option("--eps", cfg.model.eps, "on-site energy (units of t)");
  app.add_option("--t", cfg.model.t, "hopping amplitude");
  app.add_option("--omega", cfg.model.omega, "phonon frequency (units of t)");
  app.add_option("--g", cfg.model.g, "coupling g (exclusive with --lambda)");
  app.add_option("--lambda", cfg.model.lambda, "coupling strength lambda (exclusive with --g)");
  app.add_option("--np", cfg.model.np, "phonon levels per site");

  app.add_option("--method", cfg.method.method, "ec-exact | ec-vqe | oracle");
  app.add_option("--nk", cfg.method.nk, "segment size");
  app.add_flag("--overlaps,!--no-overlaps", cfg.method.overlaps,
               "include overlap windows in the decomposition");
  app.add_option("--s-cutoff", cfg.method.s_cutoff, "relative overlap-mode cutoff");
  app.add_option("--tol", cfg.method.tol, "eigensolver residual tolerance");
  app.add_option("--max-iter", cfg.method.max_iter, "eigensolver matvec budget");
  app.add_option("--krylov-dim", cfg.method.krylov_dim, "Krylov basis size");
  app.add_option("--depth", cfg.method.depth, "ansatz depth p");
  app.add_flag("--final-layer-only,!--no-final-layer-only", cfg.method.final_layer_only,
               "n*p ansatz angles instead of n*(p+1)");
  app.add_option("--restarts", cfg.method.restarts, "VQE optimizer restarts");
  app.add_option("--budget", cfg.method.budget, "VQE evaluations per restart");

  std::vector<int> np_list;
  std::vector<double> lambda_list;
  app.add_option("--np-list", np_list, "sweep values for np")->delimiter(',');
  app.add_option("--lambda-list", lambda_list, "sweep values for lambda")->delimiter(',');

  app.add_option("--out", cfg.output.out_path, "output file path");
  app.add_option("--format", cfg.output.format, "csv | jsonl");
  app.add_option("--reference", cfg.reference.path, "two-column (lambda, energy) reference file");
  app.add_flag("--reference-strong-coupling", cfg.reference.strong_coupling,
               "use the analytic strong-coupling energy as reference");

  auto* solve_segment = app.add_subcommand("solve-segment", "ground state of one decoupled segment");
  auto* stitch = app.add_subcommand("stitch", "stitched ground-state energy for the full lattice");
  auto* sweep = app.add_subcommand("sweep", "grid of stitched runs over np and/or lambda");
  auto* oracle = app.add_subcommand("oracle", "exact full-lattice solve (capped dimension)");
  for (auto* sub : {solve_segment, stitch, sweep, oracle}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (!np_list.empty()) cfg.sweep.np_values = np_list;
    if (!lambda_list.empty()) cfg.sweep.lambda_values = lambda_list;

    if (solve_segment->parsed()) {
      emit_single_row(cfg, polaron::run::run_solve_segment(cfg));
    } else if (stitch->parsed()) {
      emit_single_row(cfg, polaron::run::run_stitch(cfg));
    } else if (oracle->parsed()) {
      emit_single_row(cfg, polaron::run::run_oracle(cfg));
    } else if (sweep->parsed()) {
      if (cfg.output.out_path.empty())
        throw polaron::run::ConfigError("sweep requires --out PATH");
      const auto outcome = polaron::run::run_sweep(cfg, cfg.output.out_path);
      std::cerr << "sweep: " << outcome.computed << " computed, " << outcome.skipped
                << " already present, " << outcome.failures << " failed\n";
      if (outcome.failures > 0) return 3;
    }
  } catch (const polaron::run::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const polaron::ConvergenceError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
