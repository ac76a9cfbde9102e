#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "polaron/hamiltonian.hpp"

namespace polaron::run {

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelBlock {
  int ns = 2;
  double eps = 0.0;
  double t = 1.0;
  double omega = 1.0;
  std::optional<double> g;
  std::optional<double> lambda;
  int np = 2;
};

struct MethodBlock {
  std::string method = "ec-exact";  // ec-exact | ec-vqe | oracle
  int nk = 2;
  bool overlaps = false;
  double s_cutoff = 1e-10;
  double tol = 1e-9;
  long max_iter = 200000;
  int krylov_dim = 64;
  int depth = 1;
  bool final_layer_only = false;
  int restarts = 8;
  long budget = 20000;  // optimizer evaluations per restart
};

struct SweepBlock {
  std::vector<int> np_values;
  std::vector<double> lambda_values;
};

struct OutputBlock {
  std::string out_path;
  std::string format = "csv";  // csv | jsonl
};

struct ReferenceBlock {
  std::string path;              // two-column (lambda, energy) file
  bool strong_coupling = false;  // use the analytic strong-coupling value
};

struct RunConfig {
  ModelBlock model;
  MethodBlock method;
  SweepBlock sweep;
  OutputBlock output;
  ReferenceBlock reference;
  std::uint64_t seed = 12345;
  int threads = 1;
  Index oracle_cap = 1000000;
};

/// One emitted data point; optionals are left empty in the output when absent.
struct ResultRow {
  int ns = 0;
  int nk = 0;
  int np = 0;
  double omega = 0.0;
  double t = 0.0;
  double eps = 0.0;
  double g = 0.0;
  double lambda = 0.0;
  std::string method;
  bool overlaps = false;
  std::optional<long> k;
  std::optional<long> retained_rank;
  std::optional<Index> dk;
  std::optional<int> n_qubits;
  std::optional<double> energy;
  std::optional<double> reference_energy;
  std::optional<double> relative_error;
  double wall_time_seconds = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const ResultRow&) const = default;
};

/// Overlays values from an INI-style config file ([model], [method], [sweep],
/// [output], [reference] sections plus top-level seed/threads keys) onto cfg.
void apply_ini_file(const std::string& path, RunConfig& cfg);
void apply_ini_text(const std::string& text, RunConfig& cfg);

/// Resolves the exactly-one-of g/lambda rule; returns (g, lambda).
std::pair<double, double> resolve_coupling(const ModelBlock& model);
LatticeSpec to_lattice(const ModelBlock& model, double g);

std::string csv_header();
std::string to_csv(const ResultRow& row);
ResultRow parse_csv_row(const std::string& line);
std::string to_jsonl(const ResultRow& row);
ResultRow parse_jsonl_row(const std::string& line);

/// Loads a whitespace/comma separated two-column (lambda, energy) table;
/// '#' starts a comment.
std::vector<std::pair<double, double>> load_reference_table(const std::string& path);

ResultRow run_solve_segment(const RunConfig& cfg);
ResultRow run_stitch(const RunConfig& cfg);
ResultRow run_oracle(const RunConfig& cfg);

struct SweepOutcome {
  int computed = 0;
  int skipped = 0;   // already present in the output file
  int failures = 0;  // rows recorded without an energy
};

/// Runs the sweep grid in deterministic order (outer lambda, inner np),
/// appending to out_path. Rows whose key already exists in the file are
/// skipped, so an interrupted sweep resumes where it stopped. Per-point
/// failures are recorded in-row and do not abort the sweep.
SweepOutcome run_sweep(const RunConfig& cfg, const std::string& out_path);

}  // namespace polaron::run
