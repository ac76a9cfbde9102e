#include "polaron/run.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "polaron/oracle.hpp"
#include "polaron/segment_solver.hpp"
#include "polaron/stitching.hpp"
#include "polaron/vqe.hpp"

namespace polaron::run {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid number '" + s + "' for " + what);
  }
}

long parse_long(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid integer '" + s + "' for " + what);
  }
}

bool parse_bool(const std::string& s, const std::string& what) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("invalid boolean '" + s + "' for " + what);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string normalized = value;
  for (char& ch : normalized)
    if (ch == ',') ch = ' ';
  std::istringstream in(normalized);
  std::string tok;
  while (in >> tok) items.push_back(tok);
  return items;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : ""; }

template <class T>
std::string fmt_opt_int(const std::optional<T>& v) {
  return v ? std::to_string(*v) : "";
}

}  // namespace

void apply_ini_text(const std::string& text, RunConfig& cfg) {
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      if (section != "model" && section != "method" && section != "sweep" &&
          section != "output" && section != "reference" && section != "run")
        throw ConfigError("unknown config section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value at line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string where = "[" + section + "] " + key;

    if (section == "model") {
      if (key == "ns")
        cfg.model.ns = static_cast<int>(parse_long(value, where));
      else if (key == "eps")
        cfg.model.eps = parse_double(value, where);
      else if (key == "t")
        cfg.model.t = parse_double(value, where);
      else if (key == "omega")
        cfg.model.omega = parse_double(value, where);
      else if (key == "g")
        cfg.model.g = parse_double(value, where);
      else if (key == "lambda")
        cfg.model.lambda = parse_double(value, where);
      else if (key == "np")
        cfg.model.np = static_cast<int>(parse_long(value, where));
      else
        throw ConfigError("unknown config key '" + key + "' in [model]");
    } else if (section == "method") {
      if (key == "method")
        cfg.method.method = value;
      else if (key == "nk")
        cfg.method.nk = static_cast<int>(parse_long(value, where));
      else if (key == "overlaps")
        cfg.method.overlaps = parse_bool(value, where);
      else if (key == "s-cutoff")
        cfg.method.s_cutoff = parse_double(value, where);
      else if (key == "tol")
        cfg.method.tol = parse_double(value, where);
      else if (key == "max-iter")
        cfg.method.max_iter = parse_long(value, where);
      else if (key == "krylov-dim")
        cfg.method.krylov_dim = static_cast<int>(parse_long(value, where));
      else if (key == "depth")
        cfg.method.depth = static_cast<int>(parse_long(value, where));
      else if (key == "final-layer-only")
        cfg.method.final_layer_only = parse_bool(value, where);
      else if (key == "restarts")
        cfg.method.restarts = static_cast<int>(parse_long(value, where));
      else if (key == "budget")
        cfg.method.budget = parse_long(value, where);
      else
        throw ConfigError("unknown config key '" + key + "' in [method]");
    } else if (section == "sweep") {
      if (key == "np") {
        cfg.sweep.np_values.clear();
        for (const auto& item : split_list(value))
          cfg.sweep.np_values.push_back(static_cast<int>(parse_long(item, where)));
      } else if (key == "lambda") {
        cfg.sweep.lambda_values.clear();
        for (const auto& item : split_list(value))
          cfg.sweep.lambda_values.push_back(parse_double(item, where));
      } else {
        throw ConfigError("unknown config key '" + key + "' in [sweep]");
      }
    } else if (section == "output") {
      if (key == "out")
        cfg.output.out_path = value;
      else if (key == "format")
        cfg.output.format = value;
      else
        throw ConfigError("unknown config key '" + key + "' in [output]");
    } else if (section == "reference") {
      if (key == "file")
        cfg.reference.path = value;
      else if (key == "strong-coupling")
        cfg.reference.strong_coupling = parse_bool(value, where);
      else
        throw ConfigError("unknown config key '" + key + "' in [reference]");
    } else {  // top-level or [run]
      if (key == "seed")
        cfg.seed = static_cast<std::uint64_t>(parse_long(value, where));
      else if (key == "threads")
        cfg.threads = static_cast<int>(parse_long(value, where));
      else if (key == "oracle-cap")
        cfg.oracle_cap = parse_long(value, where);
      else
        throw ConfigError("unknown top-level config key '" + key + "'");
    }
  }
}

void apply_ini_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  apply_ini_text(buffer.str(), cfg);
}

std::pair<double, double> resolve_coupling(const ModelBlock& model) {
  if (model.g && model.lambda)
    throw ConfigError("give exactly one of g or lambda, not both");
  if (!model.g && !model.lambda)
    throw ConfigError("give exactly one of g or lambda");
  if (!(model.t > 0.0) || !(model.omega > 0.0))
    throw ConfigError("t and omega must be positive");
  if (model.g) return {*model.g, coupling_lambda(*model.g, model.t, model.omega)};
  if (*model.lambda < 0.0) throw ConfigError("lambda must be >= 0");
  const double g = g_for_lambda(*model.lambda, model.t, model.omega);
  return {g, *model.lambda};
}

LatticeSpec to_lattice(const ModelBlock& model, double g) {
  LatticeSpec lattice;
  lattice.num_sites = model.ns;
  lattice.onsite_energy = model.eps;
  lattice.hopping = model.t;
  lattice.phonon_frequency = model.omega;
  lattice.coupling = g;
  lattice.phonon_levels = model.np;
  try {
    lattice.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return lattice;
}

std::string csv_header() {
  return "ns,nk,np,omega,t,eps,g,lambda,method,overlaps,k,retained_rank,dk,n_qubits,energy,"
         "reference_energy,relative_error,wall_time_seconds,seed";
}

std::string to_csv(const ResultRow& r) {
  std::ostringstream out;
  out << r.ns << ',' << r.nk << ',' << r.np << ',' << fmt(r.omega) << ',' << fmt(r.t) << ','
      << fmt(r.eps) << ',' << fmt(r.g) << ',' << fmt(r.lambda) << ',' << r.method << ','
      << (r.overlaps ? "true" : "false") << ',' << fmt_opt_int(r.k) << ','
      << fmt_opt_int(r.retained_rank) << ',' << fmt_opt_int(r.dk) << ','
      << fmt_opt_int(r.n_qubits) << ',' << fmt_opt(r.energy) << ',' << fmt_opt(r.reference_energy)
      << ',' << fmt_opt(r.relative_error) << ',' << fmt(r.wall_time_seconds) << ',' << r.seed;
  return out.str();
}

ResultRow parse_csv_row(const std::string& line) {
  const auto fields = split(line, ',');
  if (fields.size() != 19)
    throw ConfigError("malformed result row: expected 19 fields, got " +
                      std::to_string(fields.size()));
  ResultRow r;
  int i = 0;
  auto next = [&]() { return fields[static_cast<std::size_t>(i++)]; };
  r.ns = static_cast<int>(parse_long(next(), "ns"));
  r.nk = static_cast<int>(parse_long(next(), "nk"));
  r.np = static_cast<int>(parse_long(next(), "np"));
  r.omega = parse_double(next(), "omega");
  r.t = parse_double(next(), "t");
  r.eps = parse_double(next(), "eps");
  r.g = parse_double(next(), "g");
  r.lambda = parse_double(next(), "lambda");
  r.method = next();
  r.overlaps = parse_bool(next(), "overlaps");
  auto opt_long = [&](const char* what) -> std::optional<long> {
    const std::string s = next();
    if (s.empty()) return std::nullopt;
    return parse_long(s, what);
  };
  auto opt_double = [&](const char* what) -> std::optional<double> {
    const std::string s = next();
    if (s.empty()) return std::nullopt;
    return parse_double(s, what);
  };
  r.k = opt_long("k");
  r.retained_rank = opt_long("retained_rank");
  if (auto v = opt_long("dk")) r.dk = *v;
  if (auto v = opt_long("n_qubits")) r.n_qubits = static_cast<int>(*v);
  r.energy = opt_double("energy");
  r.reference_energy = opt_double("reference_energy");
  r.relative_error = opt_double("relative_error");
  r.wall_time_seconds = parse_double(next(), "wall_time_seconds");
  r.seed = static_cast<std::uint64_t>(parse_long(next(), "seed"));
  return r;
}

std::string to_jsonl(const ResultRow& r) {
  nlohmann::json j;
  j["ns"] = r.ns;
  j["nk"] = r.nk;
  j["np"] = r.np;
  j["omega"] = r.omega;
  j["t"] = r.t;
  j["eps"] = r.eps;
  j["g"] = r.g;
  j["lambda"] = r.lambda;
  j["method"] = r.method;
  j["overlaps"] = r.overlaps;
  if (r.k) j["k"] = *r.k;
  if (r.retained_rank) j["retained_rank"] = *r.retained_rank;
  if (r.dk) j["dk"] = *r.dk;
  if (r.n_qubits) j["n_qubits"] = *r.n_qubits;
  if (r.energy) j["energy"] = *r.energy;
  if (r.reference_energy) j["reference_energy"] = *r.reference_energy;
  if (r.relative_error) j["relative_error"] = *r.relative_error;
  j["wall_time_seconds"] = r.wall_time_seconds;
  j["seed"] = r.seed;
  return j.dump();
}

ResultRow parse_jsonl_row(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("malformed jsonl row: ") + e.what());
  }
  ResultRow r;
  r.ns = j.at("ns").get<int>();
  r.nk = j.at("nk").get<int>();
  r.np = j.at("np").get<int>();
  r.omega = j.at("omega").get<double>();
  r.t = j.at("t").get<double>();
  r.eps = j.at("eps").get<double>();
  r.g = j.at("g").get<double>();
  r.lambda = j.at("lambda").get<double>();
  r.method = j.at("method").get<std::string>();
  r.overlaps = j.at("overlaps").get<bool>();
  if (j.contains("k")) r.k = j["k"].get<long>();
  if (j.contains("retained_rank")) r.retained_rank = j["retained_rank"].get<long>();
  if (j.contains("dk")) r.dk = j["dk"].get<Index>();
  if (j.contains("n_qubits")) r.n_qubits = j["n_qubits"].get<int>();
  if (j.contains("energy")) r.energy = j["energy"].get<double>();
  if (j.contains("reference_energy")) r.reference_energy = j["reference_energy"].get<double>();
  if (j.contains("relative_error")) r.relative_error = j["relative_error"].get<double>();
  r.wall_time_seconds = j.at("wall_time_seconds").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

std::vector<std::pair<double, double>> load_reference_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open reference file '" + path + "'");
  std::vector<std::pair<double, double>> table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto items = split_list(line);
    if (items.empty()) continue;
    if (items.size() != 2)
      throw ConfigError("reference file '" + path + "': expected two columns at line " +
                        std::to_string(lineno));
    table.emplace_back(parse_double(items[0], "reference lambda"),
                       parse_double(items[1], "reference energy"));
  }
  return table;
}

namespace {

void validate_method(const MethodBlock& m) {
  if (m.method != "ec-exact" && m.method != "ec-vqe" && m.method != "oracle")
    throw ConfigError("unknown method '" + m.method + "' (expected ec-exact, ec-vqe or oracle)");
  if (m.nk < 1) throw ConfigError("nk must be >= 1");
  if (!(m.s_cutoff > 0.0)) throw ConfigError("s-cutoff must be > 0");
  if (!(m.tol > 0.0)) throw ConfigError("tol must be > 0");
  if (m.depth < 0) throw ConfigError("depth must be >= 0");
  if (m.restarts < 1) throw ConfigError("restarts must be >= 1");
}

SolverOptions solver_options(const RunConfig& cfg) {
  SolverOptions opt;
  opt.tol = cfg.method.tol;
  opt.max_matvecs = cfg.method.max_iter;
  opt.krylov_dim = cfg.method.krylov_dim;
  opt.seed = cfg.seed;
  return opt;
}

/// Reference energy for one resolved point, if any source is configured.
std::optional<double> resolve_reference(const RunConfig& cfg, double lambda) {
  if (!cfg.reference.path.empty() && cfg.reference.strong_coupling)
    throw ConfigError("give at most one reference source (file or strong-coupling)");
  if (!cfg.reference.path.empty()) {
    for (const auto& [l, e] : load_reference_table(cfg.reference.path))
      if (std::abs(l - lambda) <= 1e-9) return e;
    return std::nullopt;  // never fabricate a reference
  }
  if (cfg.reference.strong_coupling && lambda > 0.0)
    return strong_coupling_energy(cfg.model.eps, cfg.model.t, cfg.model.omega, lambda);
  return std::nullopt;
}

ResultRow base_row(const RunConfig& cfg, double g, double lambda) {
  ResultRow r;
  r.ns = cfg.model.ns;
  r.nk = cfg.method.nk;
  r.np = cfg.model.np;
  r.omega = cfg.model.omega;
  r.t = cfg.model.t;
  r.eps = cfg.model.eps;
  r.g = g;
  r.lambda = lambda;
  r.method = cfg.method.method;
  r.overlaps = cfg.method.overlaps;
  r.seed = cfg.seed;
  return r;
}

void attach_reference(const RunConfig& cfg, ResultRow& row) {
  row.reference_energy = resolve_reference(cfg, row.lambda);
  if (row.reference_energy && row.energy)
    row.relative_error = std::abs(*row.energy - *row.reference_energy) /
                         std::abs(*row.reference_energy);
}

}  // namespace

ResultRow run_solve_segment(const RunConfig& cfg) {
  validate_method(cfg.method);
  const auto [g, lambda] = resolve_coupling(cfg.model);
  const LatticeSpec lattice = to_lattice(cfg.model, g);
  if (cfg.method.nk > lattice.num_sites) throw ConfigError("nk must not exceed ns");
  ResultRow row = base_row(cfg, g, lambda);
  row.method = "segment";
  const auto start = std::chrono::steady_clock::now();
  const SparseOperator h =
      build_segment_hamiltonian(lattice, SegmentSpec::window(0, cfg.method.nk));
  const EigenResult res = lowest_eigenpair(h, solver_options(cfg));
  row.dk = h.dimension();
  row.energy = res.energy;
  row.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  attach_reference(cfg, row);
  return row;
}

ResultRow run_stitch(const RunConfig& cfg) {
  validate_method(cfg.method);
  const auto [g, lambda] = resolve_coupling(cfg.model);
  const LatticeSpec lattice = to_lattice(cfg.model, g);
  ResultRow row = base_row(cfg, g, lambda);
  const auto start = std::chrono::steady_clock::now();

  if (cfg.method.method == "oracle") {
    const EigenResult res = oracle::exact_ground(lattice, solver_options(cfg), cfg.oracle_cap);
    row.dk = basis_size(lattice.num_sites, lattice.phonon_levels);
    row.energy = res.energy;
  } else if (cfg.method.method == "ec-exact") {
    if (cfg.method.nk > lattice.num_sites) throw ConfigError("nk must not exceed ns");
    EcConfig ec;
    ec.s_cutoff = cfg.method.s_cutoff;
    ec.solver = solver_options(cfg);
    const EcRun run = ec_ground_energy(lattice, cfg.method.nk, cfg.method.overlaps, ec);
    row.energy = run.result.energy;
    row.k = run.diagnostics.num_segments;
    row.retained_rank = run.diagnostics.retained_modes;
    row.dk = run.diagnostics.segment_dimension;
  } else {  // ec-vqe
    if (cfg.method.nk > lattice.num_sites) throw ConfigError("nk must not exceed ns");
    VqeEcConfig vc;
    vc.s_cutoff = cfg.method.s_cutoff;
    vc.depth = cfg.method.depth;
    vc.final_layer_only = cfg.method.final_layer_only;
    vc.optimizer.restarts = cfg.method.restarts;
    vc.optimizer.max_evaluations = cfg.method.budget;
    const EcRun run =
        ec_vqe_ground_energy(lattice, cfg.method.nk, cfg.method.overlaps, vc, cfg.seed);
    row.energy = run.result.energy;
    row.k = run.diagnostics.num_segments;
    row.retained_rank = run.diagnostics.retained_modes;
    row.dk = run.diagnostics.segment_dimension;
    row.n_qubits = run.diagnostics.num_qubits;
  }
  row.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  attach_reference(cfg, row);
  return row;
}

ResultRow run_oracle(const RunConfig& cfg) {
  RunConfig oracle_cfg = cfg;
  oracle_cfg.method.method = "oracle";
  return run_stitch(oracle_cfg);
}

namespace {

struct GridPoint {
  int np = 0;
  std::optional<double> lambda_override;
};

std::vector<GridPoint> make_grid(const RunConfig& cfg) {
  if (cfg.sweep.np_values.empty() && cfg.sweep.lambda_values.empty())
    throw ConfigError("sweep requires a non-empty np and/or lambda list");
  std::vector<GridPoint> grid;
  const std::vector<int> nps =
      cfg.sweep.np_values.empty() ? std::vector<int>{cfg.model.np} : cfg.sweep.np_values;
  if (cfg.sweep.lambda_values.empty()) {
    for (int np : nps) grid.push_back({np, std::nullopt});
  } else {
    for (double lambda : cfg.sweep.lambda_values)
      for (int np : nps) grid.push_back({np, lambda});
  }
  return grid;
}

RunConfig point_config(const RunConfig& base, const GridPoint& pt) {
  RunConfig cfg = base;
  cfg.model.np = pt.np;
  if (pt.lambda_override) {
    cfg.model.lambda = *pt.lambda_override;
    cfg.model.g.reset();
  }
  return cfg;
}

/// Identity of a grid point inside an output file; resolved parameters only,
/// so it is computable without running the point.
std::string row_key(int ns, int nk, int np, double omega, double t, double eps, double g,
                    double lambda, const std::string& method, bool overlaps, std::uint64_t seed) {
  std::ostringstream out;
  out << ns << '|' << nk << '|' << np << '|' << fmt(omega) << '|' << fmt(t) << '|' << fmt(eps)
      << '|' << fmt(g) << '|' << fmt(lambda) << '|' << method << '|' << overlaps << '|' << seed;
  return out.str();
}

std::string key_of_row(const ResultRow& r) {
  return row_key(r.ns, r.nk, r.np, r.omega, r.t, r.eps, r.g, r.lambda, r.method, r.overlaps,
                 r.seed);
}

std::string key_of_point(const RunConfig& cfg) {
  const auto [g, lambda] = resolve_coupling(cfg.model);
  return row_key(cfg.model.ns, cfg.method.nk, cfg.model.np, cfg.model.omega, cfg.model.t,
                 cfg.model.eps, g, lambda, cfg.method.method, cfg.method.overlaps, cfg.seed);
}

}  // namespace

SweepOutcome run_sweep(const RunConfig& cfg, const std::string& out_path) {
  validate_method(cfg.method);
  if (cfg.output.format != "csv" && cfg.output.format != "jsonl")
    throw ConfigError("unknown output format '" + cfg.output.format + "'");
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
  const bool csv = cfg.output.format == "csv";
  const auto grid = make_grid(cfg);

  // Resume: collect keys already present in the output file.
  std::vector<std::string> completed;
  bool have_file = false;
  if (std::filesystem::exists(out_path) && std::filesystem::file_size(out_path) > 0) {
    std::ifstream in(out_path);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (csv && first) {
        first = false;
        if (line != csv_header())
          throw ConfigError("refusing to resume: '" + out_path + "' has an unexpected header");
        continue;
      }
      first = false;
      const ResultRow row = csv ? parse_csv_row(line) : parse_jsonl_row(line);
      completed.push_back(key_of_row(row));
    }
    have_file = true;
  }

  std::ofstream out(out_path, std::ios::app);
  if (!out) throw ConfigError("cannot open output file '" + out_path + "'");
  if (!have_file && csv) out << csv_header() << '\n';

  SweepOutcome outcome;
  struct Pending {
    RunConfig cfg;
    std::size_t slot = 0;
  };
  std::vector<Pending> todo;
  std::vector<ResultRow> rows(grid.size());
  std::vector<char> failed(grid.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    RunConfig pt = point_config(cfg, grid[i]);
    const std::string key = key_of_point(pt);
    if (std::find(completed.begin(), completed.end(), key) != completed.end()) {
      ++outcome.skipped;
      continue;
    }
    todo.push_back({std::move(pt), i});
  }

  auto evaluate = [&](const Pending& p) {
    try {
      rows[p.slot] = run_stitch(p.cfg);
    } catch (const std::exception& e) {
      const auto [g, lambda] = resolve_coupling(p.cfg.model);
      rows[p.slot] = base_row(p.cfg, g, lambda);
      failed[p.slot] = 1;
      static std::mutex log_mutex;
      std::lock_guard<std::mutex> lock(log_mutex);
      std::cerr << "sweep point failed (np=" << p.cfg.model.np << ", lambda=" << lambda
                << "): " << e.what() << '\n';
    }
  };

  if (cfg.threads == 1 || todo.size() <= 1) {
    for (const auto& p : todo) {
      evaluate(p);
      out << (csv ? to_csv(rows[p.slot]) : to_jsonl(rows[p.slot])) << '\n';
      out.flush();
      ++outcome.computed;
      if (failed[p.slot]) ++outcome.failures;
    }
  } else {
    // Work pool; the writer drains results in grid order so the file stays a
    // deterministic prefix of the full sweep at every moment.
    std::mutex mutex;
    std::condition_variable cv;
    std::vector<char> done(todo.size(), 0);
    std::atomic<std::size_t> next{0};
    const int workers = std::min<int>(cfg.threads, static_cast<int>(todo.size()));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= todo.size()) return;
          evaluate(todo[i]);
          {
            std::lock_guard<std::mutex> lock(mutex);
            done[i] = 1;
          }
          cv.notify_all();
        }
      });
    for (std::size_t i = 0; i < todo.size(); ++i) {
      std::unique_lock<std::mutex> lock(mutex);
      cv.wait(lock, [&] { return done[i] == 1; });
      lock.unlock();
      out << (csv ? to_csv(rows[todo[i].slot]) : to_jsonl(rows[todo[i].slot])) << '\n';
      out.flush();
      ++outcome.computed;
      if (failed[todo[i].slot]) ++outcome.failures;
    }
    for (auto& th : pool) th.join();
  }
  return outcome;
}

}  // namespace polaron::run
