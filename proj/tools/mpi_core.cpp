// Command-line front end for the MPI signal simulation + reconstruction
// pipeline: phantom | simulate | reconstruct | pipeline | kernel-table.
//
// Exit codes: 0 success, 1 usage or I/O error, 2 CG did not converge.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mpicore/deconvolve.hpp"
#include "mpicore/forward.hpp"
#include "mpicore/grid.hpp"
#include "mpicore/io.hpp"
#include "mpicore/kernels.hpp"
#include "mpicore/trace_fit.hpp"
#include "mpicore/trajectory.hpp"

namespace {

using namespace mpicore;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Flat key = value run configuration with '#' comments. Unknown keys are an
// error. Defaults follow the reference experiment: 100x100 grid, Lissajous
// frequencies 101/102, K = 20 N^2, h = 0.01, 10% noise, mu = 3e-4, tau = 2e-3.
struct RunConfig {
  int n = 2;
  std::array<int, 3> shape = {100, 100, 1};
  std::array<int, 3> m = {101, 102, 103};
  std::int64_t samples = 0;  // 0 -> 20 * total cells
  double h = 0.01;
  double series_cutoff = 0.5;
  int series_terms = 40;
  double noise = 0.1;
  std::uint64_t seed = 1;
  double mu = 3e-4;
  double tau = 2e-3;
  int max_iter = 500;
  std::string density_path = "density.csv";
  std::string signal_path = "signal.csv";
  std::string recon_path = "recon.csv";
  std::string trace_path = "trace.csv";
  std::string fit_diagnostics_path = "fit_diagnostics.csv";
  std::string pgm_path;
  std::string shapes = "disk:-0.35,-0.25,0.3,1.0;disk:0.35,0.3,0.2,1.0;rect:-0.15,0.05,0.55,0.45,0.6";

  GridSpec grid() const {
    GridSpec g;
    g.n = n;
    g.shape = shape;
    for (int a = n; a < 3; ++a) g.shape[a] = 1;
    return g;
  }
  KernelSpec kernel() const { return {n, h, series_cutoff, series_terms}; }
  TrajectoryConfig trajectory() const {
    TrajectoryConfig t;
    t.n = n;
    t.m = m;
    t.samples = (samples > 0) ? samples : 20 * grid().cell_count();
    return t;
  }
  ReconConfig recon() const { return {mu, tau, max_iter, kernel()}; }
};

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto as_int = [&] { return std::stoll(value); };
  auto as_double = [&] { return std::stod(value); };
  if (key == "n") cfg.n = static_cast<int>(as_int());
  else if (key == "N1") cfg.shape[0] = static_cast<int>(as_int());
  else if (key == "N2") cfg.shape[1] = static_cast<int>(as_int());
  else if (key == "N3") cfg.shape[2] = static_cast<int>(as_int());
  else if (key == "m1") cfg.m[0] = static_cast<int>(as_int());
  else if (key == "m2") cfg.m[1] = static_cast<int>(as_int());
  else if (key == "m3") cfg.m[2] = static_cast<int>(as_int());
  else if (key == "K") cfg.samples = as_int();
  else if (key == "h") cfg.h = as_double();
  else if (key == "series_cutoff") cfg.series_cutoff = as_double();
  else if (key == "series_terms") cfg.series_terms = static_cast<int>(as_int());
  else if (key == "noise") cfg.noise = as_double();
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(as_int());
  else if (key == "mu") cfg.mu = as_double();
  else if (key == "tau") cfg.tau = as_double();
  else if (key == "max_iter") cfg.max_iter = static_cast<int>(as_int());
  else if (key == "density") cfg.density_path = value;
  else if (key == "signal") cfg.signal_path = value;
  else if (key == "recon") cfg.recon_path = value;
  else if (key == "trace") cfg.trace_path = value;
  else if (key == "fit_diagnostics") cfg.fit_diagnostics_path = value;
  else if (key == "pgm") cfg.pgm_path = value;
  else if (key == "shapes") cfg.shapes = value;
  else throw std::runtime_error("unknown config key: " + key);
}

std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

RunConfig load_config(const std::string& path) {
  RunConfig cfg;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    apply_key(cfg, strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
  }
  return cfg;
}

void print_resolved(const RunConfig& cfg, std::ostream& out) {
  out << "n = " << cfg.n << '\n';
  for (int a = 0; a < cfg.n; ++a) out << 'N' << (a + 1) << " = " << cfg.shape[a] << '\n';
  for (int a = 0; a < cfg.n; ++a) out << 'm' << (a + 1) << " = " << cfg.m[a] << '\n';
  out << "K = " << cfg.trajectory().samples << '\n';
  out << "h = " << fmt(cfg.h) << '\n';
  out << "series_cutoff = " << fmt(cfg.series_cutoff) << '\n';
  out << "series_terms = " << cfg.series_terms << '\n';
  out << "noise = " << fmt(cfg.noise) << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "mu = " << fmt(cfg.mu) << '\n';
  out << "tau = " << fmt(cfg.tau) << '\n';
  out << "max_iter = " << cfg.max_iter << '\n';
  out << "density = " << cfg.density_path << '\n';
  out << "signal = " << cfg.signal_path << '\n';
  out << "recon = " << cfg.recon_path << '\n';
  out << "trace = " << cfg.trace_path << '\n';
  out << "fit_diagnostics = " << cfg.fit_diagnostics_path << '\n';
  out << "pgm = " << cfg.pgm_path << '\n';
  out << "shapes = " << cfg.shapes << '\n';
}

std::vector<double> parse_numbers(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(strip(item)));
  return out;
}

// disk:cx,cy,r,amp  ball:cx,cy,cz,r,amp  rect:x0,y0,x1,y1,amp  box:6 corners,amp
Shape parse_shape(const std::string& text, int n) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::runtime_error("malformed shape: " + text);
  const std::string kind = text.substr(0, colon);
  const auto p = parse_numbers(text.substr(colon + 1));
  if (kind == "disk" || kind == "ball") {
    if (static_cast<int>(p.size()) != n + 2)
      throw std::runtime_error("shape '" + kind + "' needs " + std::to_string(n + 2) + " numbers");
    Eigen::VectorXd center(n);
    for (int a = 0; a < n; ++a) center[a] = p[static_cast<std::size_t>(a)];
    return Shape::ball(center, p[static_cast<std::size_t>(n)], p[static_cast<std::size_t>(n) + 1]);
  }
  if (kind == "rect" || kind == "box") {
    if (static_cast<int>(p.size()) != 2 * n + 1)
      throw std::runtime_error("shape '" + kind + "' needs " + std::to_string(2 * n + 1) + " numbers");
    Eigen::VectorXd lo(n), hi(n);
    for (int a = 0; a < n; ++a) {
      lo[a] = p[static_cast<std::size_t>(a)];
      hi[a] = p[static_cast<std::size_t>(n + a)];
    }
    return Shape::box(lo, hi, p[static_cast<std::size_t>(2 * n)]);
  }
  throw std::runtime_error("unknown shape kind: " + kind);
}

std::vector<Shape> parse_shapes(const std::string& list, int n) {
  std::vector<Shape> shapes;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = strip(item);
    if (!item.empty()) shapes.push_back(parse_shape(item, n));
  }
  return shapes;
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("MPI_CORE_THREADS"))
    if (const int v = std::atoi(env); v > 0) return v;
  return 1;
}

struct ReconOutcome {
  DensityField density;
  ReconDiagnostics diagnostics;
};

ReconOutcome run_reconstruction(const RunConfig& cfg, const SignalSeries& signal) {
  const GridSpec grid = cfg.grid();
  const TraceFitResult fit = fit_trace_field(grid, signal);
  write_trace(cfg.trace_path, fit.trace);
  write_fit_diagnostics(cfg.fit_diagnostics_path, grid, fit);

  auto [density, diag] = reconstruct(fit.trace, grid, cfg.recon());
  diag.masked_cells = fit.unfitted_cells;

  write_field(cfg.recon_path, density);
  if (!cfg.pgm_path.empty()) write_pgm(cfg.pgm_path, density);

  std::cout << "iterations=" << diag.iterations << '\n'
            << "relative_residual=" << fmt(diag.relative_residual) << '\n'
            << "objective=" << fmt(diag.objective) << '\n'
            << "masked_cells=" << diag.masked_cells << '\n'
            << "dropped_samples=" << fit.dropped_samples << '\n';
  return {std::move(density), diag};
}

int cmd_phantom(const RunConfig& cfg, const std::vector<std::string>& shape_args) {
  const GridSpec grid = cfg.grid();
  std::vector<Shape> shapes;
  if (!shape_args.empty()) {
    for (const auto& s : shape_args) shapes.push_back(parse_shape(s, grid.n));
  } else {
    shapes = parse_shapes(cfg.shapes, grid.n);
  }
  write_field(cfg.density_path, phantom(grid, shapes));
  std::cout << "wrote " << cfg.density_path << '\n';
  return 0;
}

int cmd_simulate(const RunConfig& cfg, int threads) {
  const DensityField rho = read_field(cfg.density_path);
  if (!(rho.grid == cfg.grid()))
    throw std::runtime_error("density grid does not match the configuration");
  auto samples = sample_trajectory(cfg.trajectory());
  SignalSeries signal = synthesize_signal(rho, cfg.kernel(), std::move(samples), threads);
  std::cout << "epsilon=" << fmt(noise_amplitude(signal, cfg.noise)) << '\n';
  if (cfg.noise > 0.0) signal = add_noise(signal, cfg.noise, cfg.seed);
  write_signal(cfg.signal_path, signal);
  std::cout << "wrote " << cfg.signal_path << '\n';
  return 0;
}

int cmd_reconstruct(const RunConfig& cfg, const std::string& ground_truth_path) {
  const SignalSeries signal = read_signal(cfg.signal_path);
  const auto outcome = run_reconstruction(cfg, signal);
  if (!ground_truth_path.empty()) {
    const DensityField truth = read_field(ground_truth_path);
    std::cout << "relative_error=" << fmt(relative_error(outcome.density, truth)) << '\n';
  }
  return outcome.diagnostics.status == CgStatus::Converged ? 0 : 2;
}

int cmd_pipeline(const RunConfig& cfg, int threads) {
  const GridSpec grid = cfg.grid();
  const DensityField truth = phantom(grid, parse_shapes(cfg.shapes, grid.n));
  write_field(cfg.density_path, truth);

  auto samples = sample_trajectory(cfg.trajectory());
  SignalSeries signal = synthesize_signal(truth, cfg.kernel(), std::move(samples), threads);
  const double eps = noise_amplitude(signal, cfg.noise);
  if (cfg.noise > 0.0) signal = add_noise(signal, cfg.noise, cfg.seed);
  write_signal(cfg.signal_path, signal);

  const auto outcome = run_reconstruction(cfg, signal);
  std::cout << "epsilon=" << fmt(eps) << '\n'
            << "relative_error=" << fmt(relative_error(outcome.density, truth)) << '\n';
  return outcome.diagnostics.status == CgStatus::Converged ? 0 : 2;
}

int cmd_kernel_table(const RunConfig& cfg, double z_min, double z_max, int count,
                     const std::string& output) {
  if (count < 2) throw std::runtime_error("kernel-table: count must be >= 2");
  if (!(z_max > z_min)) throw std::runtime_error("kernel-table: empty range");
  const KernelSpec spec = cfg.kernel();
  spec.validate();

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!output.empty()) {
    file.open(output);
    if (!file) throw std::runtime_error("cannot open for writing: " + output);
    out = &file;
  }
  *out << "z,langevin,langevin_deriv,f,kappa_h\n";
  for (int i = 0; i < count; ++i) {
    const double z = z_min + (z_max - z_min) * i / (count - 1);
    *out << fmt(z) << ',' << fmt(langevin(z)) << ',' << fmt(langevin_deriv(z)) << ','
         << fmt(f_profile(z, spec.n, spec)) << ','
         << fmt(scalar_kernel(std::abs(z), spec)) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MPI signal simulation and trace-based reconstruction"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  int threads_flag = 0;
  bool dry_run = false;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--seed", seed_override, "override the config seed");
  app.add_option("--threads", threads_flag, "worker threads (fallback: MPI_CORE_THREADS)");
  app.add_flag("--dry-run", dry_run, "print the resolved configuration and exit");

  auto* phantom_cmd = app.add_subcommand("phantom", "write a phantom density CSV");
  std::vector<std::string> shape_args;
  phantom_cmd->add_option("shapes", shape_args,
                          "shape specs, e.g. disk:cx,cy,r,amp rect:x0,y0,x1,y1,amp");

  app.add_subcommand("simulate", "synthesize the (noisy) time signal CSV");

  auto* recon_cmd = app.add_subcommand("reconstruct", "trace fit + regularized deconvolution");
  std::string ground_truth_path;
  recon_cmd->add_option("--ground-truth", ground_truth_path,
                        "density CSV to compare the reconstruction against");

  auto* pipe_cmd = app.add_subcommand("pipeline", "phantom + simulate + reconstruct in one run");

  auto* table_cmd = app.add_subcommand("kernel-table", "sample the kernels to CSV");
  const double default_span = 2.0 * std::sqrt(3.0);
  double z_min = -default_span, z_max = default_span;
  int table_count = 201;
  std::string table_output;
  table_cmd->add_option("--min", z_min, "lower end of the z range");
  table_cmd->add_option("--max", z_max, "upper end of the z range");
  table_cmd->add_option("--count", table_count, "number of equispaced samples");
  table_cmd->add_option("--output", table_output, "output CSV path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (seed_override) cfg.seed = *seed_override;

    if (dry_run) {
      print_resolved(cfg, std::cout);
      return 0;
    }

    const int threads = resolve_threads(threads_flag);
    if (phantom_cmd->parsed()) return cmd_phantom(cfg, shape_args);
    if (app.get_subcommand("simulate")->parsed()) return cmd_simulate(cfg, threads);
    if (recon_cmd->parsed()) return cmd_reconstruct(cfg, ground_truth_path);
    if (pipe_cmd->parsed()) return cmd_pipeline(cfg, threads);
    if (table_cmd->parsed()) return cmd_kernel_table(cfg, z_min, z_max, table_count, table_output);
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
