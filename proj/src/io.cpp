#include "mpicore/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mpicore {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

GridSpec parse_grid_header(const std::string& line) {
  GridSpec grid;
  int n = 0;
  std::array<int, 3> shape = {1, 1, 1};
  const int fields = std::sscanf(line.c_str(), "# grid: n=%d shape=%dx%dx%d", &n,
                                 &shape[0], &shape[1], &shape[2]);
  if (fields < 2 || n < 1 || n > 3 || fields - 1 != n)
    throw std::runtime_error("malformed field header: " + line);
  grid.n = n;
  grid.shape = shape;
  for (int a = n; a < 3; ++a) grid.shape[a] = 1;
  grid.validate();
  return grid;
}

void write_values(std::ostream& out, const GridSpec& grid,
                  const std::vector<double>& values) {
  out << "# grid: n=" << grid.n << " shape=" << grid.shape[0];
  for (int a = 1; a < grid.n; ++a) out << 'x' << grid.shape[a];
  out << '\n';
  for (double v : values) out << fmt(v) << '\n';
}

}  // namespace

void write_field(std::ostream& out, const DensityField& field) {
  field.grid.validate();
  write_values(out, field.grid, field.values);
}

void write_field(const std::string& path, const DensityField& field) {
  auto out = open_out(path);
  write_field(out, field);
}

void write_trace(const std::string& path, const TraceField& field) {
  auto out = open_out(path);
  write_values(out, field.grid, field.values);
}

DensityField read_field(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty field file");
  const GridSpec grid = parse_grid_header(line);

  DensityField field = DensityField::zero(grid);
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    if (!std::getline(in, line))
      throw std::runtime_error("field file truncated");
    field.values[i] = std::stod(line);
    if (!std::isfinite(field.values[i]))
      throw std::runtime_error("field file contains non-finite value");
  }
  return field;
}

DensityField read_field(const std::string& path) {
  auto in = open_in(path);
  return read_field(in);
}

void write_signal(std::ostream& out, const SignalSeries& signal) {
  const int n = signal.trajectory.empty() ? 0 : static_cast<int>(signal.trajectory[0].r.size());
  out << 't';
  for (int a = 0; a < n; ++a) out << ",r" << (a + 1);
  for (int a = 0; a < n; ++a) out << ",v" << (a + 1);
  for (int a = 0; a < n; ++a) out << ",s" << (a + 1);
  out << '\n';
  for (std::size_t k = 0; k < signal.trajectory.size(); ++k) {
    const auto& sample = signal.trajectory[k];
    out << fmt(sample.t);
    for (int a = 0; a < n; ++a) out << ',' << fmt(sample.r[a]);
    for (int a = 0; a < n; ++a) out << ',' << fmt(sample.v[a]);
    for (int a = 0; a < n; ++a) out << ',' << fmt(signal.signal[k][a]);
    out << '\n';
  }
}

void write_signal(const std::string& path, const SignalSeries& signal) {
  auto out = open_out(path);
  write_signal(out, signal);
}

SignalSeries read_signal(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty signal file");
  // dimension from the header column count: 1 + 3n
  int columns = 1;
  for (char c : line)
    if (c == ',') ++columns;
  const int n = (columns - 1) / 3;
  if (n < 1 || n > 3 || columns != 1 + 3 * n)
    throw std::runtime_error("malformed signal header: " + line);

  SignalSeries signal;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    auto next = [&]() {
      if (!std::getline(row, cell, ',')) throw std::runtime_error("signal row truncated");
      return std::stod(cell);
    };
    TrajectorySample sample;
    sample.t = next();
    sample.r.resize(n);
    sample.v.resize(n);
    Eigen::VectorXd s(n);
    for (int a = 0; a < n; ++a) sample.r[a] = next();
    for (int a = 0; a < n; ++a) sample.v[a] = next();
    for (int a = 0; a < n; ++a) s[a] = next();
    signal.trajectory.push_back(std::move(sample));
    signal.signal.push_back(std::move(s));
  }
  return signal;
}

SignalSeries read_signal(const std::string& path) {
  auto in = open_in(path);
  return read_signal(in);
}

void write_fit_diagnostics(const std::string& path, const GridSpec& grid,
                           const TraceFitResult& result) {
  auto out = open_out(path);
  out << "cell_index,sample_count,rank,fitted\n";
  for (std::size_t i = 0; i < result.diagnostics.size(); ++i) {
    out << i << ',' << result.diagnostics[i].count << ','
        << result.diagnostics[i].direction_rank << ','
        << static_cast<int>(result.trace.mask[i]) << '\n';
  }
  (void)grid;
}

void write_pgm(const std::string& path, const DensityField& field) {
  if (field.grid.n != 2)
    throw std::invalid_argument("write_pgm: only 2D fields are supported");
  double lo = field.values.empty() ? 0.0 : field.values[0];
  double hi = lo;
  for (double v : field.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = (hi > lo) ? hi - lo : 1.0;

  auto out = open_out(path);
  out << "P2\n";
  out << "# min=" << fmt(lo) << " max=" << fmt(hi) << '\n';
  out << field.grid.shape[1] << ' ' << field.grid.shape[0] << "\n255\n";
  for (int i = 0; i < field.grid.shape[0]; ++i) {
    for (int j = 0; j < field.grid.shape[1]; ++j) {
      const double v = field.values[static_cast<std::size_t>(i) * field.grid.shape[1] + j];
      const int g = static_cast<int>(std::lround((v - lo) / span * 255.0));
      out << g << (j + 1 == field.grid.shape[1] ? '\n' : ' ');
    }
  }
}

}  // namespace mpicore
