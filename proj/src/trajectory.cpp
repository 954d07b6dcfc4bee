#include "mpicore/trajectory.hpp"

#include <cmath>
#include <stdexcept>

namespace mpicore {

namespace {
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
}

void TrajectoryConfig::validate() const {
  if (n < 1 || n > 3) throw std::invalid_argument("TrajectoryConfig: n must be 1, 2 or 3");
  if (samples < 1) throw std::invalid_argument("TrajectoryConfig: need at least one sample");
  for (int a = 0; a < n; ++a)
    if (m[a] < 1) throw std::invalid_argument("TrajectoryConfig: frequencies must be >= 1");
}

Eigen::VectorXd lissajous_position(double t, const TrajectoryConfig& cfg) {
  Eigen::VectorXd r(cfg.n);
  for (int a = 0; a < cfg.n; ++a) r[a] = std::sin(kTwoPi * cfg.m[a] * t);
  return r;
}

Eigen::VectorXd lissajous_velocity(double t, const TrajectoryConfig& cfg) {
  Eigen::VectorXd v(cfg.n);
  for (int a = 0; a < cfg.n; ++a)
    v[a] = kTwoPi * cfg.m[a] * std::cos(kTwoPi * cfg.m[a] * t);
  return v;
}

std::vector<TrajectorySample> sample_trajectory(const TrajectoryConfig& cfg) {
  cfg.validate();
  std::vector<TrajectorySample> out;
  out.reserve(static_cast<std::size_t>(cfg.samples));
  for (std::int64_t k = 0; k < cfg.samples; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(cfg.samples);
    out.push_back({t, lissajous_position(t, cfg), lissajous_velocity(t, cfg)});
  }
  return out;
}

std::int64_t CoverageReport::min_rank() const {
  std::int64_t r = cells.empty() ? 0 : cells.front().direction_rank;
  for (const auto& c : cells)
    if (c.direction_rank < r) r = c.direction_rank;
  return r;
}

CoverageReport coverage_report(const GridSpec& grid,
                               const std::vector<TrajectorySample>& samples) {
  grid.validate();
  if (samples.empty()) throw std::invalid_argument("coverage_report: no samples");

  const auto cell_count = static_cast<std::size_t>(grid.cell_count());
  CoverageReport report{grid, std::vector<CellCoverage>(cell_count), 0};

  // Gram matrices V V^T; singular values of V are the square roots of the
  // Gram eigenvalues, so the rank threshold transfers as the square.
  std::vector<Eigen::MatrixXd> gram(cell_count, Eigen::MatrixXd::Zero(grid.n, grid.n));
  for (const auto& s : samples) {
    const auto idx = locate_cell(grid, s.r);
    if (!idx) {
      ++report.outside_samples;
      continue;
    }
    const auto flat = static_cast<std::size_t>(grid.flat_index(*idx));
    ++report.cells[flat].count;
    gram[flat].noalias() += s.v * s.v.transpose();
  }

  for (std::size_t i = 0; i < cell_count; ++i) {
    if (report.cells[i].count == 0) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram[i]);
    const auto& lambda = eig.eigenvalues();
    const double sigma_max = std::sqrt(std::max(0.0, lambda[grid.n - 1]));
    const double thresh = 1e-10 * sigma_max;
    int rank = 0;
    for (int j = 0; j < grid.n; ++j)
      if (std::sqrt(std::max(0.0, lambda[j])) > thresh) ++rank;
    report.cells[i].direction_rank = rank;
  }
  return report;
}

}  // namespace mpicore
