#ifndef MPICORE_TRAJECTORY_HPP
#define MPICORE_TRAJECTORY_HPP

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mpicore/grid.hpp"

namespace mpicore {

/// Closed Lissajous scan over the unit period [0,1]:
/// component j of the field-free point is sin(2 pi m_j t).
struct TrajectoryConfig {
  int n = 2;
  std::array<int, 3> m = {101, 102, 103};  // integer frequencies
  std::int64_t samples = 200000;           // K equidistant samples t_k = k/K

  void validate() const;
};

struct TrajectorySample {
  double t = 0.0;
  Eigen::VectorXd r;  // position in [-1,1]^n
  Eigen::VectorXd v;  // tangent dr/dt
};

Eigen::VectorXd lissajous_position(double t, const TrajectoryConfig& cfg);
Eigen::VectorXd lissajous_velocity(double t, const TrajectoryConfig& cfg);

/// Left-closed equidistant sampling t_k = k/K, k = 0..K-1 (t = 1 duplicates
/// t = 0 on the closed curve and is excluded).
std::vector<TrajectorySample> sample_trajectory(const TrajectoryConfig& cfg);

/// Per-cell sampling adequacy: sample count and the numerical rank of the
/// stacked velocity matrix (singular values above 1e-10 of the largest).
struct CellCoverage {
  std::int64_t count = 0;
  int direction_rank = 0;
};

struct CoverageReport {
  GridSpec grid;
  std::vector<CellCoverage> cells;  // flat grid order
  std::int64_t outside_samples = 0;

  std::int64_t min_rank() const;
};

CoverageReport coverage_report(const GridSpec& grid,
                               const std::vector<TrajectorySample>& samples);

}  // namespace mpicore

#endif
