#ifndef MPICORE_TRACE_FIT_HPP
#define MPICORE_TRACE_FIT_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mpicore/forward.hpp"
#include "mpicore/grid.hpp"

namespace mpicore {

/// Velocities and signals of the time samples landing in one grid cell,
/// columns aligned and in time order.
struct CellBatch {
  MultiIndex cell = {0, 0, 0};
  Eigen::MatrixXd velocities;  // n x m
  Eigen::MatrixXd signals;     // n x m
};

struct BinnedSamples {
  GridSpec grid;
  std::vector<CellBatch> batches;  // flat grid order, possibly empty columns
  std::int64_t dropped = 0;        // samples outside the FOV
};

BinnedSamples bin_samples(const GridSpec& grid, const SignalSeries& signal);

/// Least-squares minimizer of ||A V - S||_F via the reduced QR of V^T,
/// A = S Q R^{-T}. Returns nullopt when V is numerically rank deficient
/// (singular values below 1e-10 of the largest, or fewer than n columns).
std::optional<Eigen::MatrixXd> fit_cell(const CellBatch& batch);

struct CellFit {
  std::optional<Eigen::MatrixXd> matrix;
};

/// u_i = trace(A_i) on fitted cells; unfitted cells get value 0 and a
/// false mask entry.
TraceField trace_field(const std::vector<CellFit>& fits, const GridSpec& grid);

struct TraceFitResult {
  TraceField trace;
  std::int64_t dropped_samples = 0;
  std::int64_t unfitted_cells = 0;
  std::vector<CellCoverage> diagnostics;  // count + velocity rank per cell
};

/// Convenience composition: bin, fit every cell, take traces.
TraceFitResult fit_trace_field(const GridSpec& grid, const SignalSeries& signal);

}  // namespace mpicore

#endif
