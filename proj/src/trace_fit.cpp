#include "mpicore/trace_fit.hpp"

#include <stdexcept>

namespace mpicore {

BinnedSamples bin_samples(const GridSpec& grid, const SignalSeries& signal) {
  grid.validate();
  if (signal.trajectory.size() != signal.signal.size())
    throw std::invalid_argument("bin_samples: trajectory/signal length mismatch");

  const auto cell_count = static_cast<std::size_t>(grid.cell_count());
  std::vector<std::vector<std::size_t>> members(cell_count);
  BinnedSamples out{grid, {}, 0};
  for (std::size_t k = 0; k < signal.trajectory.size(); ++k) {
    const auto idx = locate_cell(grid, signal.trajectory[k].r);
    if (!idx) {
      ++out.dropped;
      continue;
    }
    members[static_cast<std::size_t>(grid.flat_index(*idx))].push_back(k);
  }

  out.batches.resize(cell_count);
  for (std::size_t i = 0; i < cell_count; ++i) {
    auto& batch = out.batches[i];
    batch.cell = grid.unflatten(static_cast<std::int64_t>(i));
    const auto m = static_cast<Eigen::Index>(members[i].size());
    batch.velocities.resize(grid.n, m);
    batch.signals.resize(grid.n, m);
    for (Eigen::Index c = 0; c < m; ++c) {
      const auto k = members[i][static_cast<std::size_t>(c)];
      batch.velocities.col(c) = signal.trajectory[k].v;
      batch.signals.col(c) = signal.signal[k];
    }
  }
  return out;
}

std::optional<Eigen::MatrixXd> fit_cell(const CellBatch& batch) {
  const auto n = batch.velocities.rows();
  const auto m = batch.velocities.cols();
  if (batch.signals.rows() != n || batch.signals.cols() != m)
    throw std::invalid_argument("fit_cell: V/S shape mismatch");
  if (m < n) return std::nullopt;

  // Reduced QR of V^T (m x n): V^T = Q R with Q m x n, R n x n upper.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(batch.velocities.transpose());
  Eigen::MatrixXd r_full = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();

  // Singular values of R equal those of V.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r_full);
  const auto& sigma = svd.singularValues();
  if (sigma[0] <= 0.0 || sigma[n - 1] <= 1e-10 * sigma[0]) return std::nullopt;

  Eigen::MatrixXd q_thin = qr.householderQ() * Eigen::MatrixXd::Identity(m, n);

  // A = S Q R^{-T}  <=>  R A^T = (S Q)^T
  Eigen::MatrixXd sq = batch.signals * q_thin;
  Eigen::MatrixXd a_t =
      r_full.triangularView<Eigen::Upper>().solve(sq.transpose());
  return a_t.transpose();
}

TraceField trace_field(const std::vector<CellFit>& fits, const GridSpec& grid) {
  grid.validate();
  if (fits.size() != static_cast<std::size_t>(grid.cell_count()))
    throw std::invalid_argument("trace_field: fit count does not match grid");
  auto out = TraceField::zero(grid);
  for (std::size_t i = 0; i < fits.size(); ++i) {
    if (!fits[i].matrix) continue;
    out.values[i] = fits[i].matrix->trace();
    out.mask[i] = 1;
  }
  return out;
}

TraceFitResult fit_trace_field(const GridSpec& grid, const SignalSeries& signal) {
  const auto binned = bin_samples(grid, signal);

  TraceFitResult result;
  result.dropped_samples = binned.dropped;
  result.diagnostics.resize(binned.batches.size());

  std::vector<CellFit> fits(binned.batches.size());
  for (std::size_t i = 0; i < binned.batches.size(); ++i) {
    const auto& batch = binned.batches[i];
    result.diagnostics[i].count = batch.velocities.cols();
    fits[i].matrix = fit_cell(batch);
    if (fits[i].matrix) {
      result.diagnostics[i].direction_rank = grid.n;
    } else {
      ++result.unfitted_cells;
      // rank from singular values for the diagnostics record
      if (batch.velocities.cols() > 0) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(batch.velocities);
        const auto& sigma = svd.singularValues();
        int rank = 0;
        for (Eigen::Index j = 0; j < sigma.size(); ++j)
          if (sigma[j] > 1e-10 * sigma[0]) ++rank;
        result.diagnostics[i].direction_rank = rank;
      }
    }
  }
  result.trace = trace_field(fits, grid);
  return result;
}

}  // namespace mpicore
