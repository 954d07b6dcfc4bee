#ifndef MPICORE_DECONVOLVE_HPP
#define MPICORE_DECONVOLVE_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "mpicore/grid.hpp"
#include "mpicore/kernels.hpp"

namespace mpicore {

struct ReconConfig {
  double mu = 3e-4;        // Tikhonov weight
  double tau = 2e-3;       // CG relative residual tolerance
  int max_iter = 500;
  KernelSpec spec;

  void validate() const;
};

/// Discretized convolution with kappa_h on the grid (summed-up midpoint
/// rule): out(i) = sum_j in(j) * kappa_h(|x_i - x_j|) * cell_volume.
/// The kernel stamp depends only on the index offset, so large grids run
/// through a zero-padded FFT; the direct sum stays available as an oracle.
class KhOperator {
 public:
  KhOperator(const GridSpec& grid, const KernelSpec& spec);
  ~KhOperator();
  KhOperator(KhOperator&&) noexcept;
  KhOperator& operator=(KhOperator&&) noexcept;
  KhOperator(const KhOperator&) = delete;
  KhOperator& operator=(const KhOperator&) = delete;

  const GridSpec& grid() const { return grid_; }

  std::vector<double> apply(const std::vector<double>& field) const;
  std::vector<double> apply_direct(const std::vector<double>& field) const;

 private:
  GridSpec grid_;
  struct Fft;
  std::vector<double> stamp_;  // kernel values over index offsets, times cell volume
  std::unique_ptr<Fft> fft_;   // null for small grids

  std::vector<double> apply_fft(const std::vector<double>& field) const;
};

/// Five/seven-point Laplacian with zero Dirichlet boundary:
/// missing neighbors contribute ghost zeros.
std::vector<double> apply_laplacian(const std::vector<double>& field,
                                    const GridSpec& grid);

/// Left-hand side of the Euler-Lagrange system: rho -> -mu L rho + K_h^2 rho.
std::vector<double> el_operator(const std::vector<double>& rho, const KhOperator& kh,
                                double mu);

enum class CgStatus { Converged, MaxIterExceeded, NonFiniteBreakdown };

struct CgResult {
  std::vector<double> solution;
  int iterations = 0;
  double relative_residual = 0.0;
  CgStatus status = CgStatus::Converged;
};

/// Plain conjugate gradients from the zero initial guess; stops when
/// ||r||/||b|| <= tau or the iteration cap is hit.
template <typename Operator>
CgResult cg_solve(const Operator& op, const std::vector<double>& rhs, double tau,
                  int max_iter);

/// Tikhonov objective mu ||D rho||^2 + ||K_h rho - u||^2 with D the
/// forward-difference gradient with zero Dirichlet ghosts (-L = D^T D).
double objective(const std::vector<double>& rho, const std::vector<double>& u,
                 const KhOperator& kh, double mu);

struct ReconDiagnostics {
  int iterations = 0;
  double relative_residual = 0.0;
  double objective = 0.0;
  std::int64_t masked_cells = 0;
  CgStatus status = CgStatus::Converged;
};

/// Full deconvolution step: zero-fill masked cells, form the right-hand side
/// K_h u, and solve (-mu L + K_h^2) rho = K_h u by CG.
std::pair<DensityField, ReconDiagnostics> reconstruct(const TraceField& u,
                                                      const GridSpec& grid,
                                                      const ReconConfig& cfg);

// --- implementation of the operator-generic CG ---

namespace detail {
double dot(const std::vector<double>& a, const std::vector<double>& b);
}

template <typename Operator>
CgResult cg_solve(const Operator& op, const std::vector<double>& rhs, double tau,
                  int max_iter) {
  CgResult result;
  result.solution.assign(rhs.size(), 0.0);

  const double rhs_norm2 = detail::dot(rhs, rhs);
  if (rhs_norm2 == 0.0) return result;

  std::vector<double> residual = rhs;  // r = b - A*0
  std::vector<double> direction = rhs;
  double rho_old = rhs_norm2;

  for (int iter = 1; iter <= max_iter; ++iter) {
    const std::vector<double> ad = op(direction);
    const double d_ad = detail::dot(direction, ad);
    if (!(d_ad > 0.0) || !std::isfinite(d_ad)) {
      result.status = CgStatus::NonFiniteBreakdown;
      result.relative_residual = std::sqrt(rho_old / rhs_norm2);
      return result;
    }
    const double alpha = rho_old / d_ad;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
      result.solution[i] += alpha * direction[i];
      residual[i] -= alpha * ad[i];
    }
    const double rho_new = detail::dot(residual, residual);
    result.iterations = iter;
    result.relative_residual = std::sqrt(rho_new / rhs_norm2);
    if (!std::isfinite(rho_new)) {
      result.status = CgStatus::NonFiniteBreakdown;
      return result;
    }
    if (result.relative_residual <= tau) return result;
    const double beta = rho_new / rho_old;
    for (std::size_t i = 0; i < rhs.size(); ++i)
      direction[i] = residual[i] + beta * direction[i];
    rho_old = rho_new;
  }
  result.status = CgStatus::MaxIterExceeded;
  return result;
}

}  // namespace mpicore

#endif
