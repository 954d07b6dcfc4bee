#ifndef MPICORE_FORWARD_HPP
#define MPICORE_FORWARD_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mpicore/grid.hpp"
#include "mpicore/kernels.hpp"
#include "mpicore/trajectory.hpp"

namespace mpicore {

/// Time signal attached to its generating trajectory, same length and order.
struct SignalSeries {
  std::vector<TrajectorySample> trajectory;
  std::vector<Eigen::VectorXd> signal;  // s_k, one n-vector per sample
};

/// Core operator at a point: the summed-up midpoint rule
///   sum_i rho_i * matrix_kernel(r - x_i) * cell_volume
/// over all grid cells. Symmetric by construction.
Eigen::MatrixXd core_operator_at(const DensityField& rho, const KernelSpec& spec,
                                 const Eigen::VectorXd& r);

/// s_k = core_operator_at(rho, spec, r_k) * v_k for every trajectory sample.
/// threads <= 0 means single-threaded.
SignalSeries synthesize_signal(const DensityField& rho, const KernelSpec& spec,
                               std::vector<TrajectorySample> samples,
                               int threads = 0);

/// Additive Gaussian noise: amplitude eps = level * max_k |s_k| (Euclidean
/// norm per vector sample); each component perturbed by an independent
/// standard-normal draw scaled by eps. The stream is derived per sample index
/// from the seed, so output is deterministic and scheduling-independent.
SignalSeries add_noise(const SignalSeries& signal, double level, std::uint64_t seed);

/// The noise amplitude the same call to add_noise would use.
double noise_amplitude(const SignalSeries& signal, double level);

}  // namespace mpicore

#endif
