#ifndef MPICORE_KERNELS_HPP
#define MPICORE_KERNELS_HPP

#include <array>
#include <cstddef>

#include <Eigen/Dense>

namespace mpicore {

/// Evaluation policy for the Langevin-based kernels.
/// n is the spatial dimension, h the dimensionless resolution parameter.
/// Below |z| < series_cutoff the power series replaces the closed form
/// (coth(z) - 1/z suffers catastrophic cancellation near zero).
struct KernelSpec {
  int n = 2;
  double h = 0.01;
  double series_cutoff = 0.5;
  int series_terms = 40;

  void validate() const;  // throws std::invalid_argument
};

/// Even-index Bernoulli numbers B_0, B_2, ..., B_80 and the derived
/// Langevin series coefficients a_k = 2^{2k} B_{2k} / (2k)!.
class BernoulliTable {
 public:
  static constexpr int kMaxTerms = 40;

  BernoulliTable();

  double bernoulli_even(int k) const { return b_even_[k]; }   // B_{2k}
  double langevin_coeff(int k) const { return a_[k]; }        // a_k, k >= 1

  static const BernoulliTable& instance();

 private:
  std::array<double, kMaxTerms + 1> b_even_;
  std::array<double, kMaxTerms + 1> a_;
};

/// Langevin function L(z) = coth(z) - 1/z. Odd, range (-1,1), L(0) = 0.
double langevin(double z);

/// L'(z) = 1/z^2 - 1/sinh^2(z). Even, L'(0) = 1/3.
double langevin_deriv(double z);

/// Radial kernel profile f(z) = L'(z) + (n-1) L(z)/z.
/// Series path is used for |z| < spec.series_cutoff.
double f_profile(double z, int n, const KernelSpec& spec);

/// Series evaluation of f; valid only inside the convergence radius pi.
/// Throws std::domain_error for |z| >= pi.
double f_profile_series(double z, int n, const BernoulliTable& table, int terms);

/// Trace kernel kappa_h(y) = (1/h) f(|y|/h). Finite everywhere.
double scalar_kernel(double y_norm, const KernelSpec& spec);

/// Idealized limit kernel (n-1)/|y| for n in {2,3}.
/// Throws std::domain_error for y_norm <= 0 or n == 1 (Dirac case).
double ideal_kernel(double y_norm, int n);

/// Flux kernel L(|y|/h) y/|y|; zero vector at y = 0.
Eigen::VectorXd vector_kernel(const Eigen::VectorXd& y, const KernelSpec& spec);

/// Gradient of the flux kernel:
///   (1/h) L'(z) yy^T/|y|^2 + (L(z)/|y|) (I - yy^T/|y|^2),   z = |y|/h,
/// continuously extended to (1/(3h)) I at y = 0. Always symmetric.
Eigen::MatrixXd matrix_kernel(const Eigen::VectorXd& y, const KernelSpec& spec);

namespace detail {

// Branch-free-ish closed form / asymptotic split shared by the hot loops.
// For z >= 19, coth(z) == 1 and 1/sinh^2(z) is negligible at double precision.
struct LangevinPair {
  double value;  // L(z)
  double deriv;  // L'(z)
};
LangevinPair langevin_pair(double z, const KernelSpec& spec);

}  // namespace detail

}  // namespace mpicore

#endif
