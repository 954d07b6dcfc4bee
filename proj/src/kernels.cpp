#include "mpicore/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace mpicore {

namespace {

constexpr double kPi = 3.14159265358979323846;

// coth(z) rounds to 1 and 1/sinh^2(z) underflows relative to 1/z^2
// beyond this point.
constexpr double kAsymptoticZ = 19.0;

// B_0, B_2, ..., B_80 (exact rationals rounded once to double).
constexpr std::array<double, BernoulliTable::kMaxTerms + 1> kBernoulliEven = {
    1.00000000000000000e+00,
    1.66666666666666657e-01,
    -3.33333333333333329e-02,
    2.38095238095238082e-02,
    -3.33333333333333329e-02,
    7.57575757575757597e-02,
    -2.53113553113553102e-01,
    1.16666666666666674e+00,
    -7.09215686274509771e+00,
    5.49711779448621556e+01,
    -5.29124242424242425e+02,
    6.19212318840579701e+03,
    -8.65802531135531171e+04,
    1.42551716666666674e+06,
    -2.72982310678160936e+07,
    6.01580873900642395e+08,
    -1.51163157670921574e+10,
    4.29614643061166687e+11,
    -1.37116552050883320e+13,
    4.88332318973593188e+14,
    -1.92965793419400680e+16,
    8.41693047573682560e+17,
    -4.03380718540594545e+19,
    2.11507486380819926e+21,
    -1.20866265222965262e+23,
    7.50086674607696417e+24,
    -5.03877810148106885e+26,
    3.65287764848181223e+28,
    -2.84987693024508824e+30,
    2.38654274996836274e+32,
    -2.13999492572253349e+34,
    2.05009757234780974e+36,
    -2.09380059113463793e+38,
    2.27526964884635149e+40,
    -2.62577102862395772e+42,
    3.21250821027180317e+44,
    -4.15982781667947120e+46,
    5.69206954820352832e+48,
    -8.21836294197845777e+50,
    1.25029043271669940e+53,
    -2.00155832332483701e+55,
};

}  // namespace

void KernelSpec::validate() const {
  if (n < 1 || n > 3) throw std::invalid_argument("KernelSpec: n must be 1, 2 or 3");
  if (!(h > 0.0)) throw std::invalid_argument("KernelSpec: h must be positive");
  if (!(series_cutoff > 0.0 && series_cutoff < kPi))
    throw std::invalid_argument("KernelSpec: series_cutoff must lie in (0, pi)");
  if (series_terms < 1 || series_terms > BernoulliTable::kMaxTerms)
    throw std::invalid_argument("KernelSpec: series_terms out of range");
}

BernoulliTable::BernoulliTable() : b_even_(kBernoulliEven) {
  // a_k = 2^{2k} B_{2k} / (2k)!, built incrementally to keep intermediates tame:
  // a_k = a_{k-1} * 4 * (B_{2k}/B_{2k-2}) / ((2k)(2k-1)) would mix signs,
  // so accumulate pow/factorial directly instead.
  a_[0] = 0.0;
  double pow4 = 1.0;   // 2^{2k}
  double fact = 1.0;   // (2k)!
  for (int k = 1; k <= kMaxTerms; ++k) {
    pow4 *= 4.0;
    fact *= (2.0 * k - 1.0) * (2.0 * k);
    a_[k] = pow4 * b_even_[k] / fact;
  }
}

const BernoulliTable& BernoulliTable::instance() {
  static const BernoulliTable table;
  return table;
}

namespace detail {

LangevinPair langevin_pair(double z, const KernelSpec& spec) {
  const double az = std::abs(z);
  if (az < spec.series_cutoff) {
    const BernoulliTable& t = BernoulliTable::instance();
    const double z2 = z * z;
    double value = 0.0;
    double deriv = 0.0;
    double zpow = 1.0;  // z^{2k-2}
    for (int k = 1; k <= spec.series_terms; ++k) {
      const double a = t.langevin_coeff(k);
      value += a * zpow * z;
      deriv += a * (2.0 * k - 1.0) * zpow;
      zpow *= z2;
    }
    return {value, deriv};
  }
  if (az >= kAsymptoticZ) {
    const double inv = 1.0 / az;
    const double s = (z < 0.0) ? -1.0 : 1.0;
    return {s * (1.0 - inv), inv * inv};
  }
  const double coth = 1.0 / std::tanh(z);
  const double sinh = std::sinh(z);
  return {coth - 1.0 / z, 1.0 / (z * z) - 1.0 / (sinh * sinh)};
}

}  // namespace detail

double langevin(double z) {
  if (z == 0.0) return 0.0;
  return detail::langevin_pair(z, KernelSpec{}).value;
}

double langevin_deriv(double z) {
  return detail::langevin_pair(z, KernelSpec{}).deriv;
}

double f_profile_series(double z, int n, const BernoulliTable& table, int terms) {
  if (std::abs(z) >= kPi)
    throw std::domain_error("f_profile_series: |z| >= pi is outside the convergence radius");
  // f(z) = sum_{k>=0} a_{k+1} (2k + n) z^{2k}
  const double z2 = z * z;
  double sum = 0.0;
  double zpow = 1.0;
  for (int k = 0; k < terms; ++k) {
    sum += table.langevin_coeff(k + 1) * (2.0 * k + n) * zpow;
    zpow *= z2;
  }
  return sum;
}

double f_profile(double z, int n, const KernelSpec& spec) {
  if (std::abs(z) < spec.series_cutoff)
    return f_profile_series(z, n, BernoulliTable::instance(), spec.series_terms);
  const auto lp = detail::langevin_pair(z, spec);
  return lp.deriv + lp.value * (n - 1) / z;
}

double scalar_kernel(double y_norm, const KernelSpec& spec) {
  return f_profile(y_norm / spec.h, spec.n, spec) / spec.h;
}

double ideal_kernel(double y_norm, int n) {
  if (n == 1)
    throw std::domain_error("ideal_kernel: the 1D limit is a Dirac distribution");
  if (n != 2 && n != 3)
    throw std::domain_error("ideal_kernel: n must be 2 or 3");
  if (!(y_norm > 0.0))
    throw std::domain_error("ideal_kernel: singular at y = 0");
  return (n - 1) / y_norm;
}

Eigen::VectorXd vector_kernel(const Eigen::VectorXd& y, const KernelSpec& spec) {
  const double r = y.norm();
  if (r == 0.0) return Eigen::VectorXd::Zero(y.size());
  return (langevin(r / spec.h) / r) * y;
}

Eigen::MatrixXd matrix_kernel(const Eigen::VectorXd& y, const KernelSpec& spec) {
  const auto n = y.size();
  const double r = y.norm();
  if (r == 0.0)
    return Eigen::MatrixXd::Identity(n, n) / (3.0 * spec.h);
  const auto lp = detail::langevin_pair(r / spec.h, spec);
  const Eigen::VectorXd u = y / r;
  const Eigen::MatrixXd proj = u * u.transpose();
  return (lp.deriv / spec.h) * proj +
         (lp.value / r) * (Eigen::MatrixXd::Identity(n, n) - proj);
}

}  // namespace mpicore
