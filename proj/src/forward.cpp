#include "mpicore/forward.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace mpicore {

namespace {

// Density compacted to its nonzero cells: center coordinates plus the
// midpoint-rule weight rho_i * cell_volume.
struct CompactDensity {
  int n;
  std::vector<std::array<double, 3>> centers;
  std::vector<double> weights;
};

CompactDensity compact(const DensityField& rho) {
  CompactDensity c;
  c.n = rho.grid.n;
  const double dv = rho.grid.cell_volume();
  const auto count = rho.grid.cell_count();
  for (std::int64_t i = 0; i < count; ++i) {
    const double v = rho.values[static_cast<std::size_t>(i)];
    if (v == 0.0) continue;
    const auto center = cell_center(rho.grid, rho.grid.unflatten(i));
    std::array<double, 3> p = {0.0, 0.0, 0.0};
    for (int a = 0; a < c.n; ++a) p[a] = center[a];
    c.centers.push_back(p);
    c.weights.push_back(v * dv);
  }
  return c;
}

// Accumulates w * matrix_kernel(r - x) into the packed symmetric matrix m
// (row-major upper triangle of size n).
inline void accumulate_kernel(const KernelSpec& spec, int n, const double* r,
                              const std::array<double, 3>& x, double w, double* m) {
  double d[3];
  double y2 = 0.0;
  for (int a = 0; a < n; ++a) {
    d[a] = r[a] - x[a];
    y2 += d[a] * d[a];
  }
  if (y2 == 0.0) {
    const double diag = w / (3.0 * spec.h);
    int k = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j, ++k)
        if (i == j) m[k] += diag;
    return;
  }
  const double ynorm = std::sqrt(y2);
  const auto lp = detail::langevin_pair(ynorm / spec.h, spec);
  const double ciso = w * lp.value / ynorm;                    // (I - uu^T) part
  const double cdir = (w * lp.deriv / spec.h - ciso) / y2;     // uu^T part minus iso
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j, ++k) {
      m[k] += cdir * d[i] * d[j];
      if (i == j) m[k] += ciso;
    }
}

Eigen::MatrixXd unpack(int n, const double* m) {
  Eigen::MatrixXd out(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j, ++k) {
      out(i, j) = m[k];
      out(j, i) = m[k];
    }
  return out;
}

Eigen::MatrixXd operator_at(const CompactDensity& c, const KernelSpec& spec,
                            const Eigen::VectorXd& r) {
  double rr[3] = {0.0, 0.0, 0.0};
  for (int a = 0; a < c.n; ++a) rr[a] = r[a];
  double m[6] = {0, 0, 0, 0, 0, 0};
  for (std::size_t i = 0; i < c.weights.size(); ++i)
    accumulate_kernel(spec, c.n, rr, c.centers[i], c.weights[i], m);
  return unpack(c.n, m);
}

// SplitMix64; the per-sample stream is keyed by (seed, sample index) so the
// draws do not depend on scheduling.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline double uniform01(std::uint64_t& state) {
  return (static_cast<double>(splitmix64(state) >> 11) + 1.0) * 0x1.0p-53;
}

// Box-Muller pair of standard normals.
inline void normal_pair(std::uint64_t& state, double& g0, double& g1) {
  const double u1 = uniform01(state);
  const double u2 = uniform01(state);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * 3.14159265358979323846 * u2;
  g0 = radius * std::cos(angle);
  g1 = radius * std::sin(angle);
}

}  // namespace

Eigen::MatrixXd core_operator_at(const DensityField& rho, const KernelSpec& spec,
                                 const Eigen::VectorXd& r) {
  spec.validate();
  rho.grid.validate();
  if (rho.grid.n != spec.n || r.size() != spec.n)
    throw std::invalid_argument("core_operator_at: dimension mismatch");
  return operator_at(compact(rho), spec, r);
}

SignalSeries synthesize_signal(const DensityField& rho, const KernelSpec& spec,
                               std::vector<TrajectorySample> samples, int threads) {
  spec.validate();
  rho.grid.validate();
  if (rho.grid.n != spec.n)
    throw std::invalid_argument("synthesize_signal: dimension mismatch");

  const CompactDensity c = compact(rho);
  SignalSeries out;
  out.signal.resize(samples.size());

  auto worker = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      if (!samples[k].v.allFinite())
        throw std::invalid_argument("synthesize_signal: non-finite velocity");
      out.signal[k] = operator_at(c, spec, samples[k].r) * samples[k].v;
    }
  };

  if (threads > 1 && samples.size() > 1) {
    const std::size_t count = std::min<std::size_t>(threads, samples.size());
    std::vector<std::thread> pool;
    const std::size_t chunk = (samples.size() + count - 1) / count;
    for (std::size_t w = 0; w < count; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(begin + chunk, samples.size());
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
    for (auto& t : pool) t.join();
  } else {
    worker(0, samples.size());
  }

  out.trajectory = std::move(samples);
  return out;
}

double noise_amplitude(const SignalSeries& signal, double level) {
  if (level < 0.0) throw std::invalid_argument("noise level must be >= 0");
  double max_norm = 0.0;
  for (const auto& s : signal.signal) max_norm = std::max(max_norm, s.norm());
  return level * max_norm;
}

SignalSeries add_noise(const SignalSeries& signal, double level, std::uint64_t seed) {
  const double eps = noise_amplitude(signal, level);
  SignalSeries out = signal;
  if (eps == 0.0) return out;
  for (std::size_t k = 0; k < out.signal.size(); ++k) {
    std::uint64_t state = seed;
    // fold the sample index into the stream key
    state ^= splitmix64(state) + 0x632BE59BD9B4E019ull * (k + 1);
    auto& s = out.signal[k];
    for (Eigen::Index i = 0; i < s.size(); i += 2) {
      double g0, g1;
      normal_pair(state, g0, g1);
      s[i] += eps * g0;
      if (i + 1 < s.size()) s[i + 1] += eps * g1;
    }
  }
  return out;
}

}  // namespace mpicore
