#include "mpicore/deconvolve.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include <fftw3.h>

namespace mpicore {

namespace {

// Above this many cells the direct O(M^2) sum becomes the bottleneck and
// apply() switches to the padded-FFT path.
constexpr std::int64_t kFftThreshold = 4096;

}  // namespace

void ReconConfig::validate() const {
  if (mu < 0.0) throw std::invalid_argument("ReconConfig: mu must be >= 0");
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("ReconConfig: tau must be in (0,1)");
  if (max_iter < 1) throw std::invalid_argument("ReconConfig: max_iter must be >= 1");
  spec.validate();
}

struct KhOperator::Fft {
  std::array<int, 3> padded = {1, 1, 1};
  std::int64_t real_size = 0;
  std::int64_t complex_size = 0;
  std::vector<std::complex<double>> stamp_hat;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  double* work_real = nullptr;
  fftw_complex* work_complex = nullptr;

  ~Fft() {
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
    if (work_real) fftw_free(work_real);
    if (work_complex) fftw_free(work_complex);
  }
};

KhOperator::KhOperator(const GridSpec& grid, const KernelSpec& spec) : grid_(grid) {
  grid.validate();
  spec.validate();
  if (grid.n != spec.n) throw std::invalid_argument("KhOperator: dimension mismatch");

  // Kernel stamp over all index offsets d_a in [-(N_a-1), N_a-1],
  // already scaled by the midpoint-rule cell volume.
  std::array<int, 3> ext = {1, 1, 1};
  std::int64_t stamp_size = 1;
  for (int a = 0; a < grid.n; ++a) {
    ext[a] = 2 * grid.shape[a] - 1;
    stamp_size *= ext[a];
  }
  stamp_.resize(static_cast<std::size_t>(stamp_size));
  const double dv = grid.cell_volume();
  for (std::int64_t s = 0; s < stamp_size; ++s) {
    std::int64_t rem = s;
    double dist2 = 0.0;
    for (int a = grid.n - 1; a >= 0; --a) {
      const int off = static_cast<int>(rem % ext[a]) - (grid.shape[a] - 1);
      rem /= ext[a];
      const double d = off * grid.delta(a);
      dist2 += d * d;
    }
    stamp_[static_cast<std::size_t>(s)] = scalar_kernel(std::sqrt(dist2), spec) * dv;
  }

  if (grid.cell_count() <= kFftThreshold) return;

  // Padded circular convolution: P_a = 2 N_a covers all linear offsets.
  auto fft = std::make_unique<Fft>();
  fft->real_size = 1;
  for (int a = 0; a < grid.n; ++a) {
    fft->padded[a] = 2 * grid.shape[a];
    fft->real_size *= fft->padded[a];
  }
  fft->complex_size = fft->real_size / fft->padded[grid.n - 1] * (fft->padded[grid.n - 1] / 2 + 1);

  fft->work_real = fftw_alloc_real(static_cast<std::size_t>(fft->real_size));
  fft->work_complex = fftw_alloc_complex(static_cast<std::size_t>(fft->complex_size));
  fft->forward = fftw_plan_dft_r2c(grid.n, fft->padded.data(), fft->work_real,
                                   fft->work_complex, FFTW_ESTIMATE);
  fft->backward = fftw_plan_dft_c2r(grid.n, fft->padded.data(), fft->work_complex,
                                    fft->work_real, FFTW_ESTIMATE);

  // Embed the stamp with wrap-around indexing and transform it once.
  for (std::int64_t i = 0; i < fft->real_size; ++i) fft->work_real[i] = 0.0;
  for (std::int64_t s = 0; s < stamp_size; ++s) {
    std::int64_t rem = s;
    std::int64_t padded_index = 0;
    for (int a = 0; a < grid.n; ++a) {
      std::int64_t scale = 1;
      for (int b = a + 1; b < grid.n; ++b) scale *= ext[b];
      const int off = static_cast<int>((rem / scale) % ext[a]) - (grid.shape[a] - 1);
      const int wrapped = (off + fft->padded[a]) % fft->padded[a];
      padded_index = padded_index * fft->padded[a] + wrapped;
    }
    fft->work_real[padded_index] = stamp_[static_cast<std::size_t>(s)];
  }
  fftw_execute(fft->forward);
  fft->stamp_hat.resize(static_cast<std::size_t>(fft->complex_size));
  const double scale = 1.0 / static_cast<double>(fft->real_size);
  for (std::int64_t i = 0; i < fft->complex_size; ++i)
    fft->stamp_hat[static_cast<std::size_t>(i)] =
        std::complex<double>(fft->work_complex[i][0], fft->work_complex[i][1]) * scale;

  fft_ = std::move(fft);
}

KhOperator::~KhOperator() = default;
KhOperator::KhOperator(KhOperator&&) noexcept = default;
KhOperator& KhOperator::operator=(KhOperator&&) noexcept = default;

std::vector<double> KhOperator::apply(const std::vector<double>& field) const {
  if (field.size() != static_cast<std::size_t>(grid_.cell_count()))
    throw std::invalid_argument("KhOperator: field size mismatch");
  return fft_ ? apply_fft(field) : apply_direct(field);
}

std::vector<double> KhOperator::apply_direct(const std::vector<double>& field) const {
  if (field.size() != static_cast<std::size_t>(grid_.cell_count()))
    throw std::invalid_argument("KhOperator: field size mismatch");
  const auto count = grid_.cell_count();
  std::array<int, 3> ext = {1, 1, 1};
  for (int a = 0; a < grid_.n; ++a) ext[a] = 2 * grid_.shape[a] - 1;

  std::vector<double> out(field.size(), 0.0);
  for (std::int64_t i = 0; i < count; ++i) {
    const auto ii = grid_.unflatten(i);
    double acc = 0.0;
    for (std::int64_t j = 0; j < count; ++j) {
      const auto jj = grid_.unflatten(j);
      std::int64_t s = 0;
      for (int a = 0; a < grid_.n; ++a)
        s = s * ext[a] + (ii[a] - jj[a] + grid_.shape[a] - 1);
      acc += field[static_cast<std::size_t>(j)] * stamp_[static_cast<std::size_t>(s)];
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

std::vector<double> KhOperator::apply_fft(const std::vector<double>& field) const {
  auto& fft = *fft_;
  for (std::int64_t i = 0; i < fft.real_size; ++i) fft.work_real[i] = 0.0;

  const auto count = grid_.cell_count();
  auto padded_flat = [&](const MultiIndex& idx) {
    std::int64_t flat = 0;
    for (int a = 0; a < grid_.n; ++a) flat = flat * fft.padded[a] + idx[a];
    return flat;
  };
  for (std::int64_t i = 0; i < count; ++i)
    fft.work_real[padded_flat(grid_.unflatten(i))] = field[static_cast<std::size_t>(i)];

  fftw_execute(fft.forward);
  for (std::int64_t i = 0; i < fft.complex_size; ++i) {
    const std::complex<double> v(fft.work_complex[i][0], fft.work_complex[i][1]);
    const std::complex<double> p = v * fft.stamp_hat[static_cast<std::size_t>(i)];
    fft.work_complex[i][0] = p.real();
    fft.work_complex[i][1] = p.imag();
  }
  fftw_execute(fft.backward);

  std::vector<double> out(field.size());
  for (std::int64_t i = 0; i < count; ++i)
    out[static_cast<std::size_t>(i)] = fft.work_real[padded_flat(grid_.unflatten(i))];
  return out;
}

std::vector<double> apply_laplacian(const std::vector<double>& field,
                                    const GridSpec& grid) {
  grid.validate();
  if (field.size() != static_cast<std::size_t>(grid.cell_count()))
    throw std::invalid_argument("apply_laplacian: field size mismatch");

  const auto count = grid.cell_count();
  std::vector<double> out(field.size(), 0.0);
  for (std::int64_t i = 0; i < count; ++i) {
    const auto idx = grid.unflatten(i);
    double acc = 0.0;
    for (int a = 0; a < grid.n; ++a) {
      const double inv_d2 = 1.0 / (grid.delta(a) * grid.delta(a));
      double neighbors = 0.0;  // ghost zeros beyond the boundary
      if (idx[a] > 0) {
        auto left = idx;
        --left[a];
        neighbors += field[static_cast<std::size_t>(grid.flat_index(left))];
      }
      if (idx[a] + 1 < grid.shape[a]) {
        auto right = idx;
        ++right[a];
        neighbors += field[static_cast<std::size_t>(grid.flat_index(right))];
      }
      acc += (neighbors - 2.0 * field[static_cast<std::size_t>(i)]) * inv_d2;
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

std::vector<double> el_operator(const std::vector<double>& rho, const KhOperator& kh,
                                double mu) {
  std::vector<double> out = kh.apply(kh.apply(rho));
  if (mu != 0.0) {
    const auto lap = apply_laplacian(rho, kh.grid());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= mu * lap[i];
  }
  return out;
}

namespace detail {
double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
}  // namespace detail

double objective(const std::vector<double>& rho, const std::vector<double>& u,
                 const KhOperator& kh, double mu) {
  const auto& grid = kh.grid();
  if (rho.size() != u.size() || rho.size() != static_cast<std::size_t>(grid.cell_count()))
    throw std::invalid_argument("objective: shape mismatch");

  const auto conv = kh.apply(rho);
  double misfit = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double d = conv[i] - u[i];
    misfit += d * d;
  }

  // ||D rho||^2 over all faces including the Dirichlet boundary faces,
  // so that -L = D^T D holds exactly.
  double grad = 0.0;
  const auto count = grid.cell_count();
  for (std::int64_t i = 0; i < count; ++i) {
    const auto idx = grid.unflatten(i);
    const double center = rho[static_cast<std::size_t>(i)];
    for (int a = 0; a < grid.n; ++a) {
      const double inv_d = 1.0 / grid.delta(a);
      const double next = (idx[a] + 1 < grid.shape[a])
                              ? rho[static_cast<std::size_t>(grid.flat_index([&] {
                                  auto j = idx;
                                  ++j[a];
                                  return j;
                                }()))]
                              : 0.0;
      double d = (next - center) * inv_d;
      grad += d * d;
      if (idx[a] == 0) {  // lower boundary face, ghost zero
        d = center * inv_d;
        grad += d * d;
      }
    }
  }
  return mu * grad + misfit;
}

std::pair<DensityField, ReconDiagnostics> reconstruct(const TraceField& u,
                                                      const GridSpec& grid,
                                                      const ReconConfig& cfg) {
  cfg.validate();
  if (!(u.grid == grid)) throw std::invalid_argument("reconstruct: grid mismatch");

  ReconDiagnostics diag;
  std::vector<double> data(u.values.size());
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const bool fitted = u.mask[i] != 0;
    data[i] = fitted ? u.values[i] : 0.0;  // zero-fill unfitted cells
    if (!fitted) ++diag.masked_cells;
  }

  const KhOperator kh(grid, cfg.spec);
  const auto rhs = kh.apply(data);
  const auto cg = cg_solve(
      [&](const std::vector<double>& x) { return el_operator(x, kh, cfg.mu); }, rhs,
      cfg.tau, cfg.max_iter);

  diag.iterations = cg.iterations;
  diag.relative_residual = cg.relative_residual;
  diag.status = cg.status;
  diag.objective = objective(cg.solution, data, kh, cfg.mu);

  DensityField rho{grid, cg.solution};
  return {std::move(rho), diag};
}

}  // namespace mpicore
