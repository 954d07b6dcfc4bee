#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mpicore/deconvolve.hpp"
#include "mpicore/forward.hpp"
#include "mpicore/trace_fit.hpp"

using namespace mpicore;

namespace {

GridSpec grid2(int n1, int n2) {
  GridSpec g;
  g.n = 2;
  g.shape = {n1, n2, 1};
  return g;
}

CellBatch random_batch(std::mt19937_64& rng, int n, int m) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  CellBatch batch;
  batch.velocities.resize(n, m);
  batch.signals.resize(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      batch.velocities(i, j) = dist(rng);
      batch.signals(i, j) = dist(rng);
    }
  return batch;
}

}  // namespace

TEST_CASE("binning routes every in-FOV sample to exactly one batch") {
  const GridSpec g = grid2(2, 2);
  SignalSeries series;
  auto push = [&](double x, double y) {
    TrajectorySample s;
    s.t = series.trajectory.size() * 0.1;
    s.r = Eigen::Vector2d(x, y);
    s.v = Eigen::Vector2d(1.0, 2.0);
    series.trajectory.push_back(std::move(s));
    series.signal.push_back(Eigen::Vector2d(0.5, -0.5));
  };
  push(-0.5, -0.5);
  push(-0.4, -0.6);
  push(1.5, 0.0);  // dropped
  push(0.5, 0.5);

  const auto binned = bin_samples(g, series);
  CHECK(binned.dropped == 1);
  CHECK(binned.batches[0].velocities.cols() == 2);
  CHECK(binned.batches[3].velocities.cols() == 1);
  std::int64_t total = 0;
  for (const auto& b : binned.batches) total += b.velocities.cols();
  CHECK(total + binned.dropped == static_cast<std::int64_t>(series.trajectory.size()));
}

TEST_CASE("binning preserves time order within a batch") {
  const GridSpec g = grid2(1, 1);
  SignalSeries series;
  for (int k = 0; k < 5; ++k) {
    TrajectorySample s;
    s.t = k * 0.2;
    s.r = Eigen::Vector2d(0.1 * k - 0.2, 0.0);
    s.v = Eigen::Vector2d(k, 1.0);
    series.trajectory.push_back(std::move(s));
    series.signal.push_back(Eigen::Vector2d(k, -k));
  }
  const auto binned = bin_samples(g, series);
  const auto& batch = binned.batches[0];
  for (int k = 0; k < 5; ++k) {
    CHECK(batch.velocities(0, k) == k);
    CHECK(batch.signals(0, k) == k);
  }
}

TEST_CASE("identity velocities make the fit trivial") {
  CellBatch batch;
  batch.velocities = Eigen::Matrix2d::Identity();
  batch.signals.resize(2, 2);
  batch.signals << 1.0, 2.0, 3.0, 4.0;
  const auto fit = fit_cell(batch);
  REQUIRE(fit.has_value());
  CHECK((*fit - batch.signals).norm() <= 1e-14 * batch.signals.norm());
}

TEST_CASE("construct-then-fit recovers a planted matrix") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 30);
    auto batch = random_batch(rng, 2, m);
    Eigen::Matrix2d planted;
    planted << dist(rng), dist(rng), dist(rng), dist(rng);
    batch.signals = planted * batch.velocities;

    const auto fit = fit_cell(batch);
    REQUIRE(fit.has_value());
    CHECK((*fit - planted).norm() <= 1e-10 * std::max(1.0, planted.norm()));
  }
}

TEST_CASE("rank-deficient batches are rejected") {
  CellBatch parallel;
  parallel.velocities.resize(2, 2);
  parallel.velocities << 1.0, 2.0, 1.0, 2.0;  // two parallel columns
  parallel.signals = Eigen::Matrix2d::Identity();
  CHECK(!fit_cell(parallel).has_value());

  CellBatch tall = parallel;
  tall.velocities.resize(2, 1);
  tall.velocities << 1.0, 0.0;
  tall.signals.resize(2, 1);
  tall.signals << 1.0, 1.0;
  CHECK(!fit_cell(tall).has_value());  // fewer samples than dimensions

  CellBatch empty;
  empty.velocities.resize(2, 0);
  empty.signals.resize(2, 0);
  CHECK(!fit_cell(empty).has_value());
}

TEST_CASE("QR fit agrees with the normal-equations oracle") {
  std::mt19937_64 rng(19);
  int accepted = 0;
  while (accepted < 1000) {
    const int m = 3 + static_cast<int>(rng() % 20);
    const auto batch = random_batch(rng, 2, m);
    const Eigen::MatrixXd vvt =
        batch.velocities * batch.velocities.transpose();
    if (std::abs(vvt.determinant()) < 1e-6) continue;  // keep well-conditioned
    ++accepted;

    const auto fit = fit_cell(batch);
    REQUIRE(fit.has_value());
    // A (V V^T) = S V^T
    const Eigen::MatrixXd oracle =
        (vvt.transpose().ldlt().solve((batch.signals * batch.velocities.transpose()).transpose()))
            .transpose();
    CHECK((*fit - oracle).norm() <= 1e-10 * std::max(1.0, oracle.norm()));
  }
}

TEST_CASE("fitted matrix is a local optimum of the Frobenius residual") {
  std::mt19937_64 rng(29);
  const auto batch = random_batch(rng, 2, 12);
  const auto fit = fit_cell(batch);
  REQUIRE(fit.has_value());

  const double base = (*fit * batch.velocities - batch.signals).norm();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (double delta : {1e-4, -1e-4}) {
        Eigen::MatrixXd perturbed = *fit;
        perturbed(i, j) += delta;
        CHECK((perturbed * batch.velocities - batch.signals).norm() >= base - 1e-12);
      }
}

TEST_CASE("trace field assembly") {
  const GridSpec g = grid2(2, 2);
  std::vector<CellFit> fits(4);
  fits[0].matrix = Eigen::Matrix2d::Identity();
  fits[3].matrix = (Eigen::Matrix2d() << 2.0, 5.0, -1.0, 3.0).finished();

  const auto trace = trace_field(fits, g);
  CHECK(trace.values[0] == 2.0);
  CHECK(trace.mask[0] == 1);
  CHECK(trace.values[1] == 0.0);
  CHECK(trace.mask[1] == 0);
  CHECK(trace.values[3] == 5.0);

  // all unfitted -> zero field with all-false mask
  const auto empty = trace_field(std::vector<CellFit>(4), g);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(empty.values[i] == 0.0);
    CHECK(empty.mask[i] == 0);
  }
}

TEST_CASE("noiseless pipeline trace matches the grid convolution at desk scale") {
  const GridSpec g = grid2(16, 16);
  const KernelSpec spec{2, 0.05};
  const auto rho = phantom(g, {Shape::ball(Eigen::Vector2d(-0.1, 0.1), 0.55, 1.0)});

  TrajectoryConfig traj;
  traj.n = 2;
  traj.m = {17, 18, 1};
  traj.samples = 20 * 16 * 16;
  const auto signal = synthesize_signal(rho, spec, sample_trajectory(traj));
  const auto fit = fit_trace_field(g, signal);
  CHECK(fit.unfitted_cells == 0);

  const KhOperator kh(g, spec);
  const auto reference = kh.apply(rho.values);
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    if (!fit.trace.mask[i]) continue;
    const double d = fit.trace.values[i] - reference[i];
    diff += d * d;
    ref += reference[i] * reference[i];
  }
  // floor is the within-cell position spread: with cells 2.5h wide the
  // least-squares average differs from the center value at the percent level
  CHECK(std::sqrt(diff / ref) <= 2e-2);
}
