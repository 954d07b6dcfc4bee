#include "mpicore/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace mpicore {

void GridSpec::validate() const {
  if (n < 1 || n > 3) throw std::invalid_argument("GridSpec: n must be 1, 2 or 3");
  for (int a = 0; a < n; ++a)
    if (shape[a] < 1) throw std::invalid_argument("GridSpec: cell counts must be positive");
  for (int a = n; a < 3; ++a)
    if (shape[a] != 1) throw std::invalid_argument("GridSpec: unused axes must have extent 1");
}

std::int64_t GridSpec::cell_count() const {
  std::int64_t c = 1;
  for (int a = 0; a < n; ++a) c *= shape[a];
  return c;
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < n; ++a) v *= delta(a);
  return v;
}

std::int64_t GridSpec::flat_index(const MultiIndex& idx) const {
  std::int64_t flat = 0;
  for (int a = 0; a < n; ++a) {
    if (idx[a] < 0 || idx[a] >= shape[a])
      throw std::out_of_range("GridSpec: cell index out of range");
    flat = flat * shape[a] + idx[a];
  }
  return flat;
}

MultiIndex GridSpec::unflatten(std::int64_t flat) const {
  MultiIndex idx = {0, 0, 0};
  for (int a = n - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % shape[a]);
    flat /= shape[a];
  }
  return idx;
}

Eigen::VectorXd cell_center(const GridSpec& grid, const MultiIndex& idx) {
  Eigen::VectorXd c(grid.n);
  for (int a = 0; a < grid.n; ++a) {
    if (idx[a] < 0 || idx[a] >= grid.shape[a])
      throw std::out_of_range("cell_center: index out of range");
    c[a] = -1.0 + (idx[a] + 0.5) * grid.delta(a);
  }
  return c;
}

std::optional<MultiIndex> locate_cell(const GridSpec& grid, const Eigen::VectorXd& point) {
  MultiIndex idx = {0, 0, 0};
  for (int a = 0; a < grid.n; ++a) {
    const double x = point[a];
    if (x < -1.0 || x > 1.0) return std::nullopt;
    int i = static_cast<int>(std::floor((x + 1.0) / grid.delta(a)));
    if (i == grid.shape[a]) i = grid.shape[a] - 1;  // closed upper edge
    idx[a] = i;
  }
  return idx;
}

DensityField DensityField::zero(const GridSpec& grid) {
  grid.validate();
  return {grid, std::vector<double>(static_cast<std::size_t>(grid.cell_count()), 0.0)};
}

TraceField TraceField::zero(const GridSpec& grid) {
  grid.validate();
  const auto c = static_cast<std::size_t>(grid.cell_count());
  return {grid, std::vector<double>(c, 0.0), std::vector<std::uint8_t>(c, 0)};
}

Shape Shape::ball(Eigen::VectorXd center, double radius, double amplitude) {
  if (radius < 0.0 || amplitude < 0.0)
    throw std::invalid_argument("Shape::ball: radius and amplitude must be >= 0");
  Shape s;
  s.kind = Kind::Ball;
  s.center = std::move(center);
  s.radius = radius;
  s.amplitude = amplitude;
  return s;
}

Shape Shape::box(Eigen::VectorXd lo, Eigen::VectorXd hi, double amplitude) {
  if (amplitude < 0.0) throw std::invalid_argument("Shape::box: amplitude must be >= 0");
  Shape s;
  s.kind = Kind::Box;
  s.lo = std::move(lo);
  s.hi = std::move(hi);
  s.amplitude = amplitude;
  return s;
}

bool Shape::contains(const Eigen::VectorXd& point) const {
  if (kind == Kind::Ball) return (point - center).norm() < radius;
  for (Eigen::Index a = 0; a < point.size(); ++a)
    if (point[a] < lo[a] || point[a] > hi[a]) return false;
  return true;
}

DensityField phantom(const GridSpec& grid, const std::vector<Shape>& shapes) {
  auto field = DensityField::zero(grid);
  const auto count = grid.cell_count();
  for (std::int64_t i = 0; i < count; ++i) {
    const auto c = cell_center(grid, grid.unflatten(i));
    double v = 0.0;
    for (const auto& s : shapes)
      if (s.contains(c)) v += s.amplitude;
    field.values[static_cast<std::size_t>(i)] = v;
  }
  return field;
}

double relative_error(const DensityField& a, const DensityField& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("relative_error: grid mismatch");
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    diff += d * d;
    ref += b.values[i] * b.values[i];
  }
  if (ref == 0.0) {
    double na = 0.0;
    for (double v : a.values) na += v * v;
    return std::sqrt(na);
  }
  return std::sqrt(diff / ref);
}

void PhysicalParams::validate() const {
  if (!(k_b > 0 && mu_0 > 0 && temperature > 0 && m_sat > 0 && gradient > 0 && l_fov > 0))
    throw std::invalid_argument("PhysicalParams: all parameters must be positive");
  if (diameter < 1e-9 || diameter > 1e-6)
    throw std::invalid_argument("PhysicalParams: particle diameter outside sanity window");
}

double resolution_param(const PhysicalParams& p) {
  p.validate();
  constexpr double pi = 3.14159265358979323846;
  const double volume = pi / 6.0 * p.diameter * p.diameter * p.diameter;
  const double h_sat = p.k_b * p.temperature / (p.mu_0 * p.m_sat * volume);
  return h_sat / (p.gradient * p.l_fov);
}

}  // namespace mpicore
