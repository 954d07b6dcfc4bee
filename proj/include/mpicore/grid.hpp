#ifndef MPICORE_GRID_HPP
#define MPICORE_GRID_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace mpicore {

using MultiIndex = std::array<int, 3>;  // unused trailing axes are 0

/// Regular grid over the nondimensional field of view [-1,1]^n.
/// Cell centers sit at -1 + (i + 1/2) * delta_j with delta_j = 2/N_j.
struct GridSpec {
  int n = 2;
  std::array<int, 3> shape = {1, 1, 1};  // N_1..N_n, trailing axes 1

  void validate() const;

  std::int64_t cell_count() const;
  double delta(int axis) const { return 2.0 / shape[axis]; }
  double cell_volume() const;

  // Row-major with axis 0 slowest.
  std::int64_t flat_index(const MultiIndex& idx) const;
  MultiIndex unflatten(std::int64_t flat) const;

  bool operator==(const GridSpec&) const = default;
};

/// Center coordinates of a cell. Throws std::out_of_range for bad indices.
Eigen::VectorXd cell_center(const GridSpec& grid, const MultiIndex& idx);

/// Floor-based binning; the upper FOV boundary +1 belongs to the last cell.
/// Points outside [-1,1]^n map to nullopt.
std::optional<MultiIndex> locate_cell(const GridSpec& grid, const Eigen::VectorXd& point);

struct DensityField {
  GridSpec grid;
  std::vector<double> values;  // length grid.cell_count()

  static DensityField zero(const GridSpec& grid);
};

struct TraceField {
  GridSpec grid;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;  // 1 = fitted; masked-out cells carry value 0

  static TraceField zero(const GridSpec& grid);
};

///// Phantom primitives: disk/ball and axis-aligned rectangle/box,
/// amplitudes add where primitives overlap.
struct Shape {
  enum class Kind { Ball, Box } kind;
  Eigen::VectorXd center;  // Ball
  double radius = 0.0;     // Ball
  Eigen::VectorXd lo, hi;  // Box corners
  double amplitude = 0.0;

  static Shape ball(Eigen::VectorXd center, double radius, double amplitude);
  static Shape box(Eigen::VectorXd lo, Eigen::VectorXd hi, double amplitude);

  bool contains(const Eigen::VectorXd& point) const;
};

DensityField phantom(const GridSpec& grid, const std::vector<Shape>& shapes);

/// ||a - b||_2 / ||b||_2, falling back to ||a||_2 when b vanishes.
double relative_error(const DensityField& a, const DensityField& b);

/// Physical scanner/particle parameters (SI units; M_sat and g are stored
/// after division by mu_0, i.e. in A/m and A/m^2).
struct PhysicalParams {
  double k_b = 1.38e-23;       // Boltzmann constant, Nm/K
  double mu_0 = 4e-7 * 3.14159265358979323846;  // vacuum permeability, N/A^2
  double temperature = 310.0;  // K
  double m_sat = 0.6 / (4e-7 * 3.14159265358979323846);  // A/m
  double diameter = 30e-9;     // particle diameter, m
  double gradient = 5.5 / (4e-7 * 3.14159265358979323846);  // A/m^2
  double l_fov = 20e-3;        // field-of-view length, m

  void validate() const;
};

/// Dimensionless resolution parameter h = H_sat / (g L) with
/// H_sat = k_b T / (mu_0 M_sat (pi/6) d^3).
double resolution_param(const PhysicalParams& p);

}  // namespace mpicore

#endif
