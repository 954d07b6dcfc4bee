#ifndef MPICORE_IO_HPP
#define MPICORE_IO_HPP

#include <iosfwd>
#include <string>

#include "mpicore/forward.hpp"
#include "mpicore/grid.hpp"
#include "mpicore/trace_fit.hpp"

namespace mpicore {

/// Field CSV: header line `# grid: n=<n> shape=<N1>x<N2>[x<N3>]`, then one
/// value per line in flat grid order. Values use 17 significant digits so
/// the round trip is bit exact.
void write_field(std::ostream& out, const DensityField& field);
void write_field(const std::string& path, const DensityField& field);
DensityField read_field(std::istream& in);
DensityField read_field(const std::string& path);

void write_trace(const std::string& path, const TraceField& field);

/// Trajectory + signal CSV: header `t,r1..rn,v1..vn,s1..sn`, one sample per
/// row in time order.
void write_signal(std::ostream& out, const SignalSeries& signal);
void write_signal(const std::string& path, const SignalSeries& signal);
SignalSeries read_signal(std::istream& in);
SignalSeries read_signal(const std::string& path);

/// Per-cell fit diagnostics CSV: `cell_index, sample_count, rank, fitted`.
void write_fit_diagnostics(const std::string& path, const GridSpec& grid,
                           const TraceFitResult& result);

/// 8-bit P2 portable graymap; values mapped linearly from [min, max] of the
/// field, recorded in a comment line so the mapping is invertible.
void write_pgm(const std::string& path, const DensityField& field);

}  // namespace mpicore

#endif
