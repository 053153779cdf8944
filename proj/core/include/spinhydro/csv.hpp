#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "spinhydro/hydro.hpp"
#include "spinhydro/trajectory.hpp"

namespace spinhydro {

/// Shortest round-trip decimal form of the value rounded to double.
std::string format_number(Real value);

/// Comma-separated writer; rows are validated against the header width.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);
  void row(const std::vector<Real>& values);

 private:
  std::ostream& out_;
  std::size_t width_;
};

/// One row per grid point: x[,y], rho, v_B(3), v_S(3), Q_amp, Q_kin, J(3), mask.
void write_hydro_csv(std::ostream& out, const HydroFields& hydro);
void write_hydro_csv(const std::filesystem::path& path, const HydroFields& hydro);

/// time, x_total(3), x_ext(3), x_int(3), v_total(3), nodal.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory);

}  // namespace spinhydro
