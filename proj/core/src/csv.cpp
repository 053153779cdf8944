#include "spinhydro/csv.hpp"

#include <charconv>
#include <fstream>

namespace spinhydro {
namespace {

std::ofstream open(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error("cannot open for writing: " + path.string());
  }
  return out;
}

void push(std::vector<Real>& row, const Vec3& v) {
  row.push_back(v.x);
  row.push_back(v.y);
  row.push_back(v.z);
}

std::vector<std::string> vec_columns(const std::string& name) { return {name + "_x", name + "_y", name + "_z"}; }

template <typename... Lists>
std::vector<std::string> concat(Lists&&... lists) {
  std::vector<std::string> out;
  (out.insert(out.end(), lists.begin(), lists.end()), ...);
  return out;
}

}  // namespace

std::string format_number(Real value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), static_cast<double>(value));
  return std::string(buffer, result.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header) : out_(out), width_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    out_ << (i ? "," : "") << header[i];
  }
  out_ << '\n';
}

void CsvWriter::row(const std::vector<Real>& values) {
  if (values.size() != width_) {
    throw PreconditionError("csv row width does not match header");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    out_ << (i ? "," : "") << format_number(values[i]);
  }
  out_ << '\n';
}

void write_hydro_csv(std::ostream& out, const HydroFields& hydro) {
  const Grid& grid = hydro.rho.grid();
  std::vector<std::string> coords{"x"};
  if (grid.dims() == 2) {
    coords.push_back("y");
  }
  CsvWriter csv(out, concat(coords, std::vector<std::string>{"rho"}, vec_columns("v_B"), vec_columns("v_S"),
                            std::vector<std::string>{"Q_amp", "Q_kin"}, vec_columns("J"),
                            std::vector<std::string>{"mask"}));
  std::vector<Real> row;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    row.clear();
    const Vec3 p = grid.position(i);
    row.push_back(p.x);
    if (grid.dims() == 2) {
      row.push_back(p.y);
    }
    row.push_back(hydro.rho[i]);
    push(row, hydro.v_B[i]);
    push(row, hydro.v_S[i]);
    row.push_back(hydro.Q_amp[i]);
    row.push_back(hydro.Q_kin[i]);
    push(row, hydro.J[i]);
    row.push_back(hydro.nodal_mask[i]);
    csv.row(row);
  }
}

void write_hydro_csv(const std::filesystem::path& path, const HydroFields& hydro) {
  auto out = open(path);
  write_hydro_csv(out, hydro);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  CsvWriter csv(out, concat(std::vector<std::string>{"time"}, vec_columns("x_total"), vec_columns("x_ext"),
                            vec_columns("x_int"), vec_columns("v_total"), std::vector<std::string>{"nodal"}));
  std::vector<Real> row;
  for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
    row.clear();
    row.push_back(trajectory.times[k]);
    push(row, trajectory.x_total[k]);
    push(row, trajectory.x_ext[k]);
    push(row, trajectory.x_int[k]);
    push(row, trajectory.v_total[k]);
    row.push_back(trajectory.nodal_flag[k]);
    csv.row(row);
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory) {
  auto out = open(path);
  write_trajectory_csv(out, trajectory);
}

}  // namespace spinhydro
