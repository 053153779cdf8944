#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>

#include "spinhydro/csv.hpp"
#include "spinhydro/frame_io.hpp"
#include "spinhydro/harness/runner.hpp"
#include "spinhydro/harness/svg.hpp"
#include "spinhydro/hydro.hpp"

namespace spinhydro::harness {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("missing output: " + path.string() + " (run the scenario first)");
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("malformed " + path.string() + ": " + e.what());
  }
}

std::string frame_tag(std::size_t j) {
  std::ostringstream os;
  os << std::setw(4) << std::setfill('0') << j;
  return os.str();
}

// Whitespace-separated columns with a commented header line.
class DatWriter {
 public:
  DatWriter(const fs::path& path, const std::vector<std::string>& columns, const std::string& comment = {})
      : out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot write " + path.string());
    if (!comment.empty()) out_ << "# " << comment << "\n";
    out_ << "#";
    for (const auto& c : columns) out_ << " " << c;
    out_ << "\n";
  }
  void row(const std::vector<Real>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? " " : "") << format_number(values[i]);
    out_ << "\n";
  }
  void blank() { out_ << "\n"; }

 private:
  std::ofstream out_;
};

std::vector<std::vector<double>> read_csv_columns(const fs::path& path, std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw FormatError("missing output: " + path.string());
  std::string line;
  std::getline(in, line);
  header.clear();
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) header.push_back(cell);
  std::vector<std::vector<double>> cols(header.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::size_t c = 0;
    for (std::string cell; std::getline(ls, cell, ',') && c < cols.size(); ++c) cols[c].push_back(std::stod(cell));
  }
  return cols;
}

void profiles(const fs::path& dir, const fs::path& plots, const json& meta, std::vector<fs::path>& written) {
  const auto stored = read_frames(dir / "frames.bin");
  const Real mass = meta.at("mass").get<double>();
  const auto s = meta.at("spin");
  const SpinVector spin = SpinVector::normalized({s[0].get<double>(), s[1].get<double>(), s[2].get<double>()});
  HydroOptions opt;
  opt.backend = meta.at("backend").get<std::string>() == "fd2" ? Backend::fd2 : Backend::spectral;
  opt.node_epsilon = meta.at("node_epsilon").get<double>();
  const Grid& grid = stored.grid;

  for (const auto& jv : meta.at("hydro_frames")) {
    const auto j = jv.get<std::size_t>();
    if (j >= stored.frames.size()) throw FormatError("frames.json lists frame " + std::to_string(j) + " beyond frames.bin");
    const auto h = extract_hydro(stored.frames[j], mass, spin, opt);
    const Real t = stored.dt_field * static_cast<Real>(j);
    const fs::path dat = plots / ("profile_" + frame_tag(j) + ".dat");
    if (grid.dims() == 1) {
      DatWriter w(dat, {"x", "rho", "Q_amp", "Q_kin", "v_B_x", "v_S_x", "v_total_x", "v_total_y", "v_total_z", "mask"},
                  "t = " + format_number(t));
      SvgSeries rho{"rho", {}, {}}, qa{"Q_amp", {}, {}}, qk{"Q_kin", {}, {}}, vb{"v_B", {}, {}}, vs{"v_S", {}, {}};
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const Real x = grid.coordinate(static_cast<int>(i));
        w.row({x, h.rho[i], h.Q_amp[i], h.Q_kin[i], h.v_B[i].x, h.v_S[i].x, h.v_total[i].x, h.v_total[i].y,
               h.v_total[i].z, Real(h.nodal_mask[i])});
        const double nan = std::numeric_limits<double>::quiet_NaN();
        const bool m = h.nodal_mask[i];
        rho.x.push_back(double(x));
        rho.y.push_back(double(h.rho[i]));
        for (auto* sr : {&qa, &qk, &vb, &vs}) sr->x.push_back(double(x));
        qa.y.push_back(m ? nan : double(h.Q_amp[i]));
        qk.y.push_back(m ? nan : double(h.Q_kin[i]));
        vb.y.push_back(m ? nan : double(h.v_B[i].x));
        vs.y.push_back(m ? nan : double(h.v_S[i].x));
      }
      written.push_back(dat);
      const std::string when = " at t = " + format_number(t);
      SvgLinePlot pr("density" + when, "x", "rho");
      pr.add(std::move(rho));
      pr.write(plots / ("profile_" + frame_tag(j) + "_rho.svg"));
      SvgLinePlot pq("quantum potential (off-nodal)" + when, "x", "Q");
      pq.add(std::move(qa));
      pq.add(std::move(qk));
      pq.write(plots / ("profile_" + frame_tag(j) + "_q.svg"));
      SvgLinePlot pv("velocities (off-nodal)" + when, "x", "v");
      pv.add(std::move(vb));
      pv.add(std::move(vs));
      pv.write(plots / ("profile_" + frame_tag(j) + "_v.svg"));
      for (const char* suffix : {"_rho.svg", "_q.svg", "_v.svg"}) {
        written.push_back(plots / ("profile_" + frame_tag(j) + suffix));
      }
    } else {
      DatWriter w(dat,
                  {"x", "y", "rho", "Q_amp", "Q_kin", "v_B_x", "v_B_y", "v_S_x", "v_S_y", "v_total_x", "v_total_y",
                   "v_total_z", "mask"},
                  "t = " + format_number(t) + "; blank line between y rows");
      for (int i1 = 0; i1 < grid.n(); ++i1) {
        for (int i0 = 0; i0 < grid.n(); ++i0) {
          const std::size_t i = grid.index(i0, i1);
          w.row({grid.coordinate(i0), grid.coordinate(i1), h.rho[i], h.Q_amp[i], h.Q_kin[i], h.v_B[i].x, h.v_B[i].y,
                 h.v_S[i].x, h.v_S[i].y, h.v_total[i].x, h.v_total[i].y, h.v_total[i].z, Real(h.nodal_mask[i])});
        }
        w.blank();
      }
      written.push_back(dat);
    }
  }
}

void trajectory_traces(const fs::path& dir, const fs::path& plots, const json& meta, std::vector<fs::path>& written) {
  const auto count = meta.value("trajectory_count", std::size_t{0});
  if (count == 0) return;
  SvgLinePlot total("trajectories: total position", "t", "x_total");
  SvgLinePlot internal("trajectories: internal displacement", "t", "x_int (y component)");
  for (std::size_t k = 0; k < count; ++k) {
    std::ostringstream tag;
    tag << std::setw(2) << std::setfill('0') << k;
    std::vector<std::string> header;
    const auto cols = read_csv_columns(dir / ("trajectory_" + tag.str() + ".csv"), header);
    const fs::path dat = plots / ("trajectory_" + tag.str() + ".dat");
    DatWriter w(dat, header);
    const std::size_t rows = cols.empty() ? 0 : cols[0].size();
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<Real> row;
      for (const auto& c : cols) row.push_back(c[r]);
      w.row(row);
    }
    written.push_back(dat);
    auto col = [&](const std::string& name) -> const std::vector<double>& {
      for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == name) return cols[c];
      throw FormatError("trajectory CSV lacks column " + name);
    };
    total.add({"#" + tag.str(), col("time"), col("x_total_x")});
    internal.add({"#" + tag.str(), col("time"), col("x_int_y")});
  }
  total.write(plots / "trajectories_x.svg");
  internal.write(plots / "trajectories_internal.svg");
  written.push_back(plots / "trajectories_x.svg");
  written.push_back(plots / "trajectories_internal.svg");
}

void tv_series(const fs::path& dir, const fs::path& plots, const json& meta, std::vector<fs::path>& written) {
  const auto modes = meta.value("ensemble_modes", json::array());
  if (modes.empty()) return;
  SvgLinePlot plot("ensemble vs density: total variation", "t", "TV");
  for (const auto& m : modes) {
    const auto mode = m.get<std::string>();
    const auto e = read_json(dir / ("ensemble_" + mode + ".json"));
    const auto times = e.at("times").get<std::vector<double>>();
    const auto tv = e.at("tv").get<std::vector<double>>();
    const fs::path dat = plots / ("tv_" + mode + ".dat");
    DatWriter w(dat, {"time", "tv"}, "mode " + mode + ", n = " + std::to_string(e.at("n").get<std::size_t>()));
    for (std::size_t i = 0; i < times.size(); ++i) w.row({times[i], tv[i]});
    written.push_back(dat);
    plot.add({mode, times, tv});
  }
  plot.write(plots / "tv.svg");
  written.push_back(plots / "tv.svg");
}

}  // namespace

std::vector<fs::path> emit_plots(const fs::path& out_dir) {
  if (!fs::is_directory(out_dir)) {
    throw FormatError("missing output directory: " + out_dir.string());
  }
  const auto meta = read_json(out_dir / "frames.json");
  const fs::path plots = out_dir / "plots";
  fs::create_directories(plots);
  std::vector<fs::path> written;
  profiles(out_dir, plots, meta, written);
  trajectory_traces(out_dir, plots, meta, written);
  tv_series(out_dir, plots, meta, written);
  return written;
}

}  // namespace spinhydro::harness
