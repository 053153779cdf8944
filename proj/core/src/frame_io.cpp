#include "spinhydro/frame_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace spinhydro {
namespace {

static_assert(std::endian::native == std::endian::little, "frame container assumes a little-endian host");

template <typename T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::filesystem::path& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw FormatError("truncated frame container: " + path.string());
  }
  return value;
}

}  // namespace

FrameSequence StoredFrames::to_sequence(const Potential& potential) const {
  if (!(potential.grid() == grid)) {
    throw PreconditionError("potential grid does not match stored frames");
  }
  return FrameSequence(mass, potential, dt_field, frames);
}

void write_frames(const FrameSequence& frames, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot open for writing: " + path.string());
  }
  const Grid& grid = frames.grid();
  out.write(kFrameMagic, sizeof(kFrameMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.dims()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.n()));
  put<double>(out, static_cast<double>(grid.extent()));
  put<double>(out, static_cast<double>(frames.mass()));
  put<double>(out, static_cast<double>(frames.dt_field()));
  put<std::uint64_t>(out, frames.size());
  std::vector<double> buffer(2 * grid.size());
  for (const auto& frame : frames.frames()) {
    for (std::size_t i = 0; i < frame.size(); ++i) {
      buffer[2 * i] = static_cast<double>(frame[i].real());
      buffer[2 * i + 1] = static_cast<double>(frame[i].imag());
    }
    out.write(reinterpret_cast<const char*>(buffer.data()), static_cast<std::streamsize>(buffer.size() * sizeof(double)));
  }
  if (!out) {
    throw Error("write failed: " + path.string());
  }
}

StoredFrames read_frames(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open frame container: " + path.string());
  }
  char magic[sizeof(kFrameMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kFrameMagic, sizeof(magic)) != 0) {
    throw FormatError("bad frame container magic: " + path.string());
  }
  const auto dims = get<std::uint32_t>(in, path);
  const auto n = get<std::uint32_t>(in, path);
  const auto extent = get<double>(in, path);
  const auto mass = get<double>(in, path);
  const auto dt_field = get<double>(in, path);
  const auto count = get<std::uint64_t>(in, path);
  if (count == 0 || count > (1ULL << 32)) {
    throw FormatError("implausible frame count in " + path.string());
  }
  Grid grid = [&] {
    try {
      return make_grid(static_cast<int>(dims), static_cast<int>(n), extent);
    } catch (const PreconditionError& e) {
      throw FormatError(std::string("bad grid header: ") + e.what());
    }
  }();
  StoredFrames out{grid, mass, dt_field, {}};
  out.frames.reserve(count);
  std::vector<double> buffer(2 * grid.size());
  for (std::uint64_t j = 0; j < count; ++j) {
    if (!in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size() * sizeof(double)))) {
      throw FormatError("truncated frame data in " + path.string());
    }
    std::vector<Complex> values(grid.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] = Complex(buffer[2 * i], buffer[2 * i + 1]);
    }
    out.frames.emplace_back(grid, std::move(values));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes in frame container " + path.string());
  }
  return out;
}

}  // namespace spinhydro
