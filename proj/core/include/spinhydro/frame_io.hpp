#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "spinhydro/propagator.hpp"

namespace spinhydro {

/// Binary frame container, all integers and floats little-endian:
///
///   offset  size  field
///   0       8     magic "SPHYFRM1"
///   8       4     u32 dims
///   12      4     u32 n (points per axis)
///   16      8     f64 extent
///   24      8     f64 mass
///   32      8     f64 dt_field
///   40      8     u64 frame count
///   48      ...   per frame, n^dims samples of (f64 re, f64 im), axis 0 fastest
///
/// Samples are rounded to float64 on write.
struct StoredFrames {
  Grid grid;
  Real mass;
  Real dt_field;
  std::vector<ComplexField> frames;

  /// Rebuilds a FrameSequence; the potential is not part of the container.
  FrameSequence to_sequence(const Potential& potential) const;
};

inline constexpr char kFrameMagic[8] = {'S', 'P', 'H', 'Y', 'F', 'R', 'M', '1'};

void write_frames(const FrameSequence& frames, const std::filesystem::path& path);
StoredFrames read_frames(const std::filesystem::path& path);

}  // namespace spinhydro
