// Small shared output helpers: scalar rasters over a bounding box, and
// plain file writing for the CLI's CSV/JSON emission.
#pragma once

#include <string>
#include <vector>

#include "qchaos/common.hpp"

namespace qchaos::io {

/// Scalar field sampled on a regular nx-by-ny lattice over [lo, hi].
/// Sample (ix, iy) sits at lo + ((ix+1/2)/nx, (iy+1/2)/ny)*(hi-lo)
/// (cell centers), stored row-major with ix fastest.
struct Raster {
  int nx = 0;
  int ny = 0;
  Vec2 lo;
  Vec2 hi;
  std::vector<double> values;

  double at(int ix, int iy) const { return values[std::size_t(iy) * nx + ix]; }
  double& at(int ix, int iy) { return values[std::size_t(iy) * nx + ix]; }
  Vec2 center(int ix, int iy) const {
    return {lo.x + (ix + 0.5) / nx * (hi.x - lo.x),
            lo.y + (iy + 0.5) / ny * (hi.y - lo.y)};
  }
};

/// Plain-text raster: one header line "nx ny xlo ylo xhi yhi", then ny
/// rows of nx space-separated values (rows from low y to high y).
std::string raster_text(const Raster& r);

/// Writes content to path, creating parent directories as needed.
/// Throws InvalidParameterError when the path cannot be written.
void write_file(const std::string& path, const std::string& content);

}  // namespace qchaos::io
