#include "qchaos/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace qchaos::io {

std::string raster_text(const Raster& r) {
  std::ostringstream os;
  os.precision(17);
  os << r.nx << ' ' << r.ny << ' ' << r.lo.x << ' ' << r.lo.y << ' ' << r.hi.x
     << ' ' << r.hi.y << '\n';
  for (int iy = 0; iy < r.ny; ++iy) {
    for (int ix = 0; ix < r.nx; ++ix) {
      if (ix) os << ' ';
      os << r.at(ix, iy);
    }
    os << '\n';
  }
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path())
    std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InvalidParameterError("cannot open for writing: " + path);
  out << content;
  if (!out) throw InvalidParameterError("write failed: " + path);
}

}  // namespace qchaos::io
