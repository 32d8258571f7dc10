#pragma once

#include <filesystem>
#include <iosfwd>

#include "driftscope/fields.hpp"

namespace driftscope {

// DGF1 binary grid format (all little-endian):
//   bytes 0-3  magic "DGF1"
//   u32 nx, u32 ny
//   f64 x0, y0, dx, dy
//   nx*ny f64 values, row-major (x fastest)
void write_dgf(std::ostream& out, const ScalarField& field);
void write_dgf(const std::filesystem::path& path, const ScalarField& field);
ScalarField read_dgf(std::istream& in);
ScalarField read_dgf(const std::filesystem::path& path);

}  // namespace driftscope
