#include "driftscope/dgf.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "driftscope/error.hpp"

namespace driftscope {

namespace {

constexpr std::array<char, 4> kMagic{'D', 'G', 'F', '1'};

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U bits = std::bit_cast<U>(value);
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t b = 0; b < sizeof(T); ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xFFu);
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw DataError("DGF1: truncated file");
  U bits = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) bits |= static_cast<U>(bytes[b]) << (8 * b);
  return std::bit_cast<T>(bits);
}

}  // namespace

void write_dgf(std::ostream& out, const ScalarField& field) {
  const Grid& g = field.grid();
  out.write(kMagic.data(), kMagic.size());
  put_le(out, static_cast<std::uint32_t>(g.nx()));
  put_le(out, static_cast<std::uint32_t>(g.ny()));
  put_le(out, g.x0());
  put_le(out, g.y0());
  put_le(out, g.dx());
  put_le(out, g.dy());
  for (double v : field.values()) put_le(out, v);
  if (!out) throw DataError("DGF1: write failed");
}

void write_dgf(const std::filesystem::path& path, const ScalarField& field) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("DGF1: cannot open " + path.string() + " for writing");
  write_dgf(out, field);
}

ScalarField read_dgf(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw DataError("DGF1: bad magic");
  const auto nx = get_le<std::uint32_t>(in);
  const auto ny = get_le<std::uint32_t>(in);
  const double x0 = get_le<double>(in);
  const double y0 = get_le<double>(in);
  const double dx = get_le<double>(in);
  const double dy = get_le<double>(in);
  Grid grid(x0, y0, dx, dy, nx, ny);
  std::vector<double> values(grid.size());
  for (auto& v : values) v = get_le<double>(in);
  return ScalarField(grid, std::move(values));
}

ScalarField read_dgf(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("DGF1: cannot open " + path.string());
  return read_dgf(in);
}

}  // namespace driftscope
