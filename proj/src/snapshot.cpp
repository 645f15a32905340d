#include "eklab/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>

namespace eklab {

namespace {

static_assert(std::endian::native == std::endian::little, "snapshot IO assumes a little-endian host");

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw Error(ErrorKind::io, "truncated snapshot");
  return v;
}

void write_header(std::ostream& os, const Grid& g, bool complex_values) {
  os.write("EKFS", 4);
  put<std::uint32_t>(os, 1);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.kind()));
  put<std::uint32_t>(os, complex_values ? 1 : 0);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.dim()));
  for (int a = 0; a < g.dim(); ++a) put<std::uint64_t>(os, g.points(a));
  for (int a = 0; a < g.dim(); ++a) put<double>(os, g.length(a));
  for (int a = 0; a < g.dim(); ++a) put<double>(os, g.spacing(a));
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream os(path, mode);
  if (!os) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  return os;
}

void write_coords(std::ostream& os, const Grid& g, std::size_t i) {
  if (g.dim() == 1) {
    os << g.coordinate(0, i);
  } else {
    const std::size_t ny = g.points(1);
    os << g.coordinate(0, i / ny) << ',' << g.coordinate(1, i % ny);
  }
}

const char* coord_header(const Grid& g) { return g.dim() == 1 ? "x" : "x,y"; }

}  // namespace

void write_snapshot(const std::filesystem::path& path, const ScalarField& f) {
  auto os = open_out(path, std::ios::binary);
  write_header(os, f.grid(), false);
  for (double v : f.values()) put<double>(os, v);
}

void write_snapshot(const std::filesystem::path& path, const ComplexField& f) {
  auto os = open_out(path, std::ios::binary);
  write_header(os, f.grid(), true);
  for (const auto& v : f.values()) {
    put<double>(os, v.real());
    put<double>(os, v.imag());
  }
}

std::variant<ScalarField, ComplexField> read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::io, "cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "EKFS", 4) != 0) throw Error(ErrorKind::io, "not a field snapshot: " + path.string());
  if (get<std::uint32_t>(is) != 1) throw Error(ErrorKind::io, "unsupported snapshot version");
  const auto kind = static_cast<GridKind>(get<std::uint32_t>(is));
  const bool is_complex = get<std::uint32_t>(is) != 0;
  const auto dims = get<std::uint32_t>(is);
  if (dims < 1 || dims > 2) throw Error(ErrorKind::io, "bad dimension count");
  std::size_t pts[2]{1, 1};
  double len[2]{0, 0};
  for (std::uint32_t a = 0; a < dims; ++a) pts[a] = get<std::uint64_t>(is);
  for (std::uint32_t a = 0; a < dims; ++a) len[a] = get<double>(is);
  for (std::uint32_t a = 0; a < dims; ++a) (void)get<double>(is);
  Grid g = kind == GridKind::periodic_1d   ? Grid::periodic1d(len[0], pts[0])
           : kind == GridKind::periodic_2d ? Grid::periodic2d(len[0], len[1], pts[0], pts[1])
           : kind == GridKind::halfline_1d ? Grid::halfline(len[0], pts[0])
                                           : throw Error(ErrorKind::io, "unknown grid kind");
  if (is_complex) {
    ComplexField f(g);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double re = get<double>(is);
      f[i] = Complex(re, get<double>(is));
    }
    return f;
  }
  ScalarField f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = get<double>(is);
  return f;
}

void write_csv(const std::filesystem::path& path, const ScalarField& f) {
  auto os = open_out(path, std::ios::out);
  os << std::setprecision(17) << coord_header(f.grid()) << ",value\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    write_coords(os, f.grid(), i);
    os << ',' << f[i] << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const ComplexField& f) {
  auto os = open_out(path, std::ios::out);
  os << std::setprecision(17) << coord_header(f.grid()) << ",re,im\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    write_coords(os, f.grid(), i);
    os << ',' << f[i].real() << ',' << f[i].imag() << '\n';
  }
}

}  // namespace eklab
