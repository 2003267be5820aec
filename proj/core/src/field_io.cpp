#include "wavecoder/field_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

namespace wavecoder {

namespace {

static_assert(std::endian::native == std::endian::little,
              "field format I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const char* what) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw FormatError(std::string("field: truncated while reading ") + what);
  }
  return v;
}

}  // namespace

void write_field(std::ostream& os, const ComplexField& field) {
  os.write("WFLD", 4);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(field.grid.n));
  put<double>(os, field.grid.dx);
  put<double>(os, field.grid.wavelength);
  for (const auto& v : field.values.data) {
    put<double>(os, v.real());
    put<double>(os, v.imag());
  }
}

ComplexField read_field(std::istream& is) {
  char magic[4] = {};
  if (!is.read(magic, 4) || std::memcmp(magic, "WFLD", 4) != 0) {
    throw FormatError("field: bad magic, expected WFLD");
  }
  const auto n = get<std::uint32_t>(is, "n");
  const auto dx = get<double>(is, "dx");
  const auto wavelength = get<double>(is, "wavelength");
  Grid grid;
  try {
    grid = make_grid(n, dx, wavelength);
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("field: invalid header: ") + e.what());
  }
  ComplexField field(grid);
  std::vector<double> raw(2 * static_cast<std::size_t>(n) * n);
  if (!is.read(reinterpret_cast<char*>(raw.data()),
               static_cast<std::streamsize>(raw.size() * sizeof(double)))) {
    throw FormatError("field: truncated sample data");
  }
  for (std::size_t k = 0; k < field.values.size(); ++k) {
    field.values[k] = Complex(raw[2 * k], raw[2 * k + 1]);
  }
  return field;
}

void save_field(const std::filesystem::path& path, const ComplexField& field) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_field(os, field);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

ComplexField load_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_field(is);
}

ComplexField real_to_field(const Grid& grid, const RealTensor& values) {
  ComplexField f(grid);
  require_same_shape(f.values, values, "real_to_field");
  for (std::size_t k = 0; k < values.size(); ++k) f.values[k] = values[k];
  return f;
}

void save_pgm(const std::filesystem::path& path, const RealTensor& values, double lo, double hi) {
  if (values.shape.size() != 2) throw std::invalid_argument("save_pgm: expects a 2-D array");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << "P5\n" << values.shape[1] << " " << values.shape[0] << "\n255\n";
  const double span = hi > lo ? hi - lo : 1.0;
  std::vector<unsigned char> bytes(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double t = std::clamp((values[k] - lo) / span, 0.0, 1.0);
    bytes[k] = static_cast<unsigned char>(std::lround(t * 255.0));
  }
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

void save_phase_pgm(const std::filesystem::path& path, const ComplexTensor& coefficients) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  RealTensor phase(coefficients.shape);
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    double p = std::fmod(std::arg(coefficients[k]), two_pi);
    if (p < 0) p += two_pi;
    phase[k] = p;
  }
  save_pgm(path, phase, 0.0, two_pi);
}

}  // namespace wavecoder
