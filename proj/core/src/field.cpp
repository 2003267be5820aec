#include "wavecoder/field.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace wavecoder {

namespace {

void check_values(const Grid& grid, const ComplexTensor& v) {
  if (v.shape != std::vector<std::size_t>{grid.n, grid.n}) {
    throw std::invalid_argument("field: values must be " + std::to_string(grid.n) + "x" +
                                std::to_string(grid.n) + ", got " + shape_string(v.shape));
  }
}

// Maps a frequency onto its integer bin index, or throws when it is not an exact bin.
long exact_bin(const Grid& grid, double f, const char* axis) {
  const double m = f * static_cast<double>(grid.n) * grid.dx;
  const double r = std::round(m);
  const long lo = -static_cast<long>(grid.center());
  const long hi = static_cast<long>(grid.n) - 1 - static_cast<long>(grid.center());
  if (!std::isfinite(m) || std::abs(m - r) > 1e-9 || r < lo || r > hi) {
    throw std::invalid_argument(std::string("plane_wave: ") + axis +
                                " is not an on-grid frequency bin");
  }
  return static_cast<long>(r);
}

ComplexTensor shift_by(const ComplexTensor& v, std::size_t s) {
  const std::size_t n = v.shape[0];
  ComplexTensor out(v.shape);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t oi = (i + s) % n;
    for (std::size_t j = 0; j < n; ++j) {
      out(oi, (j + s) % n) = v(i, j);
    }
  }
  return out;
}

}  // namespace

Grid make_grid(std::size_t n, double dx, double wavelength) {
  if (n < 2) throw std::invalid_argument("make_grid: n must be >= 2");
  if (!(dx > 0.0) || !std::isfinite(dx)) {
    throw std::invalid_argument("make_grid: dx must be positive and finite");
  }
  if (!(wavelength > 0.0) || !std::isfinite(wavelength)) {
    throw std::invalid_argument("make_grid: wavelength must be positive and finite");
  }
  return Grid{n, dx, wavelength};
}

ComplexField::ComplexField(const Grid& g) : grid(g), values({g.n, g.n}) {}

ComplexField::ComplexField(const Grid& g, ComplexTensor v) : grid(g), values(std::move(v)) {
  check_values(grid, values);
}

ComplexField zero_field(const Grid& grid) { return ComplexField(grid); }

ComplexField plane_wave(const Grid& grid, double fx, double fy) {
  const long mx = exact_bin(grid, fx, "fx");
  const long my = exact_bin(grid, fy, "fy");
  const long n = static_cast<long>(grid.n);
  const long c = static_cast<long>(grid.center());
  ComplexField out(grid);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) {
      // Integer phase index reduced mod n keeps the samples exactly periodic.
      long k = (mx * (i - c) + my * (j - c)) % n;
      if (k < 0) k += n;
      const double phase = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      out(i, j) = std::polar(1.0, phase);
    }
  }
  return out;
}

ComplexField point_source(const Grid& grid, std::size_t i, std::size_t j) {
  if (i >= grid.n || j >= grid.n) {
    throw std::out_of_range("point_source: index (" + std::to_string(i) + "," +
                            std::to_string(j) + ") outside grid of size " +
                            std::to_string(grid.n));
  }
  ComplexField out(grid);
  out(i, j) = 1.0;
  return out;
}

double energy(const ComplexField& field) {
  double sum = 0.0;
  for (const auto& v : field.values.data) sum += std::norm(v);
  return sum * field.grid.dx * field.grid.dx;
}

ComplexTensor pad_values(const ComplexTensor& values, std::size_t n_out) {
  const std::size_t n = values.shape[0];
  if (n_out < n) throw std::invalid_argument("pad: output smaller than input");
  ComplexTensor out({n_out, n_out});
  const std::size_t off = n_out / 2 - n / 2;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out(i + off, j + off) = values(i, j);
  }
  return out;
}

ComplexTensor crop_values(const ComplexTensor& values, std::size_t n_out) {
  const std::size_t n = values.shape[0];
  if (n_out > n) {
    throw std::invalid_argument("crop: requested " + std::to_string(n_out) +
                                " exceeds field size " + std::to_string(n));
  }
  ComplexTensor out({n_out, n_out});
  const std::size_t off = n / 2 - n_out / 2;
  for (std::size_t i = 0; i < n_out; ++i) {
    for (std::size_t j = 0; j < n_out; ++j) out(i, j) = values(i + off, j + off);
  }
  return out;
}

ComplexField pad(const ComplexField& field, std::size_t w) {
  if (w < 1) throw std::invalid_argument("pad: factor must be >= 1");
  Grid g = field.grid;
  g.n = field.grid.n * w;
  return ComplexField(g, pad_values(field.values, g.n));
}

ComplexField crop(const ComplexField& field, std::size_t n_out) {
  if (n_out == 0) throw std::invalid_argument("crop: output size must be positive");
  Grid g = field.grid;
  g.n = n_out;
  return ComplexField(g, crop_values(field.values, n_out));
}

ComplexTensor dft2(const ComplexTensor& values) {
  ComplexTensor out = values;
  dft2_inplace(out);
  return out;
}

ComplexTensor idft2(const ComplexTensor& values) {
  ComplexTensor out = values;
  idft2_inplace(out);
  return out;
}

ComplexTensor fftshift2(const ComplexTensor& values) {
  return shift_by(values, values.shape[0] / 2);
}

ComplexTensor ifftshift2(const ComplexTensor& values) {
  const std::size_t n = values.shape[0];
  return shift_by(values, n - n / 2);
}

}  // namespace wavecoder
