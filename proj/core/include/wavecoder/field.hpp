#pragma once

#include <cstddef>
#include <cstdint>

#include "wavecoder/tensor.hpp"

namespace wavecoder {

/// Square sampling geometry shared by fields and masks.
///
/// Pixel i sits at x_i = (i - n/2) dx, with n/2 rounded down for odd n, so
/// the center pixel is always at the origin.
struct Grid {
  std::size_t n = 0;
  double dx = 0.0;
  double wavelength = 0.0;

  std::size_t center() const { return n / 2; }
  double coord(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(center())) * dx;
  }
  double width() const { return static_cast<double>(n) * dx; }

  bool operator==(const Grid&) const = default;
};

Grid make_grid(std::size_t n, double dx, double wavelength);

/// Centered spatial-frequency sampling of an n_pad-point DFT.
struct FrequencyGrid {
  std::size_t n_pad = 0;
  double df = 0.0;

  static FrequencyGrid of(const Grid& grid) {
    return {grid.n, 1.0 / (static_cast<double>(grid.n) * grid.dx)};
  }
  double freq(std::size_t k) const {
    return (static_cast<double>(k) - static_cast<double>(n_pad / 2)) * df;
  }
};

struct ComplexField {
  Grid grid;
  ComplexTensor values;

  ComplexField() = default;
  explicit ComplexField(const Grid& g);
  ComplexField(const Grid& g, ComplexTensor v);

  Complex& operator()(std::size_t i, std::size_t j) { return values(i, j); }
  const Complex& operator()(std::size_t i, std::size_t j) const { return values(i, j); }
  std::size_t n() const { return grid.n; }
};

ComplexField zero_field(const Grid& grid);

/// Unit plane wave exp(j 2 pi (fx x + fy y)). Frequencies must be exact bins
/// of the unpadded grid.
ComplexField plane_wave(const Grid& grid, double fx, double fy);

ComplexField point_source(const Grid& grid, std::size_t i, std::size_t j);

/// Sum |U|^2 dx^2.
double energy(const ComplexField& field);

/// Zero-pad to (w n) x (w n), original block centered.
ComplexField pad(const ComplexField& field, std::size_t w);

/// Central n_out x n_out block; inverse of pad.
ComplexField crop(const ComplexField& field, std::size_t n_out);

// Tensor-level helpers used by propagation and its adjoint.
ComplexTensor pad_values(const ComplexTensor& values, std::size_t n_out);
ComplexTensor crop_values(const ComplexTensor& values, std::size_t n_out);

/// 2-D DFT pair: forward unscaled, inverse scaled by 1/n^2. Square inputs.
ComplexTensor dft2(const ComplexTensor& values);
ComplexTensor idft2(const ComplexTensor& values);
void dft2_inplace(ComplexTensor& values);
void idft2_inplace(ComplexTensor& values);

/// Move the zero-frequency bin to the center (fftshift) and back.
ComplexTensor fftshift2(const ComplexTensor& values);
ComplexTensor ifftshift2(const ComplexTensor& values);

}  // namespace wavecoder
