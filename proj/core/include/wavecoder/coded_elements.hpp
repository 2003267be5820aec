#pragma once

#include <cstddef>
#include <utility>
#include <variant>

#include "wavecoder/field.hpp"

namespace wavecoder {

/// Transmission a * exp(j psi). Phase-only layers keep amplitude at 1.
struct PhaseMask {
  RealTensor psi;
  RealTensor amplitude;

  static PhaseMask phase_only(RealTensor psi);
};

/// Diffractive element whose height map is a sum of Zernike polynomials in
/// Noll order, evaluated on the disk inscribed in the grid.
struct ZernikeDOE {
  RealTensor coeffs;  // sag per polynomial, meters
  double index_delta = 0.5;
  double outside_amplitude = 0.0;

  std::size_t basis_count() const { return coeffs.size(); }
};

/// Coded aperture parametrized by unconstrained logits. The soft form is a
/// sigmoid; the hard form thresholds at 0 and back-propagates as identity.
struct BinaryMask {
  RealTensor logits;
  bool hard = false;
};

/// Per-pixel softmax choice among F filters of a spectral filter bank.
struct SelectorMask {
  RealTensor weights;      // n x n x F
  RealTensor filter_bank;  // F x W
  double temperature = 1.0;
  std::size_t band = 0;    // wavelength sample used when placed in a monochromatic model
};

using CodedElement = std::variant<PhaseMask, ZernikeDOE, BinaryMask, SelectorMask>;

constexpr std::size_t kMaxNollIndex = 231;  // radial order 20

/// Noll index j >= 1 to (radial order n, azimuthal frequency m). m < 0 marks
/// the sine term.
std::pair<int, int> noll_to_nm(std::size_t j);

/// Noll-normalized Zernike polynomial at polar coordinates on the unit disk.
double zernike(std::size_t j, double rho, double theta);

/// Height map in meters on the grid; zero outside the inscribed disk.
RealTensor zernike_height(const ZernikeDOE& doe, const Grid& grid);
/// Basis polynomial j evaluated on the grid (zero outside the disk).
RealTensor zernike_basis(std::size_t j, const Grid& grid);
/// 1 inside the inscribed unit disk, 0 outside.
RealTensor unit_disk(const Grid& grid);

ComplexTensor realize_phase(const PhaseMask& mask);
ComplexTensor realize_zernike(const ZernikeDOE& doe, const Grid& grid, double wavelength);
RealTensor realize_binary_soft(const BinaryMask& mask);
RealTensor realize_binary_hard(const BinaryMask& mask);
/// Softmax weights over the filter axis, n x n x F.
RealTensor selector_weights(const SelectorMask& mask, double temperature);
/// Per-pixel spectral response, n x n x W.
RealTensor realize_selector(const SelectorMask& mask, double temperature);

ComplexField modulate(const ComplexField& field, const ComplexTensor& phi);
ComplexField modulate(const ComplexField& field, const RealTensor& transmission);

/// Transmission coefficients of any element on a grid (real elements are
/// promoted to complex).
ComplexTensor realize(const CodedElement& element, const Grid& grid);

double sigmoid(double x);

}  // namespace wavecoder
