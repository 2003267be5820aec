#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>

#include "wavecoder/field.hpp"

namespace wavecoder {

enum class PropagationMethod { Direct, AngularSpectrum };

/// Free-space hop between two parallel planes. A zero distance is the
/// identity and skips propagation entirely.
struct PropagationSegment {
  double distance = 0.0;
  PropagationMethod method = PropagationMethod::AngularSpectrum;
  std::size_t pad_factor = 4;
};

PropagationSegment make_segment(double distance,
                                PropagationMethod method = PropagationMethod::AngularSpectrum,
                                std::size_t pad_factor = 4);

/// Angular-spectrum transfer function in centered frequency order with the
/// evanescent bins already zeroed, so every entry has modulus 0 or 1.
struct TransferFunction {
  FrequencyGrid freq_grid;
  ComplexTensor values;
};

/// Rayleigh-Sommerfeld kernel weight for a transverse offset (dx_m, dy_m)
/// and axial separation dz.
Complex rs_weight(double dx_m, double dy_m, double dz, double wavelength);

TransferFunction as_transfer(const FrequencyGrid& freq_grid, double z, double wavelength);

/// Linear map between fields on the same grid, with its adjoint.
class FieldOperator {
 public:
  virtual ~FieldOperator() = default;
  virtual ComplexTensor apply(const ComplexTensor& values) const = 0;
  virtual ComplexTensor adjoint(const ComplexTensor& values) const = 0;
};

class IdentityPropagator final : public FieldOperator {
 public:
  ComplexTensor apply(const ComplexTensor& values) const override { return values; }
  ComplexTensor adjoint(const ComplexTensor& values) const override { return values; }
};

/// Pad, DFT, multiply by the masked transfer function, inverse DFT, crop.
class AngularSpectrumPropagator final : public FieldOperator {
 public:
  AngularSpectrumPropagator(const Grid& grid, double z, std::size_t pad_factor);

  ComplexTensor apply(const ComplexTensor& values) const override;
  /// Same pipeline with the conjugate transfer function.
  ComplexTensor adjoint(const ComplexTensor& values) const override;

  const TransferFunction& transfer() const { return transfer_; }
  std::size_t window() const { return window_; }

 private:
  ComplexTensor run(const ComplexTensor& values, bool conjugate) const;

  Grid grid_;
  std::size_t window_;
  TransferFunction transfer_;
  ComplexTensor natural_;  // transfer_ in unshifted DFT bin order
};

/// Riemann sum of the Rayleigh-Sommerfeld integral. O(n^4); only meant as a
/// reference for small grids.
class DirectPropagator final : public FieldOperator {
 public:
  static constexpr std::size_t kMaxGrid = 64;

  DirectPropagator(const Grid& grid, double z);

  ComplexTensor apply(const ComplexTensor& values) const override;
  ComplexTensor adjoint(const ComplexTensor& values) const override;

 private:
  ComplexTensor sum(const ComplexTensor& values, bool conjugate) const;
  Complex kernel(long di, long dj) const {
    const long span = 2 * static_cast<long>(grid_.n) - 1;
    return kernel_[static_cast<std::size_t>((di + static_cast<long>(grid_.n) - 1) * span +
                                            (dj + static_cast<long>(grid_.n) - 1))];
  }

  Grid grid_;
  std::vector<Complex> kernel_;  // weight * dx^2, indexed by pixel offset
};

std::shared_ptr<const FieldOperator> make_propagator(const Grid& grid,
                                                     const PropagationSegment& segment);

ComplexField propagate_direct(const ComplexField& field, const PropagationSegment& segment);
ComplexField propagate_as(const ComplexField& field, const PropagationSegment& segment);
ComplexField propagate(const ComplexField& field, const PropagationSegment& segment);

/// Circular 2-D convolution of an intensity image with a PSF whose origin is
/// the grid center pixel. Valid as a linear-convolution model only while the
/// PSF support stays well inside the window.
RealTensor sense_psf_convolution(const RealTensor& image, const RealTensor& psf);

/// Number of complex samples held per layer: n^4 for the direct method,
/// (w n)^2 for the angular spectrum method.
std::uint64_t working_set_elements(PropagationMethod method, std::uint64_t n, std::uint64_t w);

}  // namespace wavecoder
