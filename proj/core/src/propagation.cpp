#include "wavecoder/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace wavecoder {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t natural_index(std::size_t k, std::size_t n) {
  // Centered bin k holds frequency (k - n/2) df; DFT bin order wants it at
  // (k - n/2) mod n.
  return (k + n - n / 2) % n;
}

}  // namespace

PropagationSegment make_segment(double distance, PropagationMethod method,
                                std::size_t pad_factor) {
  if (!(distance >= 0.0) || !std::isfinite(distance)) {
    throw std::invalid_argument("segment: distance must be finite and non-negative");
  }
  if (pad_factor < 1) throw std::invalid_argument("segment: pad_factor must be >= 1");
  return PropagationSegment{distance, method, pad_factor};
}

Complex rs_weight(double dx_m, double dy_m, double dz, double wavelength) {
  if (!(dz > 0.0)) throw std::invalid_argument("rs_weight: dz must be positive");
  const double r2 = dx_m * dx_m + dy_m * dy_m + dz * dz;
  const double r = std::sqrt(r2);
  const Complex obliquity = dz / r2;
  // 1/(j lambda) = -j/lambda
  const Complex radial(1.0 / (kTwoPi * r), -1.0 / wavelength);
  return obliquity * radial * std::polar(1.0, kTwoPi * r / wavelength);
}

TransferFunction as_transfer(const FrequencyGrid& freq_grid, double z, double wavelength) {
  if (!(z >= 0.0)) throw std::invalid_argument("as_transfer: z must be non-negative");
  const std::size_t n = freq_grid.n_pad;
  TransferFunction tf{freq_grid, ComplexTensor({n, n})};
  const double cutoff = 1.0 / (wavelength * wavelength);
  for (std::size_t i = 0; i < n; ++i) {
    const double fx = freq_grid.freq(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double fy = freq_grid.freq(j);
      const double radicand = cutoff - fx * fx - fy * fy;
      tf.values(i, j) = radicand >= 0.0 ? std::polar(1.0, kTwoPi * z * std::sqrt(radicand))
                                        : Complex(0.0, 0.0);
    }
  }
  return tf;
}

AngularSpectrumPropagator::AngularSpectrumPropagator(const Grid& grid, double z,
                                                     std::size_t pad_factor)
    : grid_(grid), window_(grid.n * pad_factor) {
  if (pad_factor < 1) throw std::invalid_argument("angular spectrum: pad_factor must be >= 1");
  Grid padded = grid;
  padded.n = window_;
  transfer_ = as_transfer(FrequencyGrid::of(padded), z, grid.wavelength);
  natural_ = ComplexTensor({window_, window_});
  for (std::size_t i = 0; i < window_; ++i) {
    for (std::size_t j = 0; j < window_; ++j) {
      natural_(natural_index(i, window_), natural_index(j, window_)) = transfer_.values(i, j);
    }
  }
}

ComplexTensor AngularSpectrumPropagator::run(const ComplexTensor& values, bool conjugate) const {
  if (values.shape != std::vector<std::size_t>{grid_.n, grid_.n}) {
    throw std::invalid_argument("angular spectrum: field shape " + shape_string(values.shape) +
                                " does not match grid");
  }
  // Spatial DFT-shifts around the pipeline are omitted: a diagonal spectral
  // multiply is a circular convolution, which commutes with circular shifts.
  ComplexTensor buf = pad_values(values, window_);
  dft2_inplace(buf);
  if (conjugate) {
    for (std::size_t k = 0; k < buf.size(); ++k) buf[k] *= std::conj(natural_[k]);
  } else {
    for (std::size_t k = 0; k < buf.size(); ++k) buf[k] *= natural_[k];
  }
  idft2_inplace(buf);
  return crop_values(buf, grid_.n);
}

ComplexTensor AngularSpectrumPropagator::apply(const ComplexTensor& values) const {
  return run(values, false);
}

ComplexTensor AngularSpectrumPropagator::adjoint(const ComplexTensor& values) const {
  return run(values, true);
}

DirectPropagator::DirectPropagator(const Grid& grid, double z) : grid_(grid) {
  if (grid.n > kMaxGrid) {
    throw std::invalid_argument("direct propagation is limited to n <= " +
                                std::to_string(kMaxGrid) + " (got " + std::to_string(grid.n) +
                                ")");
  }
  const long n = static_cast<long>(grid.n);
  const long span = 2 * n - 1;
  const double area = grid.dx * grid.dx;
  kernel_.resize(static_cast<std::size_t>(span * span));
  for (long di = -(n - 1); di <= n - 1; ++di) {
    for (long dj = -(n - 1); dj <= n - 1; ++dj) {
      kernel_[static_cast<std::size_t>((di + n - 1) * span + (dj + n - 1))] =
          rs_weight(static_cast<double>(di) * grid.dx, static_cast<double>(dj) * grid.dx, z,
                    grid.wavelength) *
          area;
    }
  }
}

ComplexTensor DirectPropagator::sum(const ComplexTensor& values, bool conjugate) const {
  if (values.shape != std::vector<std::size_t>{grid_.n, grid_.n}) {
    throw std::invalid_argument("direct propagation: field shape does not match grid");
  }
  const long n = static_cast<long>(grid_.n);
  ComplexTensor out({grid_.n, grid_.n});
  for (long i1 = 0; i1 < n; ++i1) {
    for (long j1 = 0; j1 < n; ++j1) {
      Complex acc = 0.0;
      for (long i0 = 0; i0 < n; ++i0) {
        for (long j0 = 0; j0 < n; ++j0) {
          const Complex w = kernel(i1 - i0, j1 - j0);
          acc += values(static_cast<std::size_t>(i0), static_cast<std::size_t>(j0)) *
                 (conjugate ? std::conj(w) : w);
        }
      }
      out(static_cast<std::size_t>(i1), static_cast<std::size_t>(j1)) = acc;
    }
  }
  return out;
}

ComplexTensor DirectPropagator::apply(const ComplexTensor& values) const {
  return sum(values, false);
}

// The kernel depends on |offset| only through r, so K(i1-i0) = K(i0-i1) and
// the adjoint is the same sum with conjugated weights.
ComplexTensor DirectPropagator::adjoint(const ComplexTensor& values) const {
  return sum(values, true);
}

std::shared_ptr<const FieldOperator> make_propagator(const Grid& grid,
                                                     const PropagationSegment& segment) {
  if (segment.distance == 0.0) return std::make_shared<IdentityPropagator>();
  if (segment.method == PropagationMethod::Direct) {
    return std::make_shared<DirectPropagator>(grid, segment.distance);
  }
  return std::make_shared<AngularSpectrumPropagator>(grid, segment.distance, segment.pad_factor);
}

ComplexField propagate_direct(const ComplexField& field, const PropagationSegment& segment) {
  if (segment.method != PropagationMethod::Direct) {
    throw std::invalid_argument("propagate_direct: segment method is not Direct");
  }
  if (!(segment.distance > 0.0)) {
    throw std::invalid_argument("propagate_direct: distance must be positive");
  }
  return ComplexField(field.grid,
                      DirectPropagator(field.grid, segment.distance).apply(field.values));
}

ComplexField propagate_as(const ComplexField& field, const PropagationSegment& segment) {
  if (segment.method != PropagationMethod::AngularSpectrum) {
    throw std::invalid_argument("propagate_as: segment method is not AngularSpectrum");
  }
  const AngularSpectrumPropagator op(field.grid, segment.distance, segment.pad_factor);
  return ComplexField(field.grid, op.apply(field.values));
}

ComplexField propagate(const ComplexField& field, const PropagationSegment& segment) {
  return ComplexField(field.grid, make_propagator(field.grid, segment)->apply(field.values));
}

RealTensor sense_psf_convolution(const RealTensor& image, const RealTensor& psf) {
  if (image.shape.size() != 2 || image.shape[0] != image.shape[1]) {
    throw std::invalid_argument("psf convolution: image must be square");
  }
  require_same_shape(image, psf, "psf convolution");
  const std::size_t n = image.shape[0];
  ComplexTensor a({n, n});
  ComplexTensor b({n, n});
  for (std::size_t k = 0; k < image.size(); ++k) {
    if (image[k] < 0.0) throw std::invalid_argument("psf convolution: image must be non-negative");
    a[k] = image[k];
  }
  // Move the PSF origin from the center pixel to index (0, 0).
  const std::size_t c = n / 2;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) b((i + n - c) % n, (j + n - c) % n) = psf(i, j);
  }
  dft2_inplace(a);
  dft2_inplace(b);
  for (std::size_t k = 0; k < a.size(); ++k) a[k] *= b[k];
  idft2_inplace(a);
  RealTensor out({n, n});
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::max(0.0, a[k].real());
  return out;
}

std::uint64_t working_set_elements(PropagationMethod method, std::uint64_t n, std::uint64_t w) {
  if (method == PropagationMethod::Direct) return n * n * n * n;
  return (w * n) * (w * n);
}

}  // namespace wavecoder
