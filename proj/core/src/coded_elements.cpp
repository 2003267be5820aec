#include "wavecoder/coded_elements.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace wavecoder {

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

double radial(int n, int m, double rho) {
  double sum = 0.0;
  for (int k = 0; k <= (n - m) / 2; ++k) {
    const double c = ((k % 2) ? -1.0 : 1.0) * factorial(n - k) /
                     (factorial(k) * factorial((n + m) / 2 - k) * factorial((n - m) / 2 - k));
    sum += c * std::pow(rho, n - 2 * k);
  }
  return sum;
}

// Polar coordinates normalized so the inscribed disk has radius 1.
std::pair<double, double> polar_coords(const Grid& grid, std::size_t i, std::size_t j) {
  const double radius = 0.5 * grid.width();
  const double x = grid.coord(i) / radius;
  const double y = grid.coord(j) / radius;
  return {std::hypot(x, y), std::atan2(y, x)};
}

void check_2d(const RealTensor& t, const char* what) {
  if (t.shape.size() != 2 || t.shape[0] != t.shape[1]) {
    throw std::invalid_argument(std::string(what) + ": expected a square 2-D array");
  }
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

PhaseMask PhaseMask::phase_only(RealTensor psi) {
  RealTensor amp(psi.shape, 1.0);
  return PhaseMask{std::move(psi), std::move(amp)};
}

std::pair<int, int> noll_to_nm(std::size_t j) {
  if (j < 1 || j > kMaxNollIndex) {
    throw std::invalid_argument("zernike: Noll index " + std::to_string(j) +
                                " outside implemented range 1.." + std::to_string(kMaxNollIndex));
  }
  int n = 0;
  int rem = static_cast<int>(j) - 1;
  while (rem > n) {
    ++n;
    rem -= n;
  }
  const int mag = (n % 2) + 2 * ((rem + ((n + 1) % 2)) / 2);
  const int m = (j % 2 == 0) ? mag : -mag;
  return {n, m};
}

double zernike(std::size_t j, double rho, double theta) {
  const auto [n, m] = noll_to_nm(j);
  const int am = std::abs(m);
  const double r = radial(n, am, rho);
  if (m == 0) return std::sqrt(n + 1.0) * r;
  const double norm = std::sqrt(2.0 * (n + 1.0));
  return m > 0 ? norm * r * std::cos(am * theta) : norm * r * std::sin(am * theta);
}

RealTensor unit_disk(const Grid& grid) {
  RealTensor out({grid.n, grid.n});
  for (std::size_t i = 0; i < grid.n; ++i) {
    for (std::size_t j = 0; j < grid.n; ++j) {
      out(i, j) = polar_coords(grid, i, j).first <= 1.0 ? 1.0 : 0.0;
    }
  }
  return out;
}

RealTensor zernike_basis(std::size_t j, const Grid& grid) {
  noll_to_nm(j);
  RealTensor out({grid.n, grid.n});
  for (std::size_t i = 0; i < grid.n; ++i) {
    for (std::size_t k = 0; k < grid.n; ++k) {
      const auto [rho, theta] = polar_coords(grid, i, k);
      out(i, k) = rho <= 1.0 ? zernike(j, rho, theta) : 0.0;
    }
  }
  return out;
}

RealTensor zernike_height(const ZernikeDOE& doe, const Grid& grid) {
  if (doe.basis_count() > kMaxNollIndex) {
    throw std::invalid_argument("zernike: basis_count exceeds implemented Noll indices");
  }
  RealTensor h({grid.n, grid.n});
  for (std::size_t b = 0; b < doe.basis_count(); ++b) {
    if (doe.coeffs[b] == 0.0) continue;
    const RealTensor z = zernike_basis(b + 1, grid);
    for (std::size_t k = 0; k < h.size(); ++k) h[k] += doe.coeffs[b] * z[k];
  }
  return h;
}

ComplexTensor realize_phase(const PhaseMask& mask) {
  require_same_shape(mask.psi, mask.amplitude, "realize_phase");
  ComplexTensor out(mask.psi.shape);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::polar(mask.amplitude[k], mask.psi[k]);
  return out;
}

ComplexTensor realize_zernike(const ZernikeDOE& doe, const Grid& grid, double wavelength) {
  if (!(wavelength > 0.0)) throw std::invalid_argument("realize_zernike: wavelength must be > 0");
  const RealTensor h = zernike_height(doe, grid);
  const RealTensor disk = unit_disk(grid);
  const double k = 2.0 * std::numbers::pi * doe.index_delta / wavelength;
  ComplexTensor out({grid.n, grid.n});
  for (std::size_t p = 0; p < out.size(); ++p) {
    const double amp = disk[p] > 0.0 ? 1.0 : doe.outside_amplitude;
    out[p] = std::polar(amp, k * h[p]);
  }
  return out;
}

RealTensor realize_binary_soft(const BinaryMask& mask) {
  RealTensor out(mask.logits.shape);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = sigmoid(mask.logits[k]);
  return out;
}

RealTensor realize_binary_hard(const BinaryMask& mask) {
  RealTensor out(mask.logits.shape);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = mask.logits[k] >= 0.0 ? 1.0 : 0.0;
  return out;
}

RealTensor selector_weights(const SelectorMask& mask, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("selector: temperature must be > 0");
  if (mask.weights.shape.size() != 3) throw std::invalid_argument("selector: weights must be n x n x F");
  const std::size_t f = mask.weights.shape[2];
  RealTensor out(mask.weights.shape);
  for (std::size_t p = 0; p < mask.weights.size() / f; ++p) {
    const double* w = &mask.weights[p * f];
    double* s = &out[p * f];
    const double peak = *std::max_element(w, w + f);
    double total = 0.0;
    for (std::size_t q = 0; q < f; ++q) total += (s[q] = std::exp((w[q] - peak) / temperature));
    for (std::size_t q = 0; q < f; ++q) s[q] /= total;
  }
  return out;
}

RealTensor realize_selector(const SelectorMask& mask, double temperature) {
  const RealTensor s = selector_weights(mask, temperature);
  const std::size_t f = mask.weights.shape[2];
  if (mask.filter_bank.shape.size() != 2 || mask.filter_bank.shape[0] != f) {
    throw std::invalid_argument("selector: filter bank must have F rows");
  }
  const std::size_t w = mask.filter_bank.shape[1];
  const std::size_t pixels = mask.weights.size() / f;
  RealTensor out({mask.weights.shape[0], mask.weights.shape[1], w});
  for (std::size_t p = 0; p < pixels; ++p) {
    for (std::size_t q = 0; q < f; ++q) {
      const double sq = s[p * f + q];
      for (std::size_t b = 0; b < w; ++b) out[p * w + b] += sq * mask.filter_bank(q, b);
    }
  }
  return out;
}

ComplexField modulate(const ComplexField& field, const ComplexTensor& phi) {
  require_same_shape(field.values, phi, "modulate");
  ComplexField out = field;
  for (std::size_t k = 0; k < phi.size(); ++k) out.values[k] *= phi[k];
  return out;
}

ComplexField modulate(const ComplexField& field, const RealTensor& transmission) {
  require_same_shape(field.values, transmission, "modulate");
  ComplexField out = field;
  for (std::size_t k = 0; k < transmission.size(); ++k) out.values[k] *= transmission[k];
  return out;
}

ComplexTensor realize(const CodedElement& element, const Grid& grid) {
  auto promote = [](const RealTensor& r) {
    ComplexTensor c(r.shape);
    for (std::size_t k = 0; k < r.size(); ++k) c[k] = r[k];
    return c;
  };
  return std::visit(
      [&](const auto& e) -> ComplexTensor {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, PhaseMask>) {
          check_2d(e.psi, "phase mask");
          return realize_phase(e);
        } else if constexpr (std::is_same_v<T, ZernikeDOE>) {
          return realize_zernike(e, grid, grid.wavelength);
        } else if constexpr (std::is_same_v<T, BinaryMask>) {
          check_2d(e.logits, "binary mask");
          return promote(e.hard ? realize_binary_hard(e) : realize_binary_soft(e));
        } else {
          const RealTensor resp = realize_selector(e, e.temperature);
          const std::size_t w = resp.shape[2];
          if (e.band >= w) throw std::invalid_argument("selector: band index out of range");
          RealTensor slice({resp.shape[0], resp.shape[1]});
          for (std::size_t p = 0; p < slice.size(); ++p) slice[p] = resp[p * w + e.band];
          return promote(slice);
        }
      },
      element);
}

}  // namespace wavecoder
