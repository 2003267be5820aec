#pragma once

// Differentiable building blocks recorded on an ad::Tape.

#include <cstddef>
#include <memory>
#include <vector>

#include "wavecoder/autodiff.hpp"
#include "wavecoder/coded_elements.hpp"
#include "wavecoder/propagation.hpp"
#include "wavecoder/regularizers.hpp"

namespace wavecoder::ops {

using ad::Variable;

// Real elementwise arithmetic.
Variable add(const Variable& a, const Variable& b);
Variable sub(const Variable& a, const Variable& b);
Variable mul(const Variable& a, const Variable& b);
Variable scale(const Variable& a, double c);
Variable sum(const Variable& a);
Variable mean(const Variable& a);
Variable sigmoid(const Variable& logits);
/// Threshold at 0 (ties to 1); backward passes the adjoint through unchanged.
Variable threshold_straight_through(const Variable& logits);
Variable reshape(const Variable& a, std::vector<std::size_t> shape);
/// weights (m x k) times flattened x (k) -> m.
Variable matvec(const Variable& weights, const Variable& x);

// Complex field operations.
/// amplitude * exp(j psi); amplitude is a fixed array.
Variable phase_to_complex(const Variable& psi, const RealTensor& amplitude);
Variable to_complex(const Variable& real);
/// Elementwise complex * complex.
Variable modulate(const Variable& field, const Variable& phi);
/// Elementwise complex * real transmission.
Variable modulate_real(const Variable& field, const Variable& transmission);
Variable propagate(const Variable& field, std::shared_ptr<const FieldOperator> op);
/// |U|^2
Variable intensity(const Variable& field);

// Coded-element realizations.
Variable realize_zernike(const Variable& coeffs, const ZernikeDOE& doe, const Grid& grid,
                         double wavelength);
/// Per-pixel response n x n x W from weights n x n x F.
Variable realize_selector(const Variable& weights, const RealTensor& filter_bank,
                          double temperature);
/// Slice one wavelength sample of an n x n x W response.
Variable select_band(const Variable& response, std::size_t band);

// Readouts and losses.
struct Region {
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t height = 0;
  std::size_t width = 0;
};
Variable region_sums(const Variable& image, const std::vector<Region>& regions);
Variable mse(const Variable& pred, const RealTensor& target);
Variable softmax_cross_entropy(const Variable& scores, std::size_t label);

// Regularizers on soft mask values.
Variable reg_binary(const Variable& phi);
Variable reg_correlation(const std::vector<Variable>& phis);
Variable reg_transmittance(const Variable& phi, double target);
Variable reg_shots(const std::vector<Variable>& phis);
Variable reg_decoder_weights(const Variable& theta, DecoderNorm norm);

}  // namespace wavecoder::ops
