#include "wavecoder/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace wavecoder {

namespace {

std::string layer_name(std::size_t k, const char* what) {
  return "layer" + std::to_string(k) + "." + what;
}

void check_square(const RealTensor& t, std::size_t n, const std::string& what) {
  if (t.shape != std::vector<std::size_t>{n, n}) {
    throw std::invalid_argument(what + ": expected " + std::to_string(n) + "x" +
                                std::to_string(n) + ", got " + shape_string(t.shape));
  }
}

bool overlaps(const ops::Region& a, const ops::Region& b) {
  return a.row < b.row + b.height && b.row < a.row + a.height && a.col < b.col + b.width &&
         b.col < a.col + a.width;
}

}  // namespace

Model::Model(const Grid& grid, PropagationSegment input, std::vector<Layer> layers,
             PropagationSegment output, Readout readout, InputEncoding encoding)
    : grid_(grid),
      input_(input),
      layers_(std::move(layers)),
      output_(output),
      readout_(std::move(readout)),
      encoding_(encoding) {
  validate();
  input_op_ = make_propagator(grid_, input_);
  for (const auto& layer : layers_) layer_ops_.push_back(make_propagator(grid_, layer.segment));
  output_op_ = make_propagator(grid_, output_);
}

void Model::validate() const {
  make_grid(grid_.n, grid_.dx, grid_.wavelength);
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const std::string where = "layer " + std::to_string(k);
    std::visit(
        [&](const auto& e) {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, PhaseMask>) {
            check_square(e.psi, grid_.n, where + " phase");
            check_square(e.amplitude, grid_.n, where + " amplitude");
          } else if constexpr (std::is_same_v<T, ZernikeDOE>) {
            if (e.basis_count() == 0 || e.basis_count() > kMaxNollIndex) {
              throw std::invalid_argument(where + ": Zernike basis count out of range");
            }
          } else if constexpr (std::is_same_v<T, BinaryMask>) {
            check_square(e.logits, grid_.n, where + " logits");
          } else {
            if (e.weights.shape.size() != 3 || e.weights.shape[0] != grid_.n ||
                e.weights.shape[1] != grid_.n) {
              throw std::invalid_argument(where + ": selector weights must be n x n x F");
            }
            if (e.filter_bank.shape.size() != 2 || e.filter_bank.shape[0] != e.weights.shape[2] ||
                e.band >= e.filter_bank.shape[1]) {
              throw std::invalid_argument(where + ": selector filter bank / band mismatch");
            }
            if (!(e.temperature > 0.0)) {
              throw std::invalid_argument(where + ": selector temperature must be > 0");
            }
          }
        },
        layers_[k].element);
  }
  if (const auto* det = std::get_if<DetectorRegions>(&readout_)) {
    if (det->regions.empty()) throw std::invalid_argument("detector readout needs regions");
    for (std::size_t a = 0; a < det->regions.size(); ++a) {
      const auto& r = det->regions[a];
      if (r.height == 0 || r.width == 0 || r.row + r.height > grid_.n ||
          r.col + r.width > grid_.n) {
        throw std::invalid_argument("detector region " + std::to_string(a) +
                                    " is empty or outside the grid");
      }
      for (std::size_t b = 0; b < a; ++b) {
        if (overlaps(r, det->regions[b])) {
          throw std::invalid_argument("detector regions " + std::to_string(b) + " and " +
                                      std::to_string(a) + " overlap");
        }
      }
    }
  }
  if (const auto* dec = std::get_if<LinearDecoder>(&readout_)) {
    if (dec->weights.shape.size() != 2 || dec->weights.shape[1] != grid_.n * grid_.n) {
      throw std::invalid_argument("linear decoder weights must be out x n^2");
    }
    if (RealTensor::count(dec->output_shape) != dec->weights.shape[0]) {
      throw std::invalid_argument("linear decoder output shape does not match weight rows");
    }
  }
}

std::size_t Model::class_count() const {
  if (const auto* det = std::get_if<DetectorRegions>(&readout_)) return det->regions.size();
  return 0;
}

std::vector<ParameterRef> Model::parameters() {
  std::vector<ParameterRef> refs;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    std::visit(
        [&](auto& e) {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, PhaseMask>) {
            refs.push_back({layer_name(k, "psi"), &e.psi});
          } else if constexpr (std::is_same_v<T, ZernikeDOE>) {
            refs.push_back({layer_name(k, "coeffs"), &e.coeffs});
          } else if constexpr (std::is_same_v<T, BinaryMask>) {
            refs.push_back({layer_name(k, "logits"), &e.logits, e.hard});
          } else {
            refs.push_back({layer_name(k, "weights"), &e.weights});
          }
        },
        layers_[k].element);
  }
  if (auto* dec = std::get_if<LinearDecoder>(&readout_)) {
    refs.push_back({"decoder.weights", &dec->weights, false, true});
  }
  return refs;
}

std::vector<ops::Region> default_detector_layout(std::size_t n, std::size_t classes) {
  if (classes != 10) throw std::invalid_argument("default detector layout is defined for 10 classes");
  if (n < 5) throw std::invalid_argument("default detector layout needs n >= 5");
  const std::size_t side = std::max<std::size_t>(1, n / 10);
  std::size_t gap = side;
  if (5 * side + 4 * gap > n) gap = (n - 5 * side) / 4;
  const std::size_t width = 5 * side + 4 * gap;
  const std::size_t height = 2 * side + gap;
  const std::size_t top = (n - height) / 2;
  const std::size_t left = (n - width) / 2;
  std::vector<ops::Region> regions;
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 5; ++c) {
      regions.push_back({top + r * (side + gap), left + c * (side + gap), side, side});
    }
  }
  return regions;
}

BoundParameters bind_parameters(ad::Tape& tape, const Model& model, bool trainable) {
  auto leaf = [&](const std::string& name, const RealTensor& value) {
    return trainable ? tape.parameter(name, value) : tape.constant(value);
  };
  BoundParameters bound;
  for (std::size_t k = 0; k < model.layer_count(); ++k) {
    std::visit(
        [&](const auto& e) {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, PhaseMask>) {
            bound.layers.emplace_back(leaf(layer_name(k, "psi"), e.psi));
          } else if constexpr (std::is_same_v<T, ZernikeDOE>) {
            bound.layers.emplace_back(leaf(layer_name(k, "coeffs"), e.coeffs));
          } else if constexpr (std::is_same_v<T, BinaryMask>) {
            bound.layers.emplace_back(leaf(layer_name(k, "logits"), e.logits));
          } else {
            bound.layers.emplace_back(leaf(layer_name(k, "weights"), e.weights));
          }
        },
        model.layer(k).element);
  }
  if (const auto* dec = std::get_if<LinearDecoder>(&model.readout())) {
    bound.decoder = leaf("decoder.weights", dec->weights);
  }
  return bound;
}

ad::Variable encode_input(ad::Tape& tape, const Model& model, const RealTensor& input) {
  const std::size_t n = model.grid().n;
  check_square(input, n, "input image");
  ComplexTensor u0({n, n});
  for (std::size_t k = 0; k < input.size(); ++k) {
    if (model.encoding() == InputEncoding::Amplitude) {
      if (!(input[k] >= 0.0)) {
        throw std::invalid_argument("amplitude encoding needs a non-negative image");
      }
      u0[k] = std::sqrt(input[k]);
    } else {
      u0[k] = std::polar(1.0, std::numbers::pi * input[k]);
    }
  }
  return tape.constant(std::move(u0));
}

ad::Variable run_optics(const Model& model, const BoundParameters& params, ad::Variable field) {
  field = ops::propagate(field, model.input_operator());
  for (std::size_t k = 0; k < model.layer_count(); ++k) {
    const ad::Variable& p = *params.layers.at(k);
    std::visit(
        [&](const auto& e) {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, PhaseMask>) {
            field = ops::modulate(field, ops::phase_to_complex(p, e.amplitude));
          } else if constexpr (std::is_same_v<T, ZernikeDOE>) {
            field = ops::modulate(field,
                                  ops::realize_zernike(p, e, model.grid(), model.grid().wavelength));
          } else if constexpr (std::is_same_v<T, BinaryMask>) {
            const auto t = e.hard ? ops::threshold_straight_through(p) : ops::sigmoid(p);
            field = ops::modulate_real(field, t);
          } else {
            const auto resp = ops::realize_selector(p, e.filter_bank, e.temperature);
            field = ops::modulate_real(field, ops::select_band(resp, e.band));
          }
        },
        model.layer(k).element);
    field = ops::propagate(field, model.layer_operator(k));
  }
  return ops::propagate(field, model.output_operator());
}

ForwardTrace forward(ad::Tape& tape, const Model& model, const BoundParameters& params,
                     const RealTensor& input) {
  ForwardTrace trace;
  trace.field = run_optics(model, params, encode_input(tape, model, input));
  trace.intensity = ops::intensity(trace.field);
  trace.output = std::visit(
      [&](const auto& r) -> ad::Variable {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, IntensityImage>) {
          return trace.intensity;
        } else if constexpr (std::is_same_v<T, DetectorRegions>) {
          return ops::region_sums(trace.intensity, r.regions);
        } else {
          return ops::reshape(ops::matvec(*params.decoder, trace.intensity), r.output_shape);
        }
      },
      model.readout());
  return trace;
}

std::vector<ad::Variable> soft_binary_masks(const Model& model, const BoundParameters& params) {
  std::vector<ad::Variable> masks;
  for (std::size_t k = 0; k < model.layer_count(); ++k) {
    if (std::holds_alternative<BinaryMask>(model.layer(k).element)) {
      masks.push_back(ops::sigmoid(*params.layers.at(k)));
    }
  }
  return masks;
}

RealTensor forward(const Model& model, const RealTensor& input) {
  ad::Tape tape;
  const auto params = bind_parameters(tape, model, false);
  return forward(tape, model, params, input).output.real();
}

ComplexField forward_field(const Model& model, const RealTensor& input) {
  ad::Tape tape;
  const auto params = bind_parameters(tape, model, false);
  return ComplexField(model.grid(), forward(tape, model, params, input).field.complex());
}

ComplexField propagate_optics(const Model& model, const ComplexField& field) {
  if (field.grid.n != model.grid().n) {
    throw std::invalid_argument("field grid does not match model grid");
  }
  ad::Tape tape;
  const auto params = bind_parameters(tape, model, false);
  const auto out = run_optics(model, params, tape.constant(field.values));
  return ComplexField(model.grid(), out.complex());
}

RealTensor sense_intensity(const ComplexField& field) {
  RealTensor out(field.values.shape);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::norm(field.values[k]);
  return out;
}

RealTensor compute_psf(const Model& model, std::size_t i, std::size_t j) {
  if (model.has_decoder()) throw std::invalid_argument("compute_psf: model has a trainable decoder");
  RealTensor psf = sense_intensity(propagate_optics(model, point_source(model.grid(), i, j)));
  double total = 0.0;
  for (double v : psf.data) total += v;
  if (!(total > 0.0)) throw std::runtime_error("compute_psf: optical stack blocks all light");
  for (auto& v : psf.data) v /= total;
  return psf;
}

ComplexTensor materialize_sensing_matrix(const Model& model, std::size_t max_grid) {
  const std::size_t n = model.grid().n;
  if (n > max_grid) {
    throw std::invalid_argument("sensing matrix: grid " + std::to_string(n) + " exceeds limit " +
                                std::to_string(max_grid));
  }
  const std::size_t m = n * n;
  ComplexTensor h({m, m});
  for (std::size_t k = 0; k < m; ++k) {
    const ComplexField col = propagate_optics(model, point_source(model.grid(), k / n, k % n));
    for (std::size_t r = 0; r < m; ++r) h(r, k) = col.values[r];
  }
  return h;
}

ComplexTensor apply_sensing_matrix(const ComplexTensor& h, const ComplexTensor& f) {
  if (h.shape.size() != 2 || h.shape[1] != f.size()) {
    throw std::invalid_argument("sensing matrix: input size mismatch");
  }
  ComplexTensor out({h.shape[0]});
  for (std::size_t r = 0; r < h.shape[0]; ++r) {
    Complex acc = 0.0;
    for (std::size_t c = 0; c < h.shape[1]; ++c) acc += h(r, c) * f[c];
    out[r] = acc;
  }
  return out;
}

ComplexTensor transpose_lift(const ComplexTensor& h, const ComplexTensor& g) {
  if (h.shape.size() != 2 || h.shape[0] != g.size()) {
    throw std::invalid_argument("transpose lift: measurement size mismatch");
  }
  const std::size_t m = h.shape[1];
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(m))));
  ComplexTensor out({side, side});
  for (std::size_t r = 0; r < h.shape[0]; ++r) {
    for (std::size_t c = 0; c < m; ++c) out[c] += h(r, c) * g[r];
  }
  return out;
}

}  // namespace wavecoder
