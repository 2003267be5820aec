#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wavecoder/autodiff.hpp"
#include "wavecoder/coded_elements.hpp"
#include "wavecoder/ops.hpp"
#include "wavecoder/propagation.hpp"

namespace wavecoder {

/// A coded element followed by the free-space hop to the next plane.
struct Layer {
  CodedElement element;
  PropagationSegment segment;
};

enum class InputEncoding { Amplitude, Phase };

struct IntensityImage {};
struct DetectorRegions {
  std::vector<ops::Region> regions;
};
/// Trainable linear decoder applied to the vectorized detector image.
struct LinearDecoder {
  RealTensor weights;                     // out x n^2
  std::vector<std::size_t> output_shape;  // product equals out
};
using Readout = std::variant<IntensityImage, DetectorRegions, LinearDecoder>;

/// Non-owning handle to one trainable parameter block.
struct ParameterRef {
  std::string name;
  RealTensor* value;
  bool straight_through = false;
  bool decoder = false;
};

/// Optical stack: propagate d_in, then for each layer modulate and
/// propagate, then propagate d_out, detect intensity, read out.
class Model {
 public:
  Model(const Grid& grid, PropagationSegment input, std::vector<Layer> layers,
        PropagationSegment output, Readout readout,
        InputEncoding encoding = InputEncoding::Amplitude);

  const Grid& grid() const { return grid_; }
  const PropagationSegment& input_segment() const { return input_; }
  const PropagationSegment& output_segment() const { return output_; }
  std::size_t layer_count() const { return layers_.size(); }
  const Layer& layer(std::size_t k) const { return layers_.at(k); }
  CodedElement& element(std::size_t k) { return layers_.at(k).element; }
  const Readout& readout() const { return readout_; }
  Readout& readout() { return readout_; }
  InputEncoding encoding() const { return encoding_; }

  bool has_decoder() const { return std::holds_alternative<LinearDecoder>(readout_); }
  std::size_t class_count() const;

  std::vector<ParameterRef> parameters();
  std::shared_ptr<const FieldOperator> input_operator() const { return input_op_; }
  std::shared_ptr<const FieldOperator> layer_operator(std::size_t k) const { return layer_ops_.at(k); }
  std::shared_ptr<const FieldOperator> output_operator() const { return output_op_; }

 private:
  void validate() const;

  Grid grid_;
  PropagationSegment input_;
  std::vector<Layer> layers_;
  PropagationSegment output_;
  Readout readout_;
  InputEncoding encoding_;
  std::shared_ptr<const FieldOperator> input_op_;
  std::vector<std::shared_ptr<const FieldOperator>> layer_ops_;
  std::shared_ptr<const FieldOperator> output_op_;
};

/// Ten equal detector squares on a 2 x 5 layout centered on the grid.
std::vector<ops::Region> default_detector_layout(std::size_t n, std::size_t classes = 10);

/// Model parameters recorded on a tape.
struct BoundParameters {
  std::vector<std::optional<ad::Variable>> layers;
  std::optional<ad::Variable> decoder;
};

/// Records every parameter block; as trainable leaves when requested,
/// otherwise as constants.
BoundParameters bind_parameters(ad::Tape& tape, const Model& model, bool trainable = true);

struct ForwardTrace {
  ad::Variable field;      // pre-detector field
  ad::Variable intensity;  // detector image
  ad::Variable output;     // readout
};

ad::Variable encode_input(ad::Tape& tape, const Model& model, const RealTensor& input);
/// Propagation and modulation only, starting from a field on the tape.
ad::Variable run_optics(const Model& model, const BoundParameters& params, ad::Variable field);
ForwardTrace forward(ad::Tape& tape, const Model& model, const BoundParameters& params,
                     const RealTensor& input);

/// Soft realization of every binary mask in layer order.
std::vector<ad::Variable> soft_binary_masks(const Model& model, const BoundParameters& params);

/// Readout output for one input image.
RealTensor forward(const Model& model, const RealTensor& input);
/// Field just before the detector.
ComplexField forward_field(const Model& model, const RealTensor& input);
/// Pushes an arbitrary field through the optical stack.
ComplexField propagate_optics(const Model& model, const ComplexField& field);
RealTensor sense_intensity(const ComplexField& field);

/// Intensity response to a point source, normalized to unit sum.
RealTensor compute_psf(const Model& model, std::size_t i, std::size_t j);

constexpr std::size_t kMaxSensingGrid = 16;

/// Column k is the vectorized pre-detector field for a unit field at pixel k.
ComplexTensor materialize_sensing_matrix(const Model& model,
                                         std::size_t max_grid = kMaxSensingGrid);
ComplexTensor apply_sensing_matrix(const ComplexTensor& h, const ComplexTensor& f);
/// H^T g: lifts a measurement back to the input dimensions.
ComplexTensor transpose_lift(const ComplexTensor& h, const ComplexTensor& g);

}  // namespace wavecoder
