#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavecoder/autodiff.hpp"
#include "wavecoder/dataset.hpp"
#include "wavecoder/model.hpp"
#include "wavecoder/regularizers.hpp"

namespace wavecoder {

enum class Task { Classification, Reconstruction };

struct ObjectiveConfig {
  Task task = Task::Classification;
  /// Multiplies readout scores before the softmax.
  double score_scale = 1.0;
  RegularizerConfig reg;
  double sigma = 0.0;
  DecoderNorm decoder_norm = DecoderNorm::L2;
};

/// Task loss of one sample's readout.
ad::Variable task_loss(const ad::Variable& output, const Dataset& data, std::size_t index,
                       const ObjectiveConfig& cfg);

/// Mask and decoder penalties at the given epoch. Returns an invalid Variable
/// when every weight is zero.
ad::Variable regularization(const Model& model, const BoundParameters& params,
                            const ObjectiveConfig& cfg, std::size_t epoch);

/// Mean task loss over the batch plus rho R(soft masks) plus sigma R(theta),
/// recorded on one tape.
ad::Variable objective_e2e(ad::Tape& tape, const Model& model, const BoundParameters& params,
                           const Dataset& data, std::span<const std::size_t> batch,
                           const ObjectiveConfig& cfg, std::size_t epoch);

/// Mean task loss with only optical parameters. Rejects models with a decoder.
ad::Variable objective_d2nn(ad::Tape& tape, const Model& model, const BoundParameters& params,
                            const Dataset& data, std::span<const std::size_t> batch,
                            const ObjectiveConfig& cfg);

struct LossAndGradient {
  double loss = 0.0;
  ad::Gradients gradients;
};

/// Same value as objective_e2e, evaluated with one tape per sample in
/// parallel. Per-sample gradients are summed in batch order, so the result
/// does not depend on scheduling.
LossAndGradient loss_and_gradient(const Model& model, const Dataset& data,
                                  std::span<const std::size_t> batch, const ObjectiveConfig& cfg,
                                  std::size_t epoch);

/// Objective value only.
double loss_value(const Model& model, const Dataset& data, std::span<const std::size_t> batch,
                  const ObjectiveConfig& cfg, std::size_t epoch);

struct AdamConfig {
  double learning_rate = 0.01;
  double decoder_learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  AdamConfig config;
  std::map<std::string, RealTensor> m;
  std::map<std::string, RealTensor> v;
  std::uint64_t step = 0;
};

/// One Adam update of every parameter block that has a gradient.
void adam_step(std::vector<ParameterRef> params, const ad::Gradients& grads, OptimizerState& state);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_metric = 0.0;
  double rho = 0.0;
};

struct TrainConfig {
  std::size_t epochs = 0;
  std::size_t batch_size = 32;
  AdamConfig adam;
  std::uint64_t seed = 0;
  ObjectiveConfig objective;
};

struct TrainingReport {
  std::vector<EpochRecord> epochs;
  /// Realized coefficients of every layer after training.
  std::vector<RealTensor> masks;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Shuffled mini-batch Adam training. The validation metric is accuracy for
/// classification and MSE for reconstruction; the validation set may be
/// empty, in which case the metric is taken on the training set.
TrainingReport train(Model& model, const Dataset& train_set, const Dataset& val_set,
                     const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Writes the report as CSV: epoch,train_loss,val_metric,rho.
void write_report_csv(const std::filesystem::path& path, const TrainingReport& report);

struct Metrics {
  double accuracy = 0.0;  // classification
  double mse = 0.0;       // reconstruction
  double psnr = 0.0;      // +inf when mse is zero
  bool exact = false;
  std::string psnr_string() const;
};

Metrics evaluate(const Model& model, const Dataset& data, Task task);

struct GradientCheckResult {
  double max_error = 0.0;
  std::map<std::string, double> block_errors;
  std::vector<std::string> exempt;  // straight-through blocks, not checked
};

GradientCheckResult gradient_check(Model& model, const Dataset& data,
                                   std::span<const std::size_t> batch, const ObjectiveConfig& cfg,
                                   double h = 1e-6);

/// Realized transmission of layer k as a real image: phase for phase-like
/// elements, amplitude for binary and selector elements.
RealTensor layer_snapshot(const Model& model, std::size_t k);

void save_parameters(const std::filesystem::path& path, Model& model);
void load_parameters(const std::filesystem::path& path, Model& model);

}  // namespace wavecoder
