#include "wavecoder/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "wavecoder/ops.hpp"
#include "wavecoder/parallel.hpp"

namespace wavecoder {

namespace {

void check_batch(const Dataset& data, std::span<const std::size_t> batch) {
  if (batch.empty()) throw std::invalid_argument("objective: empty batch");
  for (std::size_t i : batch) {
    if (i >= data.size()) throw std::out_of_range("objective: batch index out of range");
  }
}

void add_into(ad::Gradients& total, const ad::Gradients& part) {
  for (const auto& [name, g] : part) {
    auto [it, inserted] = total.try_emplace(name, g);
    if (!inserted) {
      for (std::size_t k = 0; k < g.size(); ++k) it->second[k] += g[k];
    }
  }
}

ad::Variable accumulate_term(const ad::Variable& acc, const ad::Variable& term, double weight) {
  const auto scaled = ops::scale(term, weight);
  return acc.valid() ? ops::add(acc, scaled) : scaled;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

ad::Variable task_loss(const ad::Variable& output, const Dataset& data, std::size_t index,
                       const ObjectiveConfig& cfg) {
  if (cfg.task == Task::Classification) {
    if (!data.has_labels()) throw std::invalid_argument("classification needs labels");
    return ops::softmax_cross_entropy(ops::scale(output, cfg.score_scale), data.labels.at(index));
  }
  if (!data.has_targets()) throw std::invalid_argument("reconstruction needs target images");
  return ops::mse(output, data.targets.at(index));
}

ad::Variable regularization(const Model& model, const BoundParameters& params,
                            const ObjectiveConfig& cfg, std::size_t epoch) {
  const auto& reg = cfg.reg;
  ad::Variable total;
  if (reg.kind != RegularizerKind::None) {
    reg.validate();
    const double rho_b = rho_schedule(epoch, reg.binary);
    const double rho_x = rho_schedule(epoch, reg.extra);
    const auto masks = soft_binary_masks(model, params);
    if (masks.empty()) throw std::invalid_argument("regularizer configured but model has no binary mask");
    if (rho_b != 0.0) {
      for (const auto& m : masks) total = accumulate_term(total, ops::reg_binary(m), rho_b);
    }
    if (rho_x != 0.0) {
      switch (reg.kind) {
        case RegularizerKind::BinaryCorrelation:
        case RegularizerKind::BinaryShots:
          if (masks.size() != reg.shot_count) {
            throw std::invalid_argument("shot count " + std::to_string(reg.shot_count) +
                                        " does not match " + std::to_string(masks.size()) +
                                        " binary masks");
          }
          total = accumulate_term(total,
                                  reg.kind == RegularizerKind::BinaryShots
                                      ? ops::reg_shots(masks)
                                      : ops::reg_correlation(masks),
                                  rho_x);
          break;
        case RegularizerKind::BinaryTransmittance:
          for (const auto& m : masks) {
            total = accumulate_term(total, ops::reg_transmittance(m, reg.target_transmittance), rho_x);
          }
          break;
        default:
          break;
      }
    }
  }
  if (cfg.sigma != 0.0 && params.decoder) {
    total = accumulate_term(total, ops::reg_decoder_weights(*params.decoder, cfg.decoder_norm),
                            cfg.sigma);
  }
  return total;
}

ad::Variable objective_e2e(ad::Tape& tape, const Model& model, const BoundParameters& params,
                           const Dataset& data, std::span<const std::size_t> batch,
                           const ObjectiveConfig& cfg, std::size_t epoch) {
  check_batch(data, batch);
  ad::Variable total;
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i : batch) {
    const auto trace = forward(tape, model, params, data.inputs[i]);
    total = accumulate_term(total, task_loss(trace.output, data, i, cfg), inv);
  }
  const auto reg = regularization(model, params, cfg, epoch);
  return reg.valid() ? ops::add(total, reg) : total;
}

ad::Variable objective_d2nn(ad::Tape& tape, const Model& model, const BoundParameters& params,
                            const Dataset& data, std::span<const std::size_t> batch,
                            const ObjectiveConfig& cfg) {
  if (model.has_decoder()) throw std::invalid_argument("objective_d2nn: model has a trainable decoder");
  ObjectiveConfig task_only = cfg;
  task_only.reg = {};
  task_only.sigma = 0.0;
  return objective_e2e(tape, model, params, data, batch, task_only, 0);
}

LossAndGradient loss_and_gradient(const Model& model, const Dataset& data,
                                  std::span<const std::size_t> batch, const ObjectiveConfig& cfg,
                                  std::size_t epoch) {
  check_batch(data, batch);
  const double inv = 1.0 / static_cast<double>(batch.size());
  std::vector<double> losses(batch.size());
  std::vector<ad::Gradients> grads(batch.size());
  parallel_for(batch.size(), [&](std::size_t s) {
    ad::Tape tape;
    const auto params = bind_parameters(tape, model, true);
    const auto trace = forward(tape, model, params, data.inputs[batch[s]]);
    const auto loss = ops::scale(task_loss(trace.output, data, batch[s], cfg), inv);
    losses[s] = loss.scalar();
    grads[s] = tape.backward(loss);
  });
  LossAndGradient out;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    out.loss += losses[s];
    add_into(out.gradients, grads[s]);
  }
  ad::Tape tape;
  const auto params = bind_parameters(tape, model, true);
  const auto reg = regularization(model, params, cfg, epoch);
  if (reg.valid()) {
    out.loss += reg.scalar();
    add_into(out.gradients, tape.backward(reg));
  }
  return out;
}

double loss_value(const Model& model, const Dataset& data, std::span<const std::size_t> batch,
                  const ObjectiveConfig& cfg, std::size_t epoch) {
  check_batch(data, batch);
  std::vector<double> losses(batch.size());
  parallel_for(batch.size(), [&](std::size_t s) {
    ad::Tape tape;
    const auto params = bind_parameters(tape, model, false);
    const auto trace = forward(tape, model, params, data.inputs[batch[s]]);
    losses[s] = task_loss(trace.output, data, batch[s], cfg).scalar();
  });
  const double inv = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (double l : losses) total += l * inv;
  ad::Tape tape;
  const auto params = bind_parameters(tape, model, false);
  const auto reg = regularization(model, params, cfg, epoch);
  if (reg.valid()) total += reg.scalar();
  return total;
}

void adam_step(std::vector<ParameterRef> params, const ad::Gradients& grads, OptimizerState& state) {
  const auto& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (const auto& p : params) {
    const auto git = grads.find(p.name);
    if (git == grads.end()) continue;
    const RealTensor& g = git->second;
    require_same_shape(g, *p.value, "adam gradient for " + p.name);
    auto& m = state.m.try_emplace(p.name, RealTensor(g.shape)).first->second;
    auto& v = state.v.try_emplace(p.name, RealTensor(g.shape)).first->second;
    require_same_shape(m, g, "adam moment for " + p.name);
    const double lr = p.decoder ? c.decoder_learning_rate : c.learning_rate;
    for (std::size_t k = 0; k < g.size(); ++k) {
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      (*p.value)[k] -= lr * mhat / (std::sqrt(vhat) + c.epsilon);
    }
  }
}

TrainingReport train(Model& model, const Dataset& train_set, const Dataset& val_set,
                     const TrainConfig& cfg, const EpochCallback& on_epoch) {
  if (train_set.empty()) throw std::invalid_argument("train: empty dataset");
  if (cfg.batch_size == 0) throw std::invalid_argument("train: batch size must be positive");
  train_set.validate();
  cfg.objective.reg.validate();
  const Dataset& val = val_set.empty() ? train_set : val_set;

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(train_set.size());
  OptimizerState state;
  state.config = cfg.adam;
  TrainingReport report;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t steps = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, order.size() - begin);
      const std::span<const std::size_t> batch(order.data() + begin, count);
      const auto lg = loss_and_gradient(model, train_set, batch, cfg.objective, epoch);
      if (!std::isfinite(lg.loss)) {
        throw TrainingError("non-finite loss " + format_double(lg.loss) + " at epoch " +
                            std::to_string(epoch) + " step " + std::to_string(steps));
      }
      adam_step(model.parameters(), lg.gradients, state);
      loss_sum += lg.loss;
      ++steps;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(steps);
    const Metrics metrics = evaluate(model, val, cfg.objective.task);
    rec.val_metric = cfg.objective.task == Task::Classification ? metrics.accuracy : metrics.mse;
    rec.rho = cfg.objective.reg.kind == RegularizerKind::None
                  ? 0.0
                  : rho_schedule(epoch, cfg.objective.reg.binary);
    report.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  for (std::size_t k = 0; k < model.layer_count(); ++k) report.masks.push_back(layer_snapshot(model, k));
  return report;
}

void write_report_csv(const std::filesystem::path& path, const TrainingReport& report) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "epoch,train_loss,val_metric,rho\n";
  for (const auto& r : report.epochs) {
    os << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.val_metric) << ','
       << format_double(r.rho) << '\n';
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

std::string Metrics::psnr_string() const {
  if (exact) return "exact";
  return format_double(psnr);
}

Metrics evaluate(const Model& model, const Dataset& data, Task task) {
  if (data.empty()) throw std::invalid_argument("evaluate: empty dataset");
  std::vector<RealTensor> outputs(data.size());
  parallel_for(data.size(), [&](std::size_t i) { outputs[i] = forward(model, data.inputs[i]); });
  Metrics m;
  if (task == Task::Classification) {
    if (!data.has_labels()) throw std::invalid_argument("evaluate: classification needs labels");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& s = outputs[i].data;
      const auto best = static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
      if (best == data.labels[i]) ++correct;
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    return m;
  }
  if (!data.has_targets()) throw std::invalid_argument("evaluate: reconstruction needs targets");
  double se = 0.0;
  double peak = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    require_same_shape(outputs[i], data.targets[i], "evaluate");
    for (std::size_t k = 0; k < outputs[i].size(); ++k) {
      const double d = outputs[i][k] - data.targets[i][k];
      se += d * d;
      peak = std::max(peak, std::abs(data.targets[i][k]));
    }
    count += outputs[i].size();
  }
  m.mse = se / static_cast<double>(count);
  if (m.mse == 0.0) {
    m.exact = true;
    m.psnr = std::numeric_limits<double>::infinity();
  } else {
    if (peak == 0.0) peak = 1.0;
    m.psnr = 10.0 * std::log10(peak * peak / m.mse);
  }
  return m;
}

GradientCheckResult gradient_check(Model& model, const Dataset& data,
                                   std::span<const std::size_t> batch, const ObjectiveConfig& cfg,
                                   double h) {
  const auto analytic = loss_and_gradient(model, data, batch, cfg, 0);
  GradientCheckResult result;
  for (const auto& p : model.parameters()) {
    if (p.straight_through) {
      result.exempt.push_back(p.name);
      continue;
    }
    RealTensor* target = p.value;
    const RealTensor saved = *target;
    auto f = [&](const RealTensor& x) {
      *target = x;
      return loss_value(model, data, batch, cfg, 0);
    };
    const RealTensor numeric = ad::finite_diff_gradient(f, saved, h);
    *target = saved;
    const double err = ad::max_relative_error(analytic.gradients.at(p.name), numeric);
    result.block_errors[p.name] = err;
    result.max_error = std::max(result.max_error, err);
  }
  return result;
}

RealTensor layer_snapshot(const Model& model, std::size_t k) {
  return std::visit(
      [&](const auto& e) -> RealTensor {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, BinaryMask>) {
          return e.hard ? realize_binary_hard(e) : realize_binary_soft(e);
        } else if constexpr (std::is_same_v<T, SelectorMask>) {
          const RealTensor resp = realize_selector(e, e.temperature);
          const std::size_t n = resp.shape[0];
          const std::size_t w = resp.shape[2];
          RealTensor out({n, n});
          for (std::size_t p = 0; p < n * n; ++p) out[p] = resp[p * w + e.band];
          return out;
        } else {
          const ComplexTensor phi = realize(e, model.grid());
          RealTensor out(phi.shape);
          for (std::size_t p = 0; p < phi.size(); ++p) {
            double a = std::arg(phi[p]);
            if (a < 0.0) a += 2.0 * std::numbers::pi;
            out[p] = a;
          }
          return out;
        }
      },
      model.layer(k).element);
}

namespace {

constexpr char kParamMagic[4] = {'W', 'P', 'R', 'M'};

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::string& what) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw std::runtime_error("parameter file truncated while reading " + what);
  }
  return v;
}

}  // namespace

void save_parameters(const std::filesystem::path& path, Model& model) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  const auto params = model.parameters();
  os.write(kParamMagic, 4);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(p.name.size()));
    os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(p.value->shape.size()));
    for (std::size_t d : p.value->shape) put<std::uint64_t>(os, d);
    for (double v : p.value->data) put<double>(os, v);
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

void load_parameters(const std::filesystem::path& path, Model& model) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kParamMagic, 4) != 0) {
    throw std::runtime_error(path.string() + ": not a parameter file");
  }
  auto params = model.parameters();
  const auto count = get<std::uint32_t>(is, "block count");
  if (count != params.size()) throw std::runtime_error(path.string() + ": parameter block count mismatch");
  for (auto& p : params) {
    const auto len = get<std::uint32_t>(is, "name length");
    std::string name(len, '\0');
    if (!is.read(name.data(), len)) throw std::runtime_error("parameter file truncated in name");
    if (name != p.name) throw std::runtime_error("parameter file: expected block " + p.name + ", found " + name);
    const auto dims = get<std::uint32_t>(is, "rank");
    std::vector<std::size_t> shape(dims);
    for (auto& d : shape) d = get<std::uint64_t>(is, "shape");
    if (shape != p.value->shape) throw std::runtime_error("parameter file: shape mismatch for " + name);
    for (auto& v : p.value->data) v = get<double>(is, name);
  }
}

}  // namespace wavecoder
