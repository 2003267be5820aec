#include "wavecoder/regularizers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wavecoder {

void RegularizerConfig::validate() const {
  for (const RhoSchedule* s : {&binary, &extra}) {
    if (!(s->rho0 >= 0.0)) throw std::invalid_argument("regularizer: rho0 must be >= 0");
    if (!(s->growth >= 1.0)) throw std::invalid_argument("regularizer: growth must be >= 1");
    if (!(s->rho_max >= 0.0)) throw std::invalid_argument("regularizer: rho_max must be >= 0");
  }
  const bool wants_tr = kind == RegularizerKind::BinaryTransmittance;
  const bool has_tr = target_transmittance >= 0.0;
  if (wants_tr && !has_tr) {
    throw std::invalid_argument("regularizer: BinaryTransmittance requires a target transmittance");
  }
  if (!wants_tr && has_tr) {
    throw std::invalid_argument("regularizer: target transmittance only applies to BinaryTransmittance");
  }
  if (has_tr && target_transmittance > 1.0) {
    throw std::invalid_argument("regularizer: target transmittance must lie in [0,1]");
  }
  const bool wants_s =
      kind == RegularizerKind::BinaryCorrelation || kind == RegularizerKind::BinaryShots;
  if (wants_s && shot_count < 1) {
    throw std::invalid_argument("regularizer: shot count required for correlation/shots");
  }
  if (!wants_s && shot_count != 0) {
    throw std::invalid_argument("regularizer: shot count only applies to correlation/shots");
  }
}

// Scalar penalties accumulate in long double: the transmittance and
// correlation terms cancel heavily near their minima.
using Acc = long double;

double reg_binary(std::span<const double> phi) {
  if (phi.empty()) return 0.0;
  Acc sum = 0.0L;
  for (double v : phi) {
    const Acc p = v;
    sum += p * p * (p - 1.0L) * (p - 1.0L);
  }
  return static_cast<double>(sum / static_cast<Acc>(phi.size()));
}

double reg_correlation(const std::vector<std::span<const double>>& phis) {
  if (phis.size() < 2) throw std::invalid_argument("reg_correlation: needs at least two masks");
  const std::size_t n = phis.front().size();
  for (const auto& p : phis) {
    if (p.size() != n) throw std::invalid_argument("reg_correlation: mask lengths differ");
  }
  if (n == 0) return 0.0;
  Acc sum = 0.0L;
  for (std::size_t l = 0; l < n; ++l) {
    Acc prod = 1.0L;
    for (const auto& p : phis) prod *= p[l];
    sum += prod;
  }
  return static_cast<double>(sum / static_cast<Acc>(n));
}

double reg_transmittance(std::span<const double> phi, double target) {
  if (!(target >= 0.0 && target <= 1.0)) {
    throw std::invalid_argument("reg_transmittance: target must lie in [0,1]");
  }
  if (phi.empty()) return target * target;
  Acc sum = 0.0L;
  for (double p : phi) sum += p;
  const Acc d = sum / static_cast<Acc>(phi.size()) - target;
  return static_cast<double>(d * d);
}

double reg_shots(const std::vector<std::span<const double>>& phis) {
  Acc total = 0.0L;
  for (const auto& p : phis) {
    Acc sq = 0.0L;
    for (double v : p) sq += static_cast<Acc>(v) * v;
    total += std::sqrt(sq);
  }
  return static_cast<double>(total);
}

double reg_decoder_weights(std::span<const double> theta, DecoderNorm norm) {
  double acc = 0.0;
  if (norm == DecoderNorm::L1) {
    for (double t : theta) acc += std::abs(t);
    return acc;
  }
  for (double t : theta) acc += t * t;
  return std::sqrt(acc);
}

double rho_schedule(std::size_t epoch, const RhoSchedule& schedule) {
  if (!(schedule.growth >= 1.0)) throw std::invalid_argument("rho_schedule: growth must be >= 1");
  if (schedule.rho0 == 0.0) return 0.0;
  const double rho = schedule.rho0 * std::pow(schedule.growth, static_cast<double>(epoch));
  return std::min(rho, schedule.rho_max);
}

}  // namespace wavecoder
