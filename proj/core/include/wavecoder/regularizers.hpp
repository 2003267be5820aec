#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wavecoder {

enum class RegularizerKind { None, Binary, BinaryCorrelation, BinaryTransmittance, BinaryShots };
enum class DecoderNorm { L1, L2 };

/// Exponential weight schedule rho0 * growth^epoch, capped at rho_max.
struct RhoSchedule {
  double rho0 = 0.0;
  double growth = 1.0;
  double rho_max = 1e-2;
};

/// Coded-aperture penalty. Composite kinds are the binary term plus one extra
/// term, each with its own schedule.
struct RegularizerConfig {
  RegularizerKind kind = RegularizerKind::None;
  RhoSchedule binary;
  RhoSchedule extra;
  double target_transmittance = -1.0;  // required for BinaryTransmittance
  std::size_t shot_count = 0;          // required for BinaryCorrelation / BinaryShots

  void validate() const;
};

/// (1/n) sum phi^2 (phi - 1)^2
double reg_binary(std::span<const double> phi);
/// (1/n) sum_l prod_j phi_l^j over S masks of equal length.
double reg_correlation(const std::vector<std::span<const double>>& phis);
/// (mean(phi) - Tr)^2
double reg_transmittance(std::span<const double> phi, double target);
/// sum_j ||phi^j||_2
double reg_shots(const std::vector<std::span<const double>>& phis);
double reg_decoder_weights(std::span<const double> theta, DecoderNorm norm);

double rho_schedule(std::size_t epoch, const RhoSchedule& schedule);

}  // namespace wavecoder
