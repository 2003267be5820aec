#include "wavecoder/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

namespace wavecoder::ops {

using ad::Tape;
using ad::Value;

namespace {

Tape& tape_of(const Variable& v) {
  if (!v.valid()) throw ad::TapeError("operation on an unbound variable");
  return *v.tape();
}

const RealTensor& R(const Value& v) { return std::get<RealTensor>(v); }
const ComplexTensor& C(const Value& v) { return std::get<ComplexTensor>(v); }

RealTensor scalar_tensor(double x) { return RealTensor({1}, x); }

std::span<const double> view(const Variable& v) {
  const RealTensor& r = v.real();
  return {r.data.data(), r.data.size()};
}

}  // namespace

Variable add(const Variable& a, const Variable& b) {
  require_same_shape(a.real(), b.real(), "add");
  RealTensor out = a.real();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += b.real()[k];
  return tape_of(a).record("add", {a, b}, std::move(out), [a, b](Tape& t, const Value& g, const Value&) {
    t.accumulate(a, R(g));
    t.accumulate(b, R(g));
  });
}

Variable sub(const Variable& a, const Variable& b) {
  require_same_shape(a.real(), b.real(), "sub");
  RealTensor out = a.real();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] -= b.real()[k];
  return tape_of(a).record("sub", {a, b}, std::move(out), [a, b](Tape& t, const Value& g, const Value&) {
    t.accumulate(a, R(g));
    RealTensor neg = R(g);
    for (auto& x : neg.data) x = -x;
    t.accumulate(b, std::move(neg));
  });
}

Variable mul(const Variable& a, const Variable& b) {
  require_same_shape(a.real(), b.real(), "mul");
  RealTensor out = a.real();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= b.real()[k];
  return tape_of(a).record("mul", {a, b}, std::move(out), [a, b](Tape& t, const Value& g, const Value&) {
    const RealTensor& gg = R(g);
    RealTensor ga = b.real();
    RealTensor gb = a.real();
    for (std::size_t k = 0; k < gg.size(); ++k) {
      ga[k] *= gg[k];
      gb[k] *= gg[k];
    }
    t.accumulate(a, std::move(ga));
    t.accumulate(b, std::move(gb));
  });
}

Variable scale(const Variable& a, double c) {
  RealTensor out = a.real();
  for (auto& x : out.data) x *= c;
  return tape_of(a).record("scale", {a}, std::move(out), [a, c](Tape& t, const Value& g, const Value&) {
    RealTensor ga = R(g);
    for (auto& x : ga.data) x *= c;
    t.accumulate(a, std::move(ga));
  });
}

Variable sum(const Variable& a) {
  double s = 0.0;
  for (double x : a.real().data) s += x;
  return tape_of(a).record("sum", {a}, scalar_tensor(s), [a](Tape& t, const Value& g, const Value&) {
    t.accumulate(a, RealTensor(a.real().shape, R(g)[0]));
  });
}

Variable mean(const Variable& a) {
  const double n = static_cast<double>(a.real().size());
  return scale(sum(a), 1.0 / n);
}

Variable sigmoid(const Variable& logits) {
  RealTensor out(logits.real().shape);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = wavecoder::sigmoid(logits.real()[k]);
  return tape_of(logits).record("sigmoid", {logits}, std::move(out),
                                [logits](Tape& t, const Value& g, const Value& out) {
                                  const RealTensor& s = R(out);
                                  RealTensor gl = R(g);
                                  for (std::size_t k = 0; k < gl.size(); ++k) gl[k] *= s[k] * (1.0 - s[k]);
                                  t.accumulate(logits, std::move(gl));
                                });
}

Variable threshold_straight_through(const Variable& logits) {
  RealTensor out(logits.real().shape);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = logits.real()[k] >= 0.0 ? 1.0 : 0.0;
  return tape_of(logits).record("threshold_st", {logits}, std::move(out),
                                [logits](Tape& t, const Value& g, const Value&) { t.accumulate(logits, R(g)); });
}

Variable reshape(const Variable& a, std::vector<std::size_t> shape) {
  if (RealTensor::count(shape) != a.real().size()) {
    throw std::invalid_argument("reshape: element count changes");
  }
  RealTensor out(shape, a.real().data);
  return tape_of(a).record("reshape", {a}, std::move(out), [a](Tape& t, const Value& g, const Value&) {
    t.accumulate(a, RealTensor(a.real().shape, R(g).data));
  });
}

Variable matvec(const Variable& weights, const Variable& x) {
  const RealTensor& w = weights.real();
  const RealTensor& xv = x.real();
  if (w.shape.size() != 2 || w.shape[1] != xv.size()) {
    throw std::invalid_argument("matvec: weights " + shape_string(w.shape) +
                                " incompatible with input of " + std::to_string(xv.size()) +
                                " elements");
  }
  const std::size_t m = w.shape[0];
  const std::size_t k = w.shape[1];
  RealTensor out({m});
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    const double* row = &w.data[i * k];
    for (std::size_t j = 0; j < k; ++j) acc += row[j] * xv[j];
    out[i] = acc;
  }
  return tape_of(weights).record(
      "matvec", {weights, x}, std::move(out), [weights, x, m, k](Tape& t, const Value& g, const Value&) {
        const RealTensor& gy = R(g);
        const RealTensor& w = weights.real();
        const RealTensor& xv = x.real();
        if (weights.requires_grad()) {
          RealTensor gw(w.shape);
          for (std::size_t i = 0; i < m; ++i) {
            double* row = &gw.data[i * k];
            for (std::size_t j = 0; j < k; ++j) row[j] = gy[i] * xv[j];
          }
          t.accumulate(weights, std::move(gw));
        }
        if (x.requires_grad()) {
          RealTensor gx(xv.shape);
          for (std::size_t i = 0; i < m; ++i) {
            const double* row = &w.data[i * k];
            for (std::size_t j = 0; j < k; ++j) gx[j] += gy[i] * row[j];
          }
          t.accumulate(x, std::move(gx));
        }
      });
}

Variable phase_to_complex(const Variable& psi, const RealTensor& amplitude) {
  const RealTensor& p = psi.real();
  require_same_shape(p, amplitude, "phase_to_complex");
  ComplexTensor out(p.shape);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::polar(amplitude[k], p[k]);
  return tape_of(psi).record("phase_to_complex", {psi}, std::move(out),
                             [psi](Tape& t, const Value& g, const Value& out) {
    // dz/dpsi = j z
    const ComplexTensor& z = C(out);
    const ComplexTensor& gz = C(g);
    RealTensor gp(z.shape);
    for (std::size_t k = 0; k < gp.size(); ++k) {
      gp[k] = (std::conj(gz[k]) * Complex(0.0, 1.0) * z[k]).real();
    }
    t.accumulate(psi, std::move(gp));
  });
}

Variable to_complex(const Variable& real) {
  const RealTensor& r = real.real();
  ComplexTensor out(r.shape);
  for (std::size_t k = 0; k < r.size(); ++k) out[k] = r[k];
  return tape_of(real).record("to_complex", {real}, std::move(out),
                              [real](Tape& t, const Value& g, const Value&) {
                                const ComplexTensor& gz = C(g);
                                RealTensor gr(gz.shape);
                                for (std::size_t k = 0; k < gr.size(); ++k) gr[k] = gz[k].real();
                                t.accumulate(real, std::move(gr));
                              });
}

Variable modulate(const Variable& field, const Variable& phi) {
  const ComplexTensor& u = field.complex();
  const ComplexTensor& p = phi.complex();
  require_same_shape(u, p, "modulate");
  ComplexTensor out = u;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= p[k];
  return tape_of(field).record("modulate", {field, phi}, std::move(out),
                               [field, phi](Tape& t, const Value& g, const Value&) {
                                 const ComplexTensor& gz = C(g);
                                 if (field.requires_grad()) {
                                   ComplexTensor gu = gz;
                                   const ComplexTensor& p = phi.complex();
                                   for (std::size_t k = 0; k < gu.size(); ++k) gu[k] *= std::conj(p[k]);
                                   t.accumulate(field, std::move(gu));
                                 }
                                 if (phi.requires_grad()) {
                                   ComplexTensor gp = gz;
                                   const ComplexTensor& u = field.complex();
                                   for (std::size_t k = 0; k < gp.size(); ++k) gp[k] *= std::conj(u[k]);
                                   t.accumulate(phi, std::move(gp));
                                 }
                               });
}

Variable modulate_real(const Variable& field, const Variable& transmission) {
  const ComplexTensor& u = field.complex();
  const RealTensor& a = transmission.real();
  require_same_shape(u, a, "modulate");
  ComplexTensor out = u;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= a[k];
  return tape_of(field).record(
      "modulate_real", {field, transmission}, std::move(out),
      [field, transmission](Tape& t, const Value& g, const Value&) {
        const ComplexTensor& gz = C(g);
        if (field.requires_grad()) {
          ComplexTensor gu = gz;
          const RealTensor& a = transmission.real();
          for (std::size_t k = 0; k < gu.size(); ++k) gu[k] *= a[k];
          t.accumulate(field, std::move(gu));
        }
        if (transmission.requires_grad()) {
          const ComplexTensor& u = field.complex();
          RealTensor ga(u.shape);
          for (std::size_t k = 0; k < ga.size(); ++k) ga[k] = (std::conj(gz[k]) * u[k]).real();
          t.accumulate(transmission, std::move(ga));
        }
      });
}

Variable propagate(const Variable& field, std::shared_ptr<const FieldOperator> op) {
  ComplexTensor out = op->apply(field.complex());
  return tape_of(field).record("propagate", {field}, std::move(out),
                               [field, op](Tape& t, const Value& g, const Value&) {
                                 t.accumulate(field, op->adjoint(C(g)));
                               });
}

Variable intensity(const Variable& field) {
  const ComplexTensor& u = field.complex();
  RealTensor out(u.shape);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::norm(u[k]);
  return tape_of(field).record("intensity", {field}, std::move(out),
                               [field](Tape& t, const Value& g, const Value&) {
                                 const RealTensor& gi = R(g);
                                 const ComplexTensor& u = field.complex();
                                 ComplexTensor gu(u.shape);
                                 for (std::size_t k = 0; k < gu.size(); ++k) gu[k] = 2.0 * gi[k] * u[k];
                                 t.accumulate(field, std::move(gu));
                               });
}

Variable realize_zernike(const Variable& coeffs, const ZernikeDOE& doe, const Grid& grid,
                         double wavelength) {
  ZernikeDOE current = doe;
  current.coeffs = coeffs.real();
  ComplexTensor out = wavecoder::realize_zernike(current, grid, wavelength);
  const double k = 2.0 * std::numbers::pi * doe.index_delta / wavelength;
  return tape_of(coeffs).record("realize_zernike", {coeffs}, std::move(out),
                                [coeffs, grid, k](Tape& t, const Value& g, const Value& out) {
    // dphi/dc_b = j k Z_b phi inside the disk; Z_b vanishes outside.
    const ComplexTensor& phi = C(out);
    const ComplexTensor& gz = C(g);
    RealTensor gc(coeffs.real().shape);
    for (std::size_t b = 0; b < gc.size(); ++b) {
      const RealTensor zb = zernike_basis(b + 1, grid);
      double acc = 0.0;
      for (std::size_t p = 0; p < zb.size(); ++p) {
        if (zb[p] == 0.0) continue;
        acc += (std::conj(gz[p]) * Complex(0.0, k * zb[p]) * phi[p]).real();
      }
      gc[b] = acc;
    }
    t.accumulate(coeffs, std::move(gc));
  });
}

Variable realize_selector(const Variable& weights, const RealTensor& filter_bank,
                          double temperature) {
  SelectorMask mask{weights.real(), filter_bank, temperature, 0};
  RealTensor out = wavecoder::realize_selector(mask, temperature);
  RealTensor soft = selector_weights(mask, temperature);
  return tape_of(weights).record(
      "realize_selector", {weights}, std::move(out),
      [weights, filter_bank, temperature, soft = std::move(soft)](Tape& t, const Value& g, const Value&) {
        const RealTensor& gr = R(g);
        const std::size_t f = filter_bank.shape[0];
        const std::size_t w = filter_bank.shape[1];
        const std::size_t pixels = soft.size() / f;
        RealTensor gw(soft.shape);
        std::vector<double> gs(f);
        for (std::size_t p = 0; p < pixels; ++p) {
          double dot = 0.0;
          for (std::size_t q = 0; q < f; ++q) {
            double acc = 0.0;
            for (std::size_t b = 0; b < w; ++b) acc += gr[p * w + b] * filter_bank(q, b);
            gs[q] = acc;
            dot += soft[p * f + q] * acc;
          }
          for (std::size_t q = 0; q < f; ++q) {
            gw[p * f + q] = soft[p * f + q] * (gs[q] - dot) / temperature;
          }
        }
        t.accumulate(weights, std::move(gw));
      });
}

Variable select_band(const Variable& response, std::size_t band) {
  const RealTensor& r = response.real();
  if (r.shape.size() != 3 || band >= r.shape[2]) {
    throw std::invalid_argument("select_band: band index out of range");
  }
  const std::size_t w = r.shape[2];
  RealTensor out({r.shape[0], r.shape[1]});
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = r[p * w + band];
  return tape_of(response).record("select_band", {response}, std::move(out),
                                  [response, band, w](Tape& t, const Value& g, const Value&) {
                                    const RealTensor& gs = R(g);
                                    RealTensor gr(response.real().shape);
                                    for (std::size_t p = 0; p < gs.size(); ++p) gr[p * w + band] = gs[p];
                                    t.accumulate(response, std::move(gr));
                                  });
}

Variable region_sums(const Variable& image, const std::vector<Region>& regions) {
  const RealTensor& img = image.real();
  if (img.shape.size() != 2) throw std::invalid_argument("region_sums: expects a 2-D image");
  for (const auto& r : regions) {
    if (r.row + r.height > img.shape[0] || r.col + r.width > img.shape[1]) {
      throw std::invalid_argument("region_sums: region outside the image");
    }
  }
  RealTensor out({regions.size()});
  for (std::size_t q = 0; q < regions.size(); ++q) {
    const Region& r = regions[q];
    double acc = 0.0;
    for (std::size_t i = r.row; i < r.row + r.height; ++i) {
      for (std::size_t j = r.col; j < r.col + r.width; ++j) acc += img(i, j);
    }
    out[q] = acc;
  }
  return tape_of(image).record("region_sums", {image}, std::move(out),
                               [image, regions](Tape& t, const Value& g, const Value&) {
                                 const RealTensor& gs = R(g);
                                 RealTensor gi(image.real().shape);
                                 for (std::size_t q = 0; q < regions.size(); ++q) {
                                   const Region& r = regions[q];
                                   for (std::size_t i = r.row; i < r.row + r.height; ++i) {
                                     for (std::size_t j = r.col; j < r.col + r.width; ++j) gi(i, j) += gs[q];
                                   }
                                 }
                                 t.accumulate(image, std::move(gi));
                               });
}

Variable mse(const Variable& pred, const RealTensor& target) {
  const RealTensor& p = pred.real();
  require_same_shape(p, target, "mse");
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double d = p[k] - target[k];
    acc += d * d;
  }
  const double n = static_cast<double>(p.size());
  return tape_of(pred).record("mse", {pred}, scalar_tensor(acc / n),
                              [pred, target, n](Tape& t, const Value& g, const Value&) {
                                const RealTensor& p = pred.real();
                                RealTensor gp(p.shape);
                                const double c = 2.0 * R(g)[0] / n;
                                for (std::size_t k = 0; k < gp.size(); ++k) gp[k] = c * (p[k] - target[k]);
                                t.accumulate(pred, std::move(gp));
                              });
}

Variable softmax_cross_entropy(const Variable& scores, std::size_t label) {
  const RealTensor& s = scores.real();
  if (label >= s.size()) {
    throw std::invalid_argument("softmax_cross_entropy: label " + std::to_string(label) +
                                " out of range for " + std::to_string(s.size()) + " classes");
  }
  const double peak = *std::max_element(s.data.begin(), s.data.end());
  double total = 0.0;
  for (double x : s.data) total += std::exp(x - peak);
  const double lse = peak + std::log(total);
  return tape_of(scores).record("softmax_xent", {scores}, scalar_tensor(lse - s[label]),
                                [scores, label, lse](Tape& t, const Value& g, const Value&) {
                                  const RealTensor& s = scores.real();
                                  RealTensor gs(s.shape);
                                  for (std::size_t k = 0; k < gs.size(); ++k) {
                                    gs[k] = R(g)[0] * (std::exp(s[k] - lse) - (k == label ? 1.0 : 0.0));
                                  }
                                  t.accumulate(scores, std::move(gs));
                                });
}

Variable reg_binary(const Variable& phi) {
  const double value = wavecoder::reg_binary(view(phi));
  return tape_of(phi).record("reg_binary", {phi}, scalar_tensor(value),
                             [phi](Tape& t, const Value& g, const Value&) {
                               const RealTensor& p = phi.real();
                               const double c = R(g)[0] / static_cast<double>(p.size());
                               RealTensor gp(p.shape);
                               for (std::size_t k = 0; k < gp.size(); ++k) {
                                 const double x = p[k];
                                 gp[k] = c * 2.0 * x * (x - 1.0) * (2.0 * x - 1.0);
                               }
                               t.accumulate(phi, std::move(gp));
                             });
}

Variable reg_correlation(const std::vector<Variable>& phis) {
  if (phis.size() < 2) throw std::invalid_argument("reg_correlation: needs at least two masks");
  std::vector<std::span<const double>> views;
  for (const auto& p : phis) views.push_back(view(p));
  const double value = wavecoder::reg_correlation(views);
  return tape_of(phis.front()).record(
      "reg_correlation", std::span<const Variable>(phis), scalar_tensor(value),
      [phis](Tape& t, const Value& g, const Value&) {
        const std::size_t n = phis.front().real().size();
        const double c = R(g)[0] / static_cast<double>(n);
        for (std::size_t s = 0; s < phis.size(); ++s) {
          RealTensor gp(phis[s].real().shape);
          for (std::size_t l = 0; l < n; ++l) {
            double prod = 1.0;
            for (std::size_t o = 0; o < phis.size(); ++o) {
              if (o != s) prod *= phis[o].real()[l];
            }
            gp[l] = c * prod;
          }
          t.accumulate(phis[s], std::move(gp));
        }
      });
}

Variable reg_transmittance(const Variable& phi, double target) {
  const double value = wavecoder::reg_transmittance(view(phi), target);
  return tape_of(phi).record("reg_transmittance", {phi}, scalar_tensor(value),
                             [phi, target](Tape& t, const Value& g, const Value&) {
                               const RealTensor& p = phi.real();
                               const double n = static_cast<double>(p.size());
                               double mean = 0.0;
                               for (double x : p.data) mean += x;
                               mean /= n;
                               t.accumulate(phi, RealTensor(p.shape, R(g)[0] * 2.0 * (mean - target) / n));
                             });
}

Variable reg_shots(const std::vector<Variable>& phis) {
  if (phis.empty()) throw std::invalid_argument("reg_shots: needs at least one mask");
  std::vector<std::span<const double>> views;
  for (const auto& p : phis) views.push_back(view(p));
  const double value = wavecoder::reg_shots(views);
  return tape_of(phis.front()).record(
      "reg_shots", std::span<const Variable>(phis), scalar_tensor(value),
      [phis](Tape& t, const Value& g, const Value&) {
        for (const auto& p : phis) {
          const RealTensor& v = p.real();
          double sq = 0.0;
          for (double x : v.data) sq += x * x;
          const double norm = std::sqrt(sq);
          RealTensor gp(v.shape);
          // Subgradient 0 at the origin.
          if (norm > 0.0) {
            for (std::size_t k = 0; k < gp.size(); ++k) gp[k] = R(g)[0] * v[k] / norm;
          }
          t.accumulate(p, std::move(gp));
        }
      });
}

Variable reg_decoder_weights(const Variable& theta, DecoderNorm norm) {
  const double value = wavecoder::reg_decoder_weights(view(theta), norm);
  return tape_of(theta).record("reg_decoder", {theta}, scalar_tensor(value),
                               [theta, norm, value](Tape& t, const Value& g, const Value&) {
                                 const RealTensor& v = theta.real();
                                 RealTensor gt(v.shape);
                                 for (std::size_t k = 0; k < gt.size(); ++k) {
                                   if (norm == DecoderNorm::L1) {
                                     gt[k] = v[k] > 0 ? 1.0 : (v[k] < 0 ? -1.0 : 0.0);
                                   } else {
                                     gt[k] = value > 0.0 ? v[k] / value : 0.0;
                                   }
                                   gt[k] *= R(g)[0];
                                 }
                                 t.accumulate(theta, std::move(gt));
                               });
}

}  // namespace wavecoder::ops
