#ifndef COVERT_RELAY_LINK_LAYER_HPP
#define COVERT_RELAY_LINK_LAYER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "covert_relay/channel_model.hpp"
#include "covert_relay/params.hpp"

namespace covert_relay {

/// Decision variables: rho splits phase-1 power between the source (rho) and
/// the destination jammer (1 - rho); xi splits phase-2 power between the
/// source jammer (xi) and the relay (1 - xi).
struct PowerSplit {
  double rho = 0.5;
  double xi = 0.5;
};

inline void validate(const PowerSplit& s) {
  if (!(s.rho >= 0.0 && s.rho <= 1.0)) throw std::invalid_argument("PowerSplit: rho outside [0, 1]");
  if (!(s.xi >= 0.0 && s.xi <= 1.0)) throw std::invalid_argument("PowerSplit: xi outside [0, 1]");
}

enum class Hypothesis { kSilent, kTransmit };
enum class SinrModel { kExact, kHighSnr };

/// gamma_sr = P |w^H h_sr|^2 / sigma^2 and gamma_rd = P |h_rd|^2 / sigma^2.
struct LinkGains {
  double gamma_sr = 0.0;
  double gamma_rd = 0.0;

  double varsigma() const { return gamma_sr / gamma_rd; }
};

inline LinkGains link_gains(const CVector& h_sr, cdouble h_rd, const SystemParams& params) {
  // MRT: |w^H h_sr|^2 = ||h_sr||^2
  return {params.power * h_sr.squaredNorm() / params.noise,
          params.power * std::norm(h_rd) / params.noise};
}

/// Relay gain G_r. bf_gain_sr = |w^H h_sr|^2, gain_rd = |h_rd|^2.
inline double amplification_factor(const PowerSplit& split, double power, double noise,
                                   double bf_gain_sr, double gain_rd, Hypothesis hypothesis) {
  validate(split);
  double received = (1.0 - split.rho) * power * gain_rd + noise;
  if (hypothesis == Hypothesis::kTransmit) received += split.rho * power * bf_gain_sr;
  if (!(received > 0.0)) throw std::domain_error("amplification_factor: non-positive received power");
  return std::sqrt((1.0 - split.xi) * power / received);
}

inline double sinr_destination(const PowerSplit& split, const LinkGains& g, SinrModel model,
                               Hypothesis hypothesis = Hypothesis::kTransmit) {
  validate(split);
  if (hypothesis == Hypothesis::kSilent || split.rho == 0.0) return 0.0;
  const double rho = split.rho;
  const double xi = split.xi;
  if (model == SinrModel::kExact) {
    const double den = rho * g.gamma_sr + (2.0 - rho - xi) * g.gamma_rd + 1.0;
    if (!(den > 0.0)) throw std::domain_error("sinr_destination: non-positive denominator");
    return rho * g.gamma_sr * g.gamma_rd * (1.0 - xi) / den;
  }
  const double vs = g.varsigma();
  const double den = rho * vs + 2.0 - rho - xi;
  if (!(den > 0.0)) throw std::domain_error("sinr_destination: non-positive denominator");
  return rho * vs * g.gamma_rd * (1.0 - xi) / den;
}

/// Relay SINR. The high-SNR form drops the relay noise and returns +inf at
/// rho = 1 (no destination jamming).
inline double sinr_relay(const PowerSplit& split, const LinkGains& g, SinrModel model,
                         Hypothesis hypothesis = Hypothesis::kTransmit) {
  validate(split);
  if (hypothesis == Hypothesis::kSilent || split.rho == 0.0) return 0.0;
  const double rho = split.rho;
  if (model == SinrModel::kExact) return rho * g.gamma_sr / ((1.0 - rho) * g.gamma_rd + 1.0);
  if (rho == 1.0) return std::numeric_limits<double>::infinity();
  return rho * g.varsigma() / (1.0 - rho);
}

/// (pr_t / 2) [log2(1 + gamma_d) - log2(1 + gamma_e)], optionally clamped at 0.
inline double two_phase_rate(double gamma_d, double gamma_e, double pr_t, bool clamp) {
  const double r = 0.5 * pr_t * (std::log2(1.0 + gamma_d) - std::log2(1.0 + gamma_e));
  return clamp ? std::max(r, 0.0) : r;
}

inline double secrecy_rate(const PowerSplit& split, const LinkGains& g, double pr_t, bool clamp,
                           SinrModel model = SinrModel::kHighSnr) {
  if (split.rho == 0.0) return 0.0;
  return two_phase_rate(sinr_destination(split, g, model), sinr_relay(split, g, model), pr_t,
                        clamp);
}

/// Gains seen by a non-selected relay j when relay i is selected.
struct NonselectedGains {
  double gamma_sj_bf = 0.0;  ///< P |w_i^H h_sj|^2 / sigma^2, w_i the MRT beam to relay i
  double gamma_jd = 0.0;     ///< P |h_jd|^2 / sigma^2
  double gamma_si = 0.0;     ///< P ||h_si||^2 / sigma^2
  double gamma_id = 0.0;     ///< P |h_id|^2 / sigma^2
  double gamma_ij = 0.0;     ///< P |h_ij|^2 / sigma^2
  double gamma_sj = 0.0;     ///< P |h_sj,0|^2 / sigma^2, single jamming antenna
};

struct RelayLeakage {
  double phase1 = 0.0;
  double phase2 = 0.0;
};

inline RelayLeakage nonselected_relay_sinrs(const PowerSplit& split, const NonselectedGains& g,
                                            SinrModel model,
                                            Hypothesis hypothesis = Hypothesis::kTransmit) {
  validate(split);
  if (hypothesis == Hypothesis::kSilent) return {};
  const double rho = split.rho;
  const double xi = split.xi;
  RelayLeakage out;
  if (model == SinrModel::kExact) {
    out.phase1 = rho * g.gamma_sj_bf / ((1.0 - rho) * g.gamma_jd + 1.0);
  } else {
    out.phase1 = rho == 1.0 ? std::numeric_limits<double>::infinity()
                            : rho * (g.gamma_sj_bf / g.gamma_jd) / (1.0 - rho);
  }
  const double num = rho * g.gamma_si * g.gamma_ij * (1.0 - xi);
  if (num == 0.0) {
    out.phase2 = 0.0;
  } else {
    const double den = (1.0 - xi) * g.gamma_ij * (1.0 + (1.0 - rho) * g.gamma_id) +
                       (xi * g.gamma_sj + 1.0) * (rho * g.gamma_si + (1.0 - rho) * g.gamma_id + 1.0);
    out.phase2 = num / den;
  }
  return out;
}

/// Gamma_E for non-colluding relays: max of the selected relay's SINR and
/// every other relay's SINR in either phase.
inline double leakage_max(double selected, std::span<const RelayLeakage> others) {
  double m = selected;
  for (const auto& o : others) m = std::max({m, o.phase1, o.phase2});
  return m;
}

inline double leakage_max(std::span<const double> sinrs) {
  if (sinrs.empty()) throw std::invalid_argument("leakage_max: empty relay set");
  return *std::max_element(sinrs.begin(), sinrs.end());
}

inline NonselectedGains nonselected_gains(const ChannelRealization& c, const SystemParams& params,
                                          std::size_t selected, std::size_t other) {
  const double scale = params.power / params.noise;
  const CVector w = mrt_weights(c.h_sr[selected]);
  NonselectedGains g;
  g.gamma_sj_bf = scale * std::norm(w.dot(c.h_sr[other]));
  g.gamma_jd = scale * std::norm(c.h_rd[other]);
  g.gamma_si = scale * c.h_sr[selected].squaredNorm();
  g.gamma_id = scale * std::norm(c.h_rd[selected]);
  g.gamma_ij = scale * std::norm(c.h_rr[selected][other]);
  g.gamma_sj = scale * std::norm(c.h_sr[other](0));
  return g;
}

/// Exact secrecy rate with relay `selected` forwarding and every other relay
/// eavesdropping in both phases.
inline double multi_relay_secrecy_rate(const PowerSplit& split, const ChannelRealization& c,
                                       const SystemParams& params, std::size_t selected,
                                       bool clamp = true) {
  if (split.rho == 0.0) return 0.0;
  const LinkGains g = link_gains(c.h_sr[selected], c.h_rd[selected], params);
  std::vector<RelayLeakage> others;
  for (std::size_t j = 0; j < c.h_sr.size(); ++j) {
    if (j == selected) continue;
    others.push_back(nonselected_relay_sinrs(split, nonselected_gains(c, params, selected, j),
                                             SinrModel::kExact));
  }
  const double gamma_e = leakage_max(sinr_relay(split, g, SinrModel::kExact), others);
  return two_phase_rate(sinr_destination(split, g, SinrModel::kExact), gamma_e, params.pr_t, clamp);
}

}  // namespace covert_relay

#endif  // COVERT_RELAY_LINK_LAYER_HPP
