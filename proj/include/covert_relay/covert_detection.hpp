#ifndef COVERT_RELAY_COVERT_DETECTION_HPP
#define COVERT_RELAY_COVERT_DETECTION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "covert_relay/channel_model.hpp"
#include "covert_relay/detail/scalar_search.hpp"
#include "covert_relay/hypoexponential.hpp"
#include "covert_relay/link_layer.hpp"
#include "covert_relay/params.hpp"
#include "covert_relay/rng.hpp"

namespace covert_relay {

enum class Phase { kFirst = 1, kSecond = 2 };

/// Variances seen by one Willie: from the source, the destination and the
/// forwarding relay.
struct WillieLinks {
  double mu_sw = 0.0;
  double mu_dw = 0.0;
  double mu_rw = 0.0;
};

inline WillieLinks willie_links(const LinkVariances& v, std::size_t relay, std::size_t willie) {
  return {v.mu_sw.at(willie), v.mu_dw.at(willie), v.mu_rw.at(relay).at(willie)};
}

inline std::vector<WillieLinks> willie_links(const LinkVariances& v, std::size_t relay) {
  std::vector<WillieLinks> out;
  for (std::size_t w = 0; w < v.willie_count(); ++w) out.push_back(willie_links(v, relay, w));
  return out;
}

/// Mean received powers at a Willie: lambda_j under both hypotheses (jamming),
/// lambda_s added under transmission (signal).
struct PhaseScales {
  double lambda_j = 0.0;
  double lambda_s = 0.0;
  double sigma2_w = 0.0;
  Phase phase = Phase::kFirst;
};

struct DetectionOutcome {
  double threshold = 0.0;
  double p_fa = 0.0;
  double p_md = 0.0;
  double error_sum = 0.0;
};

inline DetectionOutcome make_outcome(double threshold, double p_fa, double p_md) {
  p_fa = std::clamp(p_fa, 0.0, 1.0);
  p_md = std::clamp(p_md, 0.0, 1.0);
  return {threshold, p_fa, p_md, p_fa + p_md};
}

inline PhaseScales phase_scales(const PowerSplit& split, const SystemParams& params,
                                const WillieLinks& links, Phase phase) {
  validate(split);
  PhaseScales s;
  s.sigma2_w = params.willie_noise;
  s.phase = phase;
  if (phase == Phase::kFirst) {
    s.lambda_j = (1.0 - split.rho) * params.power * links.mu_dw;
    s.lambda_s = split.rho * params.power * links.mu_sw;
  } else {
    s.lambda_j = split.xi * params.power * links.mu_sw;
    s.lambda_s = (1.0 - split.xi) * params.power * links.mu_rw;
  }
  if (!(s.lambda_j > 0.0) || !(s.lambda_s > 0.0)) {
    throw std::domain_error("phase_scales: degenerate detector (zero jamming or zero signal power)");
  }
  return s;
}

namespace detail {

inline constexpr double kEqualScaleGap = 1e-9;
inline constexpr double kScalePerturbation = 1e-6;

inline bool scales_coincide(const PhaseScales& s) {
  return std::abs(s.lambda_s - s.lambda_j) / std::max(s.lambda_s, s.lambda_j) < kEqualScaleGap;
}

/// Evaluates f at lambda_s (1 +- 1e-6) and averages; removes the 0/0 at
/// lambda_s = lambda_j.
template <typename F>
double perturbed_average(const PhaseScales& s, F&& f) {
  PhaseScales up = s;
  PhaseScales down = s;
  up.lambda_s = s.lambda_s * (1.0 + kScalePerturbation);
  down.lambda_s = s.lambda_s * (1.0 - kScalePerturbation);
  return 0.5 * (f(up) + f(down));
}

/// P_FA / P_MD as functions of the threshold excess x = threshold - sigma_w^2.
inline std::pair<double, double> fa_md_excess(const PhaseScales& s, double x) {
  if (x <= 0.0) return {1.0, 0.0};
  const double lj = s.lambda_j;
  const double ls = s.lambda_s;
  const double fa = std::exp(-x / lj);
  const double md = 1.0 + (-ls * std::exp(-x / ls) + lj * std::exp(-x / lj)) / (ls - lj);
  return {fa, md};
}

/// Optimal threshold excess lambda_j lambda_s / (lambda_s - lambda_j) ln(lambda_s / lambda_j).
inline double optimal_excess(const PhaseScales& s) {
  const double lj = s.lambda_j;
  const double ls = s.lambda_s;
  return lj * ls / (ls - lj) * std::log(ls / lj);
}

}  // namespace detail

/// False-alarm and miss-detection probabilities of the energy detector in the
/// n -> infinity limit.
inline DetectionOutcome fa_md(const PhaseScales& s, double threshold) {
  const double x = threshold - s.sigma2_w;
  if (x <= 0.0) return make_outcome(threshold, 1.0, 0.0);
  if (detail::scales_coincide(s)) {
    const double fa = detail::fa_md_excess(s, x).first;
    const double md = detail::perturbed_average(
        s, [x](const PhaseScales& p) { return detail::fa_md_excess(p, x).second; });
    return make_outcome(threshold, fa, md);
  }
  const auto [fa, md] = detail::fa_md_excess(s, x);
  return make_outcome(threshold, fa, md);
}

inline double optimal_threshold(const PhaseScales& s) {
  if (s.lambda_s == s.lambda_j) return s.lambda_j + s.sigma2_w;
  if (detail::scales_coincide(s)) {
    return detail::perturbed_average(s, detail::optimal_excess) + s.sigma2_w;
  }
  return detail::optimal_excess(s) + s.sigma2_w;
}

/// min over the threshold of P_FA + P_MD: the detector evaluated at the
/// closed-form optimal threshold.
inline double min_error_sum(const PhaseScales& s) {
  auto at_optimum = [](const PhaseScales& p) {
    const auto [fa, md] = detail::fa_md_excess(p, detail::optimal_excess(p));
    return std::clamp(fa, 0.0, 1.0) + std::clamp(md, 0.0, 1.0);
  };
  if (detail::scales_coincide(s)) return detail::perturbed_average(s, at_optimum);
  return at_optimum(s);
}

/// ln(lambda_j / lambda_s) * lambda_j / (lambda_s - lambda_j); the detector is
/// covert iff this is <= ln(epsilon).
inline double covert_constraint_lhs(const PhaseScales& s) {
  return std::log(s.lambda_j / s.lambda_s) * s.lambda_j / (s.lambda_s - s.lambda_j);
}

/// Detector with no jamming in the phase: Psi_0 energy is noise only.
inline DetectionOutcome no_jamming_fa_md(double lambda_s, double sigma2_w, double threshold) {
  const double x = threshold - sigma2_w;
  if (x <= 0.0) return make_outcome(threshold, 1.0, 0.0);
  if (lambda_s <= 0.0) return make_outcome(threshold, 0.0, 1.0);
  return make_outcome(threshold, 0.0, -std::expm1(-x / lambda_s));
}

/// Infimum over thresholds of the no-jamming error sum: 0 whenever any signal
/// reaches Willie, 1 when none does.
inline double no_jamming_error_sum(double lambda_s, double sigma2_w) {
  if (!(sigma2_w >= 0.0)) throw std::invalid_argument("no_jamming_error_sum: negative noise");
  return lambda_s > 0.0 ? 0.0 : 1.0;
}

inline double no_jamming_grid_min(double lambda_s, double sigma2_w,
                                  std::span<const double> thresholds) {
  double best = 2.0;
  for (double t : thresholds) best = std::min(best, no_jamming_fa_md(lambda_s, sigma2_w, t).error_sum);
  return best;
}

/// Box form of the two covertness constraints: rho <= rho_ub, xi >= xi_lb.
struct CovertBox {
  double rho_ub = 1.0;
  double xi_lb = 0.0;
  bool feasible = true;
};

inline constexpr double kBoxTolerance = 1e-9;

namespace detail {

/// Reduces two monotone certificates to a box. error1(rho) decreases in rho,
/// error2(xi) increases in xi; each is only called strictly inside (0, 1).
template <typename Error1, typename Error2>
CovertBox certificate_box(Error1&& error1, Error2&& error2, double epsilon) {
  const double target = 1.0 - epsilon;
  CovertBox box;
  auto rho_ok = [&](double rho) { return rho <= 0.0 || (rho < 1.0 && error1(rho) >= target); };
  auto xi_ok = [&](double xi) { return xi >= 1.0 || (xi > 0.0 && error2(xi) >= target); };
  box.rho_ub = bisect_boundary(rho_ok, 0.0, 1.0, kBoxTolerance).first;
  box.xi_lb = bisect_boundary(xi_ok, 0.0, 1.0, kBoxTolerance).second;
  box.feasible = box.rho_ub > 0.0 && box.xi_lb < 1.0;
  return box;
}

}  // namespace detail

/// Largest rho and smallest xi whose exact minimum error sum stays >= 1 - epsilon.
inline CovertBox covert_box_bounds(const SystemParams& params, const WillieLinks& links) {
  validate(params);
  if (!(links.mu_sw > 0.0 && links.mu_dw > 0.0 && links.mu_rw > 0.0)) {
    throw std::invalid_argument("covert_box_bounds: link variances must be > 0");
  }
  auto error1 = [&](double rho) {
    return min_error_sum(phase_scales({rho, 0.5}, params, links, Phase::kFirst));
  };
  auto error2 = [&](double xi) {
    return min_error_sum(phase_scales({0.5, xi}, params, links, Phase::kSecond));
  };
  return detail::certificate_box(error1, error2, params.epsilon);
}

/// Non-colluding Willies: the box every Willie certifies.
inline CovertBox covert_box_bounds(const SystemParams& params, std::span<const WillieLinks> links) {
  if (links.empty()) throw std::invalid_argument("covert_box_bounds: no Willies");
  CovertBox box{1.0, 0.0, true};
  for (const auto& l : links) {
    const CovertBox b = covert_box_bounds(params, l);
    box.rho_ub = std::min(box.rho_ub, b.rho_ub);
    box.xi_lb = std::max(box.xi_lb, b.xi_lb);
  }
  box.feasible = box.rho_ub > 0.0 && box.xi_lb < 1.0;
  return box;
}

inline CovertBox covert_box_bounds(const SystemParams& params, const LinkVariances& v,
                                   std::size_t relay = 0) {
  const auto links = willie_links(v, relay);
  return covert_box_bounds(params, std::span<const WillieLinks>(links));
}

/// Phase-1 worst Willie maximizes mu_sw / mu_dw, phase-2 maximizes mu_rw / mu_sw.
inline std::pair<std::size_t, std::size_t> worst_willie(std::span<const WillieLinks> links) {
  if (links.empty()) throw std::invalid_argument("worst_willie: no Willies");
  std::size_t first = 0;
  std::size_t second = 0;
  for (std::size_t i = 1; i < links.size(); ++i) {
    if (links[i].mu_sw / links[i].mu_dw > links[first].mu_sw / links[first].mu_dw) first = i;
    if (links[i].mu_rw / links[i].mu_sw > links[second].mu_rw / links[second].mu_sw) second = i;
  }
  return {first, second};
}

/// Colluding detection with exact fused energy. Under silence the fusion
/// center sees W sigma_w^2 plus W exponentials of means lambda_j; under
/// transmission the W signal terms join for 2W exponentials.
inline DetectionOutcome colluding_exact_fa_md(std::span<const PhaseScales> willies, double threshold) {
  if (willies.empty()) throw std::invalid_argument("colluding_exact_fa_md: no Willies");
  const double w = static_cast<double>(willies.size());
  const double x = threshold - w * willies.front().sigma2_w;
  if (x <= 0.0) return make_outcome(threshold, 1.0, 0.0);
  std::vector<double> silent;
  std::vector<double> active;
  for (const auto& s : willies) {
    if (!(s.lambda_j > 0.0) || !(s.lambda_s > 0.0)) {
      throw std::domain_error("colluding_exact_fa_md: scales must be > 0");
    }
    silent.push_back(1.0 / s.lambda_j);
    active.push_back(1.0 / s.lambda_j);
  }
  for (const auto& s : willies) active.push_back(1.0 / s.lambda_s);
  if (!rates_distinct(active)) {
    throw std::domain_error(
        "colluding_exact_fa_md: repeated exponential rates; perturb the scales or use the CLT path");
  }
  return make_outcome(threshold, hypoexponential_tail(silent, x), hypoexponential_cdf(active, x));
}

inline DetectionOutcome colluding_exact_fa_md(std::span<const PhaseScales> willies, double threshold,
                                              std::size_t w, double sigma2_w) {
  if (w != willies.size()) throw std::invalid_argument("colluding_exact_fa_md: W mismatch");
  std::vector<PhaseScales> copy(willies.begin(), willies.end());
  for (auto& s : copy) s.sigma2_w = sigma2_w;
  return colluding_exact_fa_md(copy, threshold);
}

/// Gaussian approximation of the fused energy.
struct CltMoments {
  double mu_fa = 0.0;
  double sigma_fa = 0.0;
  double mu_md = 0.0;
  double sigma_md = 0.0;
  std::size_t w = 1;
};

/// Sums per-Willie means and variances; heterogeneous Willies allowed.
inline CltMoments clt_moments_pooled(std::span<const PhaseScales> willies) {
  if (willies.empty()) throw std::invalid_argument("clt_moments_pooled: no Willies");
  CltMoments m;
  m.w = willies.size();
  double var_fa = 0.0;
  double var_md = 0.0;
  for (const auto& s : willies) {
    m.mu_fa += s.lambda_j + s.sigma2_w;
    m.mu_md += s.lambda_j + s.lambda_s + s.sigma2_w;
    var_fa += s.lambda_j * s.lambda_j;
    var_md += s.lambda_j * s.lambda_j + s.lambda_s * s.lambda_s;
  }
  m.sigma_fa = std::sqrt(var_fa);
  m.sigma_md = std::sqrt(var_md);
  return m;
}

/// W i.i.d. Willies sharing `links`.
inline CltMoments clt_moments(const PowerSplit& split, const SystemParams& params,
                              const WillieLinks& links, std::size_t w, Phase phase) {
  if (w < 1) throw std::invalid_argument("clt_moments: W must be >= 1");
  const std::vector<PhaseScales> willies(w, phase_scales(split, params, links, phase));
  return clt_moments_pooled(willies);
}

inline bool iid_willies(const LinkVariances& v, std::size_t relay) {
  constexpr double kTol = 1e-12;
  auto same = [](double a, double b) { return std::abs(a - b) <= kTol * std::max(a, b); };
  for (std::size_t i = 1; i < v.willie_count(); ++i) {
    if (!same(v.mu_sw[i], v.mu_sw[0]) || !same(v.mu_dw[i], v.mu_dw[0]) ||
        !same(v.mu_rw.at(relay)[i], v.mu_rw.at(relay)[0])) {
      return false;
    }
  }
  return true;
}

inline CltMoments clt_moments(const PowerSplit& split, const SystemParams& params,
                              const LinkVariances& v, std::size_t w, Phase phase,
                              std::size_t relay = 0) {
  if (v.willie_count() == 0) throw std::invalid_argument("clt_moments: no Willies");
  if (!iid_willies(v, relay)) {
    throw std::invalid_argument("clt_moments: Willie variances are not identical; use clt_moments_pooled");
  }
  return clt_moments(split, params, willie_links(v, relay, 0), w, phase);
}

/// Standard normal tail, 0.5 erfc(x / sqrt 2).
inline double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

inline DetectionOutcome clt_fa_md(const CltMoments& m, double threshold) {
  if (!(m.sigma_fa > 0.0) || !(m.sigma_md > 0.0)) {
    throw std::domain_error("clt_fa_md: standard deviations must be > 0");
  }
  return make_outcome(threshold, q_function((threshold - m.mu_fa) / m.sigma_fa),
                      1.0 - q_function((threshold - m.mu_md) / m.sigma_md));
}

/// Crossing of the two Gaussian densities lying between mu_fa and mu_md.
/// Equal deviations give the midpoint.
inline double clt_optimal_threshold(const CltMoments& m) {
  const double sf2 = m.sigma_fa * m.sigma_fa;
  const double sm2 = m.sigma_md * m.sigma_md;
  const double log_ratio = std::log(m.sigma_md / m.sigma_fa);
  const double dmu = m.mu_md - m.mu_fa;
  const double d = sf2 * sm2 * (dmu * dmu + 2.0 * (sm2 - sf2) * log_ratio);
  const double root = std::sqrt(std::max(d, 0.0));
  const double b = m.mu_md * sf2 - m.mu_fa * sm2;
  if (b >= 0.0) {
    const double den = root + b;
    if (den == 0.0) return 0.5 * (m.mu_fa + m.mu_md);
    return (sf2 * m.mu_md * m.mu_md - sm2 * m.mu_fa * m.mu_fa + 2.0 * sf2 * sm2 * log_ratio) / den;
  }
  return (root - b) / (sm2 - sf2);
}

inline double clt_min_error_sum(const CltMoments& m) {
  return clt_fa_md(m, clt_optimal_threshold(m)).error_sum;
}

/// Box from the CLT certificate of W colluding i.i.d. Willies.
inline CovertBox colluding_box_bounds(const SystemParams& params, const WillieLinks& links,
                                      std::size_t w) {
  validate(params);
  auto error1 = [&](double rho) {
    return clt_min_error_sum(clt_moments({rho, 0.5}, params, links, w, Phase::kFirst));
  };
  auto error2 = [&](double xi) {
    return clt_min_error_sum(clt_moments({0.5, xi}, params, links, w, Phase::kSecond));
  };
  return detail::certificate_box(error1, error2, params.epsilon);
}

/// Heterogeneous colluding Willies with pooled moments.
inline CovertBox colluding_box_bounds(const SystemParams& params, std::span<const WillieLinks> links) {
  validate(params);
  if (links.empty()) throw std::invalid_argument("colluding_box_bounds: no Willies");
  auto pooled = [&](const PowerSplit& split, Phase phase) {
    std::vector<PhaseScales> scales;
    for (const auto& l : links) scales.push_back(phase_scales(split, params, l, phase));
    return clt_min_error_sum(clt_moments_pooled(scales));
  };
  auto error1 = [&](double rho) { return pooled({rho, 0.5}, Phase::kFirst); };
  auto error2 = [&](double xi) { return pooled({0.5, xi}, Phase::kSecond); };
  return detail::certificate_box(error1, error2, params.epsilon);
}

/// Literal per-symbol simulation up to this many symbols; beyond it the slot
/// energy is drawn as its exact Gamma law.
inline constexpr int kLiteralSymbolLimit = 256;

/// Empirical (P_FA, P_MD) of the radiometer Y / n against `threshold`. Fading
/// powers are stratified on a k x k jittered grid over trials and shared by
/// both hypotheses.
inline DetectionOutcome monte_carlo_detection(const PhaseScales& s, int n, std::size_t trials,
                                              double threshold, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("monte_carlo_detection: n must be >= 1");
  if (trials < 1) throw std::invalid_argument("monte_carlo_detection: trials must be >= 1");
  Rng rng(seed);
  const auto k = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(trials))));
  const std::size_t stratified = k * k;
  auto slot_energy = [&](double variance) {
    if (n <= kLiteralSymbolLimit) {
      double sum = 0.0;
      for (int l = 0; l < n; ++l) sum += std::norm(rng.complex_normal(variance));
      return sum / n;
    }
    return variance * rng.gamma(static_cast<double>(n)) / n;
  };
  std::size_t false_alarms = 0;
  std::size_t misses = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    double u1 = rng.uniform();
    double u2 = rng.uniform();
    if (t < stratified) {
      u1 = (static_cast<double>(t / k) + u1) / static_cast<double>(k);
      u2 = (static_cast<double>(t % k) + u2) / static_cast<double>(k);
    }
    const double jam = -s.lambda_j * std::log(u1);
    const double sig = -s.lambda_s * std::log(u2);
    if (slot_energy(s.sigma2_w + jam) > threshold) ++false_alarms;
    if (slot_energy(s.sigma2_w + jam + sig) < threshold) ++misses;
  }
  const double count = static_cast<double>(trials);
  return make_outcome(threshold, static_cast<double>(false_alarms) / count,
                      static_cast<double>(misses) / count);
}

}  // namespace covert_relay

#endif  // COVERT_RELAY_COVERT_DETECTION_HPP
