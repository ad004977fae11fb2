#ifndef COVERT_RELAY_POWER_ALLOCATION_HPP
#define COVERT_RELAY_POWER_ALLOCATION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "covert_relay/channel_model.hpp"
#include "covert_relay/covert_detection.hpp"
#include "covert_relay/detail/scalar_search.hpp"
#include "covert_relay/link_layer.hpp"
#include "covert_relay/params.hpp"

namespace covert_relay {

/// Interiority margin keeping every logarithm finite.
inline constexpr double kInteriorMargin = 1e-6;

struct ScaConfig {
  double theta = 1e-6;
  int max_iters = 100;
  std::optional<PowerSplit> init;
  double inner_tol = 1e-10;
};

struct AllocationResult {
  PowerSplit split{0.0, 1.0};
  double rate = 0.0;        ///< exact secrecy rate, clamped at 0
  double model_rate = 0.0;  ///< (pr_t / 2)(Sigma - Omega) at split
  int iterations = 0;
  std::vector<double> trajectory;  ///< Sigma - Omega after each iterate, starting at the init
  bool feasible = false;
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<double> t_relays;
  double rho_ub = 0.0;
  double xi_lb = 1.0;
  std::size_t relay = 0;
};

/// Sigma and Omega in bits; Sigma - Omega is the high-SINR secrecy objective.
struct ObjectiveTerms {
  double sigma = 0.0;
  double omega = 0.0;
  double value() const { return sigma - omega; }
};

inline void require_interior(const PowerSplit& s, const char* where) {
  if (!(s.rho > 0.0 && s.rho < 1.0 && s.xi > 0.0 && s.xi < 1.0)) {
    throw std::domain_error(std::string(where) + ": split must lie strictly inside (0, 1)^2");
  }
}

inline ObjectiveTerms objective_terms(const PowerSplit& s, double varsigma, double gamma_rd) {
  require_interior(s, "objective_terms");
  if (!(varsigma > 0.0 && gamma_rd > 0.0)) throw std::domain_error("objective_terms: gains must be > 0");
  ObjectiveTerms t;
  t.sigma = std::log2(s.rho * varsigma * gamma_rd * (1.0 - s.xi)) + std::log2(1.0 - s.rho);
  t.omega = std::log2(s.rho * varsigma + 2.0 - s.rho - s.xi) + std::log2(1.0 - s.rho + s.rho * varsigma);
  return t;
}

/// First-order expansion of Omega at `anchor`. Omega is concave, so this
/// affine function lies above it everywhere.
struct OmegaSurrogate {
  PowerSplit anchor;
  double value = 0.0;
  double grad_rho = 0.0;
  double grad_xi = 0.0;

  double operator()(const PowerSplit& s) const {
    return value + grad_rho * (s.rho - anchor.rho) + grad_xi * (s.xi - anchor.xi);
  }
};

inline OmegaSurrogate dc_linearize(const PowerSplit& anchor, double varsigma) {
  require_interior(anchor, "dc_linearize");
  const double a = anchor.rho * varsigma + 2.0 - anchor.rho - anchor.xi;
  const double b = 1.0 - anchor.rho + anchor.rho * varsigma;
  OmegaSurrogate s;
  s.anchor = anchor;
  s.value = std::log2(a) + std::log2(b);
  s.grad_rho = ((varsigma - 1.0) / a + (varsigma - 1.0) / b) / std::numbers::ln2;
  s.grad_xi = -1.0 / (a * std::numbers::ln2);
  return s;
}

/// Sigma - surrogate; the gamma-dependent constant of Sigma is dropped.
inline double surrogate_objective(const OmegaSurrogate& omega, const PowerSplit& s) {
  return std::log2(s.rho) + std::log2(1.0 - s.rho) + std::log2(1.0 - s.xi) - omega(s);
}

inline constexpr std::size_t kFallbackGrid = 10000;

/// Maximizes Sigma - surrogate over [delta, rho_ub] x [xi_lb, 1 - delta]. The
/// objective splits into a concave function of rho plus one of xi.
inline std::optional<PowerSplit> solve_subproblem(const OmegaSurrogate& omega, const CovertBox& box,
                                                  double inner_tol) {
  const double rho_lo = kInteriorMargin;
  const double rho_hi = std::min(box.rho_ub, 1.0 - kInteriorMargin);
  const double xi_lo = std::max(box.xi_lb, kInteriorMargin);
  const double xi_hi = 1.0 - kInteriorMargin;
  if (!box.feasible || rho_hi < rho_lo || xi_lo > xi_hi) return std::nullopt;

  auto f_rho = [&](double rho) {
    return std::log2(rho) + std::log2(1.0 - rho) - omega.grad_rho * rho;
  };
  auto f_xi = [&](double xi) { return std::log2(1.0 - xi) - omega.grad_xi * xi; };
  PowerSplit out{detail::golden_section_max(f_rho, rho_lo, rho_hi, inner_tol).x,
                 detail::golden_section_max(f_xi, xi_lo, xi_hi, inner_tol).x};

  const PowerSplit anchor{std::clamp(omega.anchor.rho, rho_lo, rho_hi),
                          std::clamp(omega.anchor.xi, xi_lo, xi_hi)};
  if (surrogate_objective(omega, out) < surrogate_objective(omega, anchor)) {
    out = {detail::grid_max(f_rho, rho_lo, rho_hi, kFallbackGrid).x,
           detail::grid_max(f_xi, xi_lo, xi_hi, kFallbackGrid).x};
    if (surrogate_objective(omega, out) < surrogate_objective(omega, anchor)) out = anchor;
  }
  return out;
}

inline constexpr double kAscentTolerance = 1e-9;

inline void set_slacks(AllocationResult& r, const WillieLinks& w1, const WillieLinks& w2) {
  r.t0 = r.split.rho * w1.mu_sw - (1.0 - r.split.rho) * w1.mu_dw;
  r.t1 = (1.0 - r.split.xi) * w2.mu_rw - r.split.xi * w2.mu_sw;
}

/// Iterates linearize and solve inside a precomputed covert box.
inline AllocationResult sca_optimize_in_box(const SystemParams& params, const CovertBox& box,
                                            const LinkGains& gains, const ScaConfig& config = {}) {
  validate(params);
  if (!(config.theta > 0.0)) throw std::invalid_argument("ScaConfig: theta must be > 0");
  AllocationResult r;
  r.rho_ub = box.rho_ub;
  r.xi_lb = box.xi_lb;
  const double rho_hi = std::min(box.rho_ub, 1.0 - kInteriorMargin);
  const double xi_lo = std::max(box.xi_lb, kInteriorMargin);
  if (!box.feasible || rho_hi < kInteriorMargin || xi_lo > 1.0 - kInteriorMargin) return r;

  const double varsigma = gains.varsigma();
  PowerSplit x;
  if (config.init) {
    x = *config.init;
    if (!(x.rho >= kInteriorMargin && x.rho <= rho_hi && x.xi >= xi_lo && x.xi <= 1.0 - kInteriorMargin)) {
      throw std::invalid_argument("ScaConfig: init outside the feasible box");
    }
  } else {
    x = {std::min({0.5, box.rho_ub / 2.0 + kInteriorMargin, rho_hi}),
         xi_lo + 0.5 * (1.0 - kInteriorMargin - xi_lo)};
  }
  r.trajectory.push_back(objective_terms(x, varsigma, gains.gamma_rd).value());
  for (int it = 0; it < config.max_iters; ++it) {
    const auto next = solve_subproblem(dc_linearize(x, varsigma), box, config.inner_tol);
    if (!next) return r;
    const double value = objective_terms(*next, varsigma, gains.gamma_rd).value();
    if (value < r.trajectory.back() - kAscentTolerance) {
      throw std::logic_error("sca_optimize: objective decreased between iterates");
    }
    const bool converged =
        std::abs(next->rho - x.rho) <= config.theta && std::abs(next->xi - x.xi) <= config.theta;
    x = *next;
    r.trajectory.push_back(value);
    r.iterations = it + 1;
    if (converged) break;
  }
  r.split = x;
  r.feasible = true;
  r.model_rate = 0.5 * params.pr_t * r.trajectory.back();
  r.rate = secrecy_rate(x, gains, params.pr_t, true, SinrModel::kExact);
  return r;
}

/// Two-hop allocation against non-colluding Willies (a single one included).
inline AllocationResult sca_optimize(const SystemParams& params, std::span<const WillieLinks> willies,
                                     const LinkGains& gains, const ScaConfig& config = {}) {
  const CovertBox box = covert_box_bounds(params, willies);
  AllocationResult r = sca_optimize_in_box(params, box, gains, config);
  const auto [w1, w2] = worst_willie(willies);
  set_slacks(r, willies[w1], willies[w2]);
  return r;
}

inline AllocationResult sca_optimize(const SystemParams& params, const WillieLinks& willie,
                                     const LinkGains& gains, const ScaConfig& config = {}) {
  return sca_optimize(params, std::span<const WillieLinks>(&willie, 1), gains, config);
}

inline AllocationResult sca_optimize(const SystemParams& params, const LinkVariances& v,
                                     const LinkGains& gains, const ScaConfig& config = {},
                                     std::size_t relay = 0) {
  const auto links = willie_links(v, relay);
  AllocationResult r = sca_optimize(params, std::span<const WillieLinks>(links), gains, config);
  r.relay = relay;
  return r;
}

enum class OracleObjective { kHighSnr, kExact };

/// Brute-force argmax over a resolution x resolution grid of the covert box
/// (endpoints included). Rates are (pr_t / 2) times the unclamped objective.
inline AllocationResult grid_oracle(const SystemParams& params, const CovertBox& box,
                                    const LinkGains& gains, std::size_t resolution,
                                    OracleObjective objective = OracleObjective::kHighSnr) {
  if (resolution < 100) throw std::invalid_argument("grid_oracle: resolution must be >= 100");
  AllocationResult r;
  r.rho_ub = box.rho_ub;
  r.xi_lb = box.xi_lb;
  const double rho_lo = kInteriorMargin;
  const double rho_hi = std::min(box.rho_ub, 1.0 - kInteriorMargin);
  const double xi_lo = std::max(box.xi_lb, kInteriorMargin);
  const double xi_hi = 1.0 - kInteriorMargin;
  if (!box.feasible || rho_hi < rho_lo || xi_lo > xi_hi) return r;

  auto node = [resolution](double lo, double hi, std::size_t k) {
    if (k + 1 == resolution) return hi;
    return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(resolution - 1);
  };
  const double vs = gains.varsigma();
  double best = -std::numeric_limits<double>::infinity();
  PowerSplit arg;
  std::vector<double> xis(resolution);
  std::vector<double> log_xi(resolution);
  for (std::size_t k = 0; k < resolution; ++k) {
    xis[k] = node(xi_lo, xi_hi, k);
    log_xi[k] = std::log2(1.0 - xis[k]);
  }
  for (std::size_t i = 0; i < resolution; ++i) {
    const double rho = node(rho_lo, rho_hi, i);
    if (objective == OracleObjective::kHighSnr) {
      const double fixed = std::log2(rho * vs * gains.gamma_rd) + std::log2(1.0 - rho) -
                           std::log2(1.0 - rho + rho * vs);
      for (std::size_t k = 0; k < resolution; ++k) {
        const double v = fixed + log_xi[k] - std::log2(rho * vs + 2.0 - rho - xis[k]);
        if (v > best) {
          best = v;
          arg = {rho, xis[k]};
        }
      }
    } else {
      for (std::size_t k = 0; k < resolution; ++k) {
        const double v = secrecy_rate({rho, xis[k]}, gains, 2.0, false, SinrModel::kExact);
        if (v > best) {
          best = v;
          arg = {rho, xis[k]};
        }
      }
    }
  }
  r.split = arg;
  r.feasible = true;
  r.model_rate = 0.5 * params.pr_t * best;
  r.rate = secrecy_rate(arg, gains, params.pr_t, true, SinrModel::kExact);
  return r;
}

/// argmax |h_id|^2, ties to the lowest index.
inline std::size_t select_relay_suboptimal(std::span<const cdouble> h_rd) {
  if (h_rd.empty()) throw std::invalid_argument("select_relay_suboptimal: no relays");
  std::size_t best = 0;
  for (std::size_t i = 1; i < h_rd.size(); ++i) {
    if (std::norm(h_rd[i]) > std::norm(h_rd[best])) best = i;
  }
  return best;
}

/// W colluding i.i.d. Willies. The box is the CLT certificate box intersected
/// with the exact single-Willie box.
inline AllocationResult colluding_allocation(const SystemParams& params, const WillieLinks& links,
                                             std::size_t w, const LinkGains& gains,
                                             const ScaConfig& config = {}) {
  const CovertBox clt = colluding_box_bounds(params, links, w);
  const CovertBox single = covert_box_bounds(params, links);
  CovertBox box{std::min(clt.rho_ub, single.rho_ub), std::max(clt.xi_lb, single.xi_lb), true};
  box.feasible = clt.feasible && single.feasible && box.rho_ub > 0.0 && box.xi_lb < 1.0;
  AllocationResult r = sca_optimize_in_box(params, box, gains, config);
  set_slacks(r, links, links);
  return r;
}

/// Heterogeneous colluding Willies with pooled CLT moments.
inline AllocationResult colluding_allocation(const SystemParams& params,
                                             std::span<const WillieLinks> willies,
                                             const LinkGains& gains, const ScaConfig& config = {}) {
  const CovertBox clt = colluding_box_bounds(params, willies);
  const CovertBox single = covert_box_bounds(params, willies);
  CovertBox box{std::min(clt.rho_ub, single.rho_ub), std::max(clt.xi_lb, single.xi_lb), true};
  box.feasible = clt.feasible && single.feasible && box.rho_ub > 0.0 && box.xi_lb < 1.0;
  AllocationResult r = sca_optimize_in_box(params, box, gains, config);
  const auto [w1, w2] = worst_willie(willies);
  set_slacks(r, willies[w1], willies[w2]);
  return r;
}

inline AllocationResult colluding_allocation(const SystemParams& params, const LinkVariances& v,
                                             std::size_t w, const LinkGains& gains,
                                             const ScaConfig& config = {}, std::size_t relay = 0) {
  if (!iid_willies(v, relay)) {
    throw std::invalid_argument("colluding_allocation: Willie variances are not identical");
  }
  return colluding_allocation(params, willie_links(v, relay, 0), w, gains, config);
}

/// Allocation for relay `relay` with every other relay eavesdropping; the
/// reported rate is the exact multi-relay secrecy rate. Colluding Willies
/// pool their moments.
inline AllocationResult allocate_for_relay(const ChannelRealization& c, const SystemParams& params,
                                           const LinkVariances& v, std::size_t relay,
                                           bool colluding = false, const ScaConfig& config = {}) {
  const LinkGains gains = link_gains(c.h_sr.at(relay), c.h_rd.at(relay), params);
  const auto links = willie_links(v, relay);
  const std::span<const WillieLinks> view(links);
  AllocationResult r = colluding ? colluding_allocation(params, view, gains, config)
                                 : sca_optimize(params, view, gains, config);
  r.relay = relay;
  if (r.feasible) r.rate = multi_relay_secrecy_rate(r.split, c, params, relay, true);
  const std::size_t w2 = worst_willie(view).second;
  for (std::size_t i = 0; i < v.relay_count(); ++i) {
    const WillieLinks l = willie_links(v, i, w2);
    r.t_relays.push_back((1.0 - r.split.xi) * l.mu_rw - r.split.xi * l.mu_sw);
  }
  return r;
}

/// Runs the allocation for every candidate and keeps the best exact rate.
inline std::pair<std::size_t, AllocationResult> select_relay_exhaustive(
    const ChannelRealization& c, const SystemParams& params, const LinkVariances& v,
    bool colluding = false, const ScaConfig& config = {}) {
  if (c.h_rd.empty()) throw std::invalid_argument("select_relay_exhaustive: no relays");
  std::optional<std::pair<std::size_t, AllocationResult>> best;
  for (std::size_t i = 0; i < c.h_rd.size(); ++i) {
    AllocationResult r = allocate_for_relay(c, params, v, i, colluding, config);
    if (!r.feasible) continue;
    if (!best || r.rate > best->second.rate) best.emplace(i, std::move(r));
  }
  if (!best) return {0, AllocationResult{}};
  return *best;
}

}  // namespace covert_relay

#endif  // COVERT_RELAY_POWER_ALLOCATION_HPP
