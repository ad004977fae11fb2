#ifndef COVERT_RELAY_DIRECT_TRANSMISSION_HPP
#define COVERT_RELAY_DIRECT_TRANSMISSION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "covert_relay/channel_model.hpp"
#include "covert_relay/covert_detection.hpp"
#include "covert_relay/detail/scalar_search.hpp"
#include "covert_relay/params.hpp"

namespace covert_relay {

using CMatrix = Eigen::MatrixXcd;

/// Orthonormal columns spanning the complement of h (N_s x (N_s - 1)),
/// built from a Householder QR.
inline CMatrix null_space_basis(const CVector& h) {
  if (h.size() < 2) throw std::invalid_argument("null_space_basis: need N_s >= 2");
  if (!(h.norm() > 0.0)) throw std::invalid_argument("null_space_basis: zero channel");
  const CMatrix column = h;
  const Eigen::HouseholderQR<CMatrix> qr(column);
  const CMatrix q = qr.householderQ();
  return q.rightCols(h.size() - 1);
}

struct JammingVector {
  CVector z;
  CMatrix basis;
};

/// z = sqrt((1 - rho) P) B u with u normalized here.
inline JammingVector make_jamming(const CMatrix& basis, const CVector& u, double rho, double power) {
  const double n = u.norm();
  if (!(n > 0.0)) throw std::invalid_argument("make_jamming: zero direction");
  return {std::sqrt((1.0 - rho) * power) * (basis * (u / n)), basis};
}

struct DirectSinrs {
  double gamma_d = 0.0;
  std::vector<double> gamma_relays;

  double max_relay() const {
    return gamma_relays.empty() ? 0.0 : *std::max_element(gamma_relays.begin(), gamma_relays.end());
  }
};

/// Destination and per-relay SINRs with MRT data beam w = h_sd / ||h_sd||.
inline DirectSinrs direct_sinrs(double rho, const CVector& z, const ChannelRealization& c,
                                const SystemParams& params) {
  const CVector w = mrt_weights(c.h_sd);
  DirectSinrs out;
  out.gamma_d = rho * params.power * std::norm(w.dot(c.h_sd)) / (std::norm(z.dot(c.h_sd)) + params.noise);
  for (const auto& h : c.h_sr) {
    out.gamma_relays.push_back(rho * params.power * std::norm(w.dot(h)) /
                               (std::norm(z.dot(h)) + params.noise));
  }
  return out;
}

/// pr_t [log2(1 + gamma_D) - log2(1 + max_j gamma_j)]^+, single phase.
inline double direct_secrecy_rate(const DirectSinrs& s, double pr_t) {
  return std::max(0.0, pr_t * (std::log2(1.0 + s.gamma_d) - std::log2(1.0 + s.max_relay())));
}

inline double direct_secrecy_rate(double rho, const CVector& z, const ChannelRealization& c,
                                  const SystemParams& params) {
  return direct_secrecy_rate(direct_sinrs(rho, z, c, params), params.pr_t);
}

/// Signal and jamming both leave the source, so Willie sees lambda_j = (1 - rho) P mu_sw
/// and lambda_s = rho P mu_sw; the path loss cancels from the certificate.
inline double direct_covert_bound(double epsilon, double power) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("direct_covert_bound: epsilon outside (0, 1)");
  auto error = [power](double rho) {
    return min_error_sum({(1.0 - rho) * power, rho * power, 0.0, Phase::kFirst});
  };
  auto unused = [](double) { return 1.0; };
  return detail::certificate_box(error, unused, epsilon).rho_ub;
}

/// First-order expansion of (|z^H h_j|^2 + sigma^2) / nu at (z_anchor, nu_anchor)
/// with H_j = h_j h_j^H. Jointly convex, so the expansion is a global lower bound.
class TaylorRelaxation {
 public:
  TaylorRelaxation(CVector z_anchor, double nu_anchor, std::vector<CVector> h, double noise)
      : z_(std::move(z_anchor)), nu_(nu_anchor), h_(std::move(h)), noise_(noise) {
    if (!(nu_ > 0.0)) throw std::domain_error("taylor_relax: anchor nu must be > 0");
    for (const auto& hj : h_) {
      const cdouble p = hj.dot(z_);  // h^H z
      proj_.push_back(p);
      q_.push_back(std::norm(p));
    }
  }

  std::size_t size() const { return h_.size(); }
  const CVector& anchor_z() const { return z_; }
  double anchor_nu() const { return nu_; }

  double exact(std::size_t j, const CVector& z, double nu) const {
    return (std::norm(z.dot(h_[j])) + noise_) / nu;
  }

  /// 2 sigma^2 / nu~ - sigma^2 nu / nu~^2 + 2 Re{z~^H H z} / nu~ - q~ nu / nu~^2.
  double operator()(std::size_t j, const CVector& z, double nu) const {
    const double cross = std::real(std::conj(proj_[j]) * h_[j].dot(z));
    return 2.0 * noise_ / nu_ - noise_ * nu / (nu_ * nu_) + 2.0 * cross / nu_ - q_[j] * nu / (nu_ * nu_);
  }

  /// g with d(expansion) = Re{g^H dz}.
  CVector grad_z(std::size_t j) const { return 2.0 * proj_[j] * h_[j] / nu_; }
  double grad_nu(std::size_t j) const { return -(noise_ + q_[j]) / (nu_ * nu_); }

  /// Largest nu meeting the relaxed constraint of relay j at z, given its
  /// signal power rho P |w^H h_j|^2.
  double nu_limit(std::size_t j, const CVector& z, double signal) const {
    const double cross = std::real(std::conj(proj_[j]) * h_[j].dot(z));
    const double free = 2.0 * noise_ / nu_ + 2.0 * cross / nu_ - signal - std::norm(z.dot(h_[j])) - noise_;
    return free * nu_ * nu_ / (noise_ + q_[j]);
  }

  /// Gradient of nu_limit in z.
  CVector nu_limit_grad(std::size_t j, const CVector& z) const {
    const double scale = nu_ * nu_ / (noise_ + q_[j]);
    return scale * (grad_z(j) - 2.0 * h_[j].dot(z) * h_[j]);
  }

 private:
  CVector z_;
  double nu_;
  std::vector<CVector> h_;
  double noise_;
  std::vector<cdouble> proj_;
  std::vector<double> q_;
};

inline TaylorRelaxation taylor_relax(const CVector& z_anchor, double nu_anchor,
                                     const std::vector<CVector>& h_relays, double noise) {
  return TaylorRelaxation(z_anchor, nu_anchor, h_relays, noise);
}

struct DirectConfig {
  int max_iters = 200;
  double tol = 1e-6;
  int gradient_steps = 20;
  std::size_t rho_grid = 64;
  double rho_tol = 1e-9;
};

struct DirectResult {
  double rho = 0.0;
  JammingVector jamming;
  double rate = 0.0;
  double nu = 1.0;
  int iterations = 0;
  bool feasible = false;
  double rho_ub = 0.0;
  std::vector<double> trajectory;
};

namespace detail {

inline double direct_rate_at(double rho, const CMatrix& basis, const CVector& u,
                             const ChannelRealization& c, const SystemParams& params) {
  return direct_secrecy_rate(rho, make_jamming(basis, u, rho, params.power).z, c, params);
}

/// Projected ascent of min_j nu_limit over unit u at fixed rho.
inline CVector ascend_direction(const TaylorRelaxation& relax, const CMatrix& basis, CVector u,
                                double rho, const ChannelRealization& c, const SystemParams& params,
                                int steps) {
  const double amp = std::sqrt((1.0 - rho) * params.power);
  const CVector w = mrt_weights(c.h_sd);
  std::vector<double> signal;
  for (const auto& h : c.h_sr) signal.push_back(rho * params.power * std::norm(w.dot(h)));
  auto score = [&](const CVector& dir, std::size_t* arg) {
    const CVector z = amp * (basis * dir);
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < relax.size(); ++j) {
      const double v = relax.nu_limit(j, z, signal[j]);
      if (v < m) {
        m = v;
        if (arg) *arg = j;
      }
    }
    return m;
  };
  std::size_t active = 0;
  double current = score(u, &active);
  double step = 1.0;
  for (int s = 0; s < steps && step > 1e-12; ++s) {
    const CVector z = amp * (basis * u);
    CVector g = amp * (basis.adjoint() * relax.nu_limit_grad(active, z));
    g -= u * u.dot(g);  // tangent component
    const double gn = g.norm();
    if (!(gn > 0.0)) break;
    g /= gn;
    bool moved = false;
    while (step > 1e-12) {
      CVector trial = u + step * g;
      trial.normalize();
      std::size_t trial_active = 0;
      const double v = score(trial, &trial_active);
      if (v > current) {
        u = trial;
        current = v;
        active = trial_active;
        moved = true;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return u;
}

}  // namespace detail

/// Alternating Taylor-relaxed jamming design and golden-section power split.
inline DirectResult direct_optimize(const ChannelRealization& c, const SystemParams& params,
                                    const DirectConfig& config = {}) {
  validate(params);
  if (params.antennas < 2) throw std::invalid_argument("direct_optimize: need N_s >= 2");
  DirectResult r;
  r.rho_ub = direct_covert_bound(params.epsilon, params.power);
  const CMatrix basis = null_space_basis(c.h_sd);
  r.jamming.basis = basis;
  if (!(r.rho_ub >= kBoxTolerance)) return r;

  const Eigen::Index dim = basis.cols();
  CVector u = CVector::Zero(dim);
  u(0) = 1.0;
  if (!c.h_sr.empty()) {
    const CVector w = mrt_weights(c.h_sd);
    std::size_t strongest = 0;
    for (std::size_t j = 1; j < c.h_sr.size(); ++j) {
      if (std::norm(w.dot(c.h_sr[j])) > std::norm(w.dot(c.h_sr[strongest]))) strongest = j;
    }
    const CVector proj = basis.adjoint() * c.h_sr[strongest];
    if (proj.norm() > 0.0) u = proj.normalized();
  }

  r.feasible = true;
  if (c.h_sr.empty()) {
    r.rho = r.rho_ub;
    r.jamming = make_jamming(basis, u, r.rho, params.power);
    r.rate = direct_secrecy_rate(r.rho, r.jamming.z, c, params);
    r.trajectory.push_back(r.rate);
    return r;
  }

  auto rate_of = [&](double rho, const CVector& dir) { return detail::direct_rate_at(rho, basis, dir, c, params); };
  auto best_rho = [&](const CVector& dir, double current) {
    const auto f = [&](double rho) { return rate_of(rho, dir); };
    const detail::ScalarMax m =
        detail::bracketed_max(f, kBoxTolerance, r.rho_ub, config.rho_grid, config.rho_tol);
    const double keep = f(current);
    return m.value > keep ? m.x : current;
  };

  double rho = best_rho(u, r.rho_ub);
  double rate = rate_of(rho, u);
  r.trajectory.push_back(rate);
  for (int it = 0; it < config.max_iters; ++it) {
    const JammingVector jam = make_jamming(basis, u, rho, params.power);
    const double nu = 1.0 / (1.0 + direct_sinrs(rho, jam.z, c, params).max_relay());
    const TaylorRelaxation relax(jam.z, nu, c.h_sr, params.noise);
    CVector next_u = detail::ascend_direction(relax, basis, u, rho, c, params, config.gradient_steps);
    if (rate_of(rho, next_u) < rate) next_u = u;
    const double next_rho = best_rho(next_u, rho);
    const double next_rate = rate_of(next_rho, next_u);
    r.iterations = it + 1;
    const bool done = next_rate - rate < config.tol;
    if (next_rate >= rate) {
      u = next_u;
      rho = next_rho;
      rate = next_rate;
    }
    r.trajectory.push_back(rate);
    if (done) break;
  }
  r.rho = rho;
  r.jamming = make_jamming(basis, u, rho, params.power);
  r.rate = direct_secrecy_rate(rho, r.jamming.z, c, params);
  r.nu = 1.0 / (1.0 + direct_sinrs(rho, r.jamming.z, c, params).max_relay());
  return r;
}

/// Dense rho grid on (0, rho_ub] at a fixed jamming direction u.
inline detail::ScalarMax direct_rho_grid_oracle(const ChannelRealization& c, const SystemParams& params,
                                                const CVector& u, std::size_t points) {
  const double ub = direct_covert_bound(params.epsilon, params.power);
  const CMatrix basis = null_space_basis(c.h_sd);
  auto f = [&](double rho) { return detail::direct_rate_at(rho, basis, u, c, params); };
  return detail::grid_max(f, ub / static_cast<double>(points), ub, points);
}

}  // namespace covert_relay

#endif  // COVERT_RELAY_DIRECT_TRANSMISSION_HPP
