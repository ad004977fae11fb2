#ifndef COVERT_RELAY_CHANNEL_MODEL_HPP
#define COVERT_RELAY_CHANNEL_MODEL_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "covert_relay/params.hpp"
#include "covert_relay/rng.hpp"

namespace covert_relay {

using cdouble = std::complex<double>;
using CVector = Eigen::VectorXcd;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Closest allowed spacing between two nodes (m). Keeps d^-alpha bounded.
inline constexpr double kMinNodeSeparation = 0.1;

struct Topology {
  Point source{-5.0, 0.0};
  Point destination{5.0, 0.0};
  std::vector<Point> relays{{0.0, 0.0}};
  std::vector<Point> willies{{0.0, -5.0}};
};

inline void validate(const Topology& t) {
  std::vector<Point> all{t.source, t.destination};
  all.insert(all.end(), t.relays.begin(), t.relays.end());
  all.insert(all.end(), t.willies.begin(), t.willies.end());
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t k = i + 1; k < all.size(); ++k) {
      if (!(distance(all[i], all[k]) >= kMinNodeSeparation)) {
        throw std::invalid_argument("Topology: nodes " + std::to_string(i) + " and " +
                                    std::to_string(k) + " are closer than " +
                                    std::to_string(kMinNodeSeparation) + " m");
      }
    }
  }
}

/// Per-branch channel variances. Relay-indexed vectors have one entry per
/// relay, Willie-indexed vectors one per Willie.
struct LinkVariances {
  double mu_sd = 0.0;
  std::vector<double> mu_sr;
  std::vector<double> mu_rd;
  std::vector<double> mu_sw;
  std::vector<double> mu_dw;
  std::vector<std::vector<double>> mu_rw;  ///< [relay][willie]
  std::vector<std::vector<double>> mu_rr;  ///< [relay][relay], zero diagonal

  std::size_t relay_count() const { return mu_sr.size(); }
  std::size_t willie_count() const { return mu_sw.size(); }
};

inline void validate(const LinkVariances& v) {
  auto positive = [](double mu, const char* name) {
    if (!(mu > 0.0) || !std::isfinite(mu)) {
      throw std::invalid_argument(std::string("LinkVariances: ") + name + " must be finite and > 0");
    }
  };
  positive(v.mu_sd, "mu_sd");
  const std::size_t relays = v.relay_count();
  const std::size_t willies = v.willie_count();
  if (v.mu_rd.size() != relays || v.mu_rw.size() != relays || v.mu_rr.size() != relays ||
      v.mu_dw.size() != willies) {
    throw std::invalid_argument("LinkVariances: inconsistent node counts");
  }
  for (std::size_t j = 0; j < relays; ++j) {
    positive(v.mu_sr[j], "mu_sr");
    positive(v.mu_rd[j], "mu_rd");
    if (v.mu_rw[j].size() != willies || v.mu_rr[j].size() != relays) {
      throw std::invalid_argument("LinkVariances: inconsistent node counts");
    }
    for (double mu : v.mu_rw[j]) positive(mu, "mu_rw");
    for (std::size_t k = 0; k < relays; ++k) {
      if (k != j) positive(v.mu_rr[j][k], "mu_rr");
    }
  }
  for (std::size_t w = 0; w < willies; ++w) {
    positive(v.mu_sw[w], "mu_sw");
    positive(v.mu_dw[w], "mu_dw");
  }
}

/// mu = d^-alpha with unit reference distance.
inline LinkVariances link_variances(const Topology& t, double alpha) {
  validate(t);
  if (!(alpha > 0.0)) throw std::invalid_argument("link_variances: alpha must be > 0");
  auto mu = [alpha](Point a, Point b) { return std::pow(distance(a, b), -alpha); };

  LinkVariances v;
  v.mu_sd = mu(t.source, t.destination);
  for (Point r : t.relays) {
    v.mu_sr.push_back(mu(t.source, r));
    v.mu_rd.push_back(mu(r, t.destination));
    std::vector<double> rw;
    for (Point w : t.willies) rw.push_back(mu(r, w));
    v.mu_rw.push_back(std::move(rw));
    std::vector<double> rr;
    for (Point other : t.relays) {
      rr.push_back(distance(r, other) == 0.0 ? 0.0 : mu(r, other));
    }
    v.mu_rr.push_back(std::move(rr));
  }
  for (Point w : t.willies) {
    v.mu_sw.push_back(mu(t.source, w));
    v.mu_dw.push_back(mu(t.destination, w));
  }
  return v;
}

/// One draw of every complex channel gain in the network.
struct ChannelRealization {
  CVector h_sd;
  std::vector<CVector> h_sr;               ///< length N_s each
  std::vector<CVector> h_sw;               ///< length N_s each
  std::vector<cdouble> h_rd;
  std::vector<cdouble> h_dw;
  std::vector<std::vector<cdouble>> h_rw;  ///< [relay][willie]
  std::vector<std::vector<cdouble>> h_rr;  ///< [relay][relay], reciprocal, zero diagonal
  std::uint64_t seed = 0;
};

/// Draws a realization. Draw order is fixed: h_sd, then per relay (h_sr, h_rd,
/// h_rw per Willie), then per Willie (h_sw, h_dw), then h_rr for j < k.
inline ChannelRealization sample_channels(const LinkVariances& v, const SystemParams& params,
                                          std::uint64_t seed) {
  validate(v);
  if (params.antennas < 1) throw std::invalid_argument("sample_channels: antennas must be >= 1");
  const auto n = static_cast<Eigen::Index>(params.antennas);
  Rng rng(seed);
  auto vec = [&](double mu) {
    CVector h(n);
    for (Eigen::Index a = 0; a < n; ++a) h(a) = rng.complex_normal(mu);
    return h;
  };

  ChannelRealization c;
  c.seed = seed;
  c.h_sd = vec(v.mu_sd);
  const std::size_t relays = v.relay_count();
  const std::size_t willies = v.willie_count();
  for (std::size_t j = 0; j < relays; ++j) {
    c.h_sr.push_back(vec(v.mu_sr[j]));
    c.h_rd.push_back(rng.complex_normal(v.mu_rd[j]));
    std::vector<cdouble> rw;
    for (std::size_t w = 0; w < willies; ++w) rw.push_back(rng.complex_normal(v.mu_rw[j][w]));
    c.h_rw.push_back(std::move(rw));
  }
  for (std::size_t w = 0; w < willies; ++w) {
    c.h_sw.push_back(vec(v.mu_sw[w]));
    c.h_dw.push_back(rng.complex_normal(v.mu_dw[w]));
  }
  c.h_rr.assign(relays, std::vector<cdouble>(relays, cdouble{}));
  for (std::size_t j = 0; j < relays; ++j) {
    for (std::size_t k = j + 1; k < relays; ++k) {
      c.h_rr[j][k] = c.h_rr[k][j] = rng.complex_normal(v.mu_rr[j][k]);
    }
  }
  return c;
}

/// MRT beamformer w = h / ||h||.
inline CVector mrt_weights(const CVector& h) {
  const double norm = h.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("mrt_weights: zero channel vector");
  return h / norm;
}

/// Mean of the exponential law that replaces the beamformed leakage
/// |w^H h_sw|^2 in the large-array regime.
inline double lsma_leakage_variance(double mu_sw) {
  if (!(mu_sw > 0.0)) throw std::invalid_argument("lsma_leakage_variance: mu_sw must be > 0");
  return mu_sw;
}

inline double sample_lsma_leakage(double mu_sw, Rng& rng) {
  return rng.exponential(lsma_leakage_variance(mu_sw));
}

/// |h_sr^H h_sw|^2 / ||h_sr||^2: leakage of the MRT beam towards h_sw.
inline double beamformed_leakage(const CVector& h_sr, const CVector& h_sw) {
  return std::norm(h_sr.dot(h_sw)) / h_sr.squaredNorm();
}

/// |h_sr^H h_sw|^2 / (N_s mu_sr): beamformed leakage with ||h_sr||^2 replaced
/// by its mean.
inline double averaged_leakage(const CVector& h_sr, const CVector& h_sw, double mu_sr) {
  return std::norm(h_sr.dot(h_sw)) / (static_cast<double>(h_sr.size()) * mu_sr);
}

/// Large-array approximation gamma_si ~ N_s P mu_si / sigma^2.
inline double lsma_sinr_si(const SystemParams& params, double mu_si) {
  if (!(mu_si > 0.0) || !(params.power > 0.0) || !(params.noise > 0.0) || params.antennas < 1) {
    throw std::invalid_argument("lsma_sinr_si: inputs must be positive");
  }
  return static_cast<double>(params.antennas) * params.power * mu_si / params.noise;
}

}  // namespace covert_relay

#endif  // COVERT_RELAY_CHANNEL_MODEL_HPP
