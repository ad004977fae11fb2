#ifndef COVERT_RELAY_HYPOEXPONENTIAL_HPP
#define COVERT_RELAY_HYPOEXPONENTIAL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace covert_relay {

/// Relative gap below which two rates count as repeated.
inline constexpr double kRateSeparation = 1e-9;

inline bool rates_distinct(std::span<const double> rates) {
  for (std::size_t i = 0; i < rates.size(); ++i) {
    for (std::size_t k = i + 1; k < rates.size(); ++k) {
      const double gap = std::abs(rates[i] - rates[k]) / std::max(rates[i], rates[k]);
      if (!(gap > kRateSeparation)) return false;
    }
  }
  return true;
}

/// P(X_1 + ... + X_n > x) for independent X_i ~ Exp(rate_i), via the
/// textbook partial-fraction expansion
///   sum_j prod_{k != j} rate_k / (rate_k - rate_j) * exp(-rate_j x).
/// Terms alternate in sign and grow like the inverse rate gaps, so this is
/// only trustworthy for a handful of well separated rates.
inline double hypoexponential_tail_closed_form(std::span<const double> rates, double x) {
  if (rates.empty()) throw std::invalid_argument("hypoexponential: empty rate list");
  if (x <= 0.0) return 1.0;
  double tail = 0.0;
  for (std::size_t j = 0; j < rates.size(); ++j) {
    double coeff = 1.0;
    for (std::size_t k = 0; k < rates.size(); ++k) {
      if (k != j) coeff *= rates[k] / (rates[k] - rates[j]);
    }
    tail += coeff * std::exp(-rates[j] * x);
  }
  return tail;
}

/// Same tail through the phase-type representation: start in phase 0, leave
/// phase i at rate_i, survival = e_0^T exp(T x) 1 with T bidiagonal. Stable
/// for clustered rates.
inline double hypoexponential_tail(std::span<const double> rates, double x) {
  if (rates.empty()) throw std::invalid_argument("hypoexponential: empty rate list");
  for (double r : rates) {
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("hypoexponential: rates must be positive");
  }
  if (x <= 0.0) return 1.0;
  const auto n = static_cast<Eigen::Index>(rates.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    t(i, i) = -rates[static_cast<std::size_t>(i)] * x;
    if (i + 1 < n) t(i, i + 1) = rates[static_cast<std::size_t>(i)] * x;
  }
  const Eigen::MatrixXd e = t.exp();
  return std::clamp(e.row(0).sum(), 0.0, 1.0);
}

inline double hypoexponential_cdf(std::span<const double> rates, double x) {
  return 1.0 - hypoexponential_tail(rates, x);
}

}  // namespace covert_relay

#endif  // COVERT_RELAY_HYPOEXPONENTIAL_HPP
