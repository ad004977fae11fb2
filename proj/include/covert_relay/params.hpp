#ifndef COVERT_RELAY_PARAMS_HPP
#define COVERT_RELAY_PARAMS_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace covert_relay {

inline double dbw_to_watts(double dbw) { return std::pow(10.0, dbw / 10.0); }
inline double watts_to_dbw(double watts) { return 10.0 * std::log10(watts); }

/// Global scalars shared by every scheme.
struct SystemParams {
  double power = 10.0;           ///< P, max transmit power per node (W)
  double noise = 1e-5;           ///< sigma^2 at relays and destination (W)
  double willie_noise = 1e-5;    ///< sigma_w^2 at each Willie (W)
  int antennas = 16;             ///< N_s, source antenna count
  double pr_t = 0.5;             ///< transmission probability per slot
  double epsilon = 0.1;          ///< covertness slack
  double alpha = 4.0;            ///< path-loss exponent
  int symbols = 100;             ///< n, symbols per slot (Monte Carlo detection only)
};

inline void validate(const SystemParams& p) {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("SystemParams: " + what);
  };
  if (!(p.power > 0.0)) fail("power must be > 0");
  if (!(p.noise > 0.0)) fail("noise must be > 0");
  if (!(p.willie_noise > 0.0)) fail("willie_noise must be > 0");
  if (p.antennas < 1) fail("antennas must be >= 1");
  if (!(p.pr_t >= 0.0 && p.pr_t <= 1.0)) fail("pr_t must lie in [0, 1]");
  if (!(p.epsilon > 0.0 && p.epsilon < 1.0)) fail("epsilon must lie in (0, 1)");
  if (!(p.alpha > 0.0)) fail("alpha must be > 0");
  if (p.symbols < 1) fail("symbols must be >= 1");
}

}  // namespace covert_relay

#endif  // COVERT_RELAY_PARAMS_HPP
