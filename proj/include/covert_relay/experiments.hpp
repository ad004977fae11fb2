#ifndef COVERT_RELAY_EXPERIMENTS_HPP
#define COVERT_RELAY_EXPERIMENTS_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "covert_relay/channel_model.hpp"
#include "covert_relay/direct_transmission.hpp"
#include "covert_relay/link_layer.hpp"
#include "covert_relay/params.hpp"
#include "covert_relay/power_allocation.hpp"
#include "covert_relay/rng.hpp"

namespace covert_relay {

enum class Scheme { kTwoHop, kTwoHopMultiRelay, kDirect };
enum class WillieModel { kSingle, kNonColluding, kColluding };
enum class Selection { kSuboptimal, kExhaustive };

inline std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::kTwoHop: return "two_hop";
    case Scheme::kTwoHopMultiRelay: return "two_hop_multi_relay";
    case Scheme::kDirect: return "direct";
  }
  return "?";
}

inline std::string to_string(WillieModel m) {
  switch (m) {
    case WillieModel::kSingle: return "single";
    case WillieModel::kNonColluding: return "non_colluding";
    case WillieModel::kColluding: return "colluding";
  }
  return "?";
}

inline Scheme parse_scheme(const std::string& s) {
  if (s == "two_hop") return Scheme::kTwoHop;
  if (s == "two_hop_multi_relay") return Scheme::kTwoHopMultiRelay;
  if (s == "direct") return Scheme::kDirect;
  throw std::invalid_argument("unknown scheme '" + s + "'");
}

inline WillieModel parse_willie_model(const std::string& s) {
  if (s == "single") return WillieModel::kSingle;
  if (s == "non_colluding") return WillieModel::kNonColluding;
  if (s == "colluding") return WillieModel::kColluding;
  throw std::invalid_argument("unknown willie model '" + s + "'");
}

/// Parses "10", "10dBW" or "10 dbw" as a dBW value.
inline double parse_dbw(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  const auto pos = s.find("dbw");
  if (pos != std::string::npos) s.erase(pos);
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (s.find_first_not_of(" \t", used) != std::string::npos) {
    throw std::invalid_argument("bad dBW value '" + s + "'");
  }
  return v;
}

struct Sweep {
  std::string var = "P";
  std::vector<double> values{10.0};
};

/// Accepts "var=start:step:stop" or "var=v1,v2,...".
inline Sweep parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw std::invalid_argument("sweep must look like var=start:step:stop");
  Sweep s;
  s.var = text.substr(0, eq);
  s.values.clear();
  const std::string rhs = text.substr(eq + 1);
  if (std::count(rhs.begin(), rhs.end(), ':') == 2) {
    const auto c1 = rhs.find(':');
    const auto c2 = rhs.find(':', c1 + 1);
    const double start = std::stod(rhs.substr(0, c1));
    const double step = std::stod(rhs.substr(c1 + 1, c2 - c1 - 1));
    const double stop = std::stod(rhs.substr(c2 + 1));
    if (!(step > 0.0) || stop < start) throw std::invalid_argument("sweep needs step > 0 and stop >= start");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t k = 0; k < n; ++k) s.values.push_back(start + step * static_cast<double>(k));
  } else {
    std::stringstream ss(rhs);
    std::string item;
    while (std::getline(ss, item, ',')) s.values.push_back(std::stod(item));
  }
  if (s.values.empty()) throw std::invalid_argument("sweep list is empty");
  return s;
}

struct ExperimentConfig {
  Scheme scheme = Scheme::kTwoHop;
  WillieModel willie_model = WillieModel::kSingle;
  Selection selection = Selection::kSuboptimal;
  SystemParams params{dbw_to_watts(10.0), dbw_to_watts(-50.0), dbw_to_watts(-50.0)};
  Topology topology;
  std::size_t relays = 1;   ///< J
  std::size_t willies = 1;  ///< W
  bool scatter = false;     ///< place nodes uniformly on disks around the relay and Willie centers
  double relay_radius = 1.0;
  double willie_radius = 1.0;
  Sweep sweep;
  std::size_t trials = 2000;
  std::uint64_t master_seed = 1;
  bool timing = false;
};

inline void validate(const ExperimentConfig& c) {
  validate(c.params);
  if (c.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (c.sweep.values.empty()) throw std::invalid_argument("sweep list is empty");
  if (c.relays < 1) throw std::invalid_argument("J must be >= 1");
  if (c.willies < 1) throw std::invalid_argument("W must be >= 1");
  if (c.topology.relays.empty() || c.topology.willies.empty()) {
    throw std::invalid_argument("topology needs a relay center and a Willie center");
  }
  if (c.scheme == Scheme::kTwoHop && c.relays != 1) {
    throw std::invalid_argument("two_hop uses a single relay; use two_hop_multi_relay");
  }
  if (c.willie_model == WillieModel::kSingle && c.willies != 1) {
    throw std::invalid_argument("willie model 'single' needs W = 1");
  }
  if (c.scheme == Scheme::kDirect && c.willie_model == WillieModel::kColluding) {
    throw std::invalid_argument("direct scheme does not support colluding Willies");
  }
  if (c.scheme == Scheme::kDirect && c.params.antennas < 2) {
    throw std::invalid_argument("direct scheme needs N_s >= 2");
  }
  if (!(c.relay_radius > 0.0 && c.willie_radius > 0.0)) throw std::invalid_argument("radii must be > 0");
}

namespace detail {

inline bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw std::invalid_argument("bad boolean '" + v + "'");
}

inline std::size_t parse_count(const std::string& v) {
  const double d = std::stod(v);
  if (!(d >= 0.0) || d != std::floor(d)) throw std::invalid_argument("bad count '" + v + "'");
  return static_cast<std::size_t>(d);
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Moves the relay center to distance d from the source on the source-destination line.
inline void place_relay(Topology& t, double d) {
  const double len = distance(t.source, t.destination);
  const Point dir{(t.destination.x - t.source.x) / len, (t.destination.y - t.source.y) / len};
  t.relays.assign(1, Point{t.source.x + d * dir.x, t.source.y + d * dir.y});
}

}  // namespace detail

/// Sets one configuration key. Powers are in dBW.
inline void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_count;
  if (key == "scheme") c.scheme = parse_scheme(value);
  else if (key == "willie_model" || key == "willies") c.willie_model = parse_willie_model(value);
  else if (key == "selection") {
    if (value == "suboptimal") c.selection = Selection::kSuboptimal;
    else if (value == "exhaustive") c.selection = Selection::kExhaustive;
    else throw std::invalid_argument("unknown selection '" + value + "'");
  }
  else if (key == "trials") c.trials = parse_count(value);
  else if (key == "seed") c.master_seed = std::stoull(value);
  else if (key == "P") c.params.power = dbw_to_watts(parse_dbw(value));
  else if (key == "sigma2") c.params.noise = dbw_to_watts(parse_dbw(value));
  else if (key == "sigma2_w") c.params.willie_noise = dbw_to_watts(parse_dbw(value));
  else if (key == "N_s") c.params.antennas = static_cast<int>(parse_count(value));
  else if (key == "pr_t") c.params.pr_t = std::stod(value);
  else if (key == "epsilon") c.params.epsilon = std::stod(value);
  else if (key == "alpha") c.params.alpha = std::stod(value);
  else if (key == "n_symbols") c.params.symbols = static_cast<int>(parse_count(value));
  else if (key == "J") c.relays = parse_count(value);
  else if (key == "W") c.willies = parse_count(value);
  else if (key == "d_sr") detail::place_relay(c.topology, std::stod(value));
  else if (key == "scatter") c.scatter = detail::parse_bool(value);
  else if (key == "relay_radius") c.relay_radius = std::stod(value);
  else if (key == "willie_radius") c.willie_radius = std::stod(value);
  else if (key == "timing") c.timing = detail::parse_bool(value);
  else if (key == "sweep") c.sweep = parse_sweep(value);
  else if (key == "source_x") c.topology.source.x = std::stod(value);
  else if (key == "source_y") c.topology.source.y = std::stod(value);
  else if (key == "destination_x") c.topology.destination.x = std::stod(value);
  else if (key == "destination_y") c.topology.destination.y = std::stod(value);
  else if (key == "relay_x") c.topology.relays.assign(1, {std::stod(value), c.topology.relays.at(0).y});
  else if (key == "relay_y") c.topology.relays.assign(1, {c.topology.relays.at(0).x, std::stod(value)});
  else if (key == "willie_x") c.topology.willies.assign(1, {std::stod(value), c.topology.willies.at(0).y});
  else if (key == "willie_y") c.topology.willies.assign(1, {c.topology.willies.at(0).x, std::stod(value)});
  else throw std::invalid_argument("unknown configuration key '" + key + "'");
}

/// Applies "key=value".
inline void apply_assignment(ExperimentConfig& c, const std::string& line) {
  const auto eq = line.find('=');
  if (eq == std::string::npos) throw std::invalid_argument("expected key=value, got '" + line + "'");
  apply_setting(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
}

/// Flat key=value text; '#' starts a comment.
inline void apply_config_text(ExperimentConfig& c, const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  int number = 0;
  while (std::getline(ss, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    try {
      apply_assignment(c, line);
    } catch (const std::exception& e) {
      throw std::invalid_argument("line " + std::to_string(number) + ": " + e.what());
    }
  }
}

inline void apply_config_file(ExperimentConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    apply_config_text(c, ss.str());
  } catch (const std::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

/// The config with the sweep variable set to `value`.
inline ExperimentConfig at_sweep_value(ExperimentConfig c, double value) {
  std::ostringstream v;
  v.precision(17);
  v << value;
  const std::string& var = c.sweep.var;
  if (var == "P" || var == "N_s" || var == "d_sr" || var == "J" || var == "W" || var == "epsilon") {
    apply_setting(c, var, v.str());
  } else {
    throw std::invalid_argument("unsupported sweep variable '" + var + "'");
  }
  return c;
}

struct TrialOutcome {
  double rate = 0.0;
  double rho = std::numeric_limits<double>::quiet_NaN();
  double xi = std::numeric_limits<double>::quiet_NaN();
  bool feasible = false;
};

namespace detail {

inline Point sample_disk(Point center, double radius, Rng& rng) {
  const double r = radius * std::sqrt(rng.uniform());
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  return {center.x + r * std::cos(phi), center.y + r * std::sin(phi)};
}

inline bool well_separated(Point p, const std::vector<Point>& others) {
  return std::all_of(others.begin(), others.end(),
                     [p](Point q) { return distance(p, q) >= kMinNodeSeparation; });
}

}  // namespace detail

/// Node placement for one trial. With scattering, relay k and Willie k depend
/// only on earlier draws, so growing J or W keeps the first nodes in place.
inline Topology trial_topology(const ExperimentConfig& c, std::uint64_t trial_seed) {
  Topology t;
  t.source = c.topology.source;
  t.destination = c.topology.destination;
  if (!c.scatter && c.relays == 1 && c.willies == 1) {
    t.relays = {c.topology.relays.front()};
    t.willies = {c.topology.willies.front()};
    return t;
  }
  std::vector<Point> placed{t.source, t.destination};
  auto fill = [&](std::vector<Point>& out, std::size_t count, Point center, double radius, Rng& rng) {
    out.clear();
    for (std::size_t k = 0; k < count; ++k) {
      Point p = detail::sample_disk(center, radius, rng);
      while (!detail::well_separated(p, placed)) p = detail::sample_disk(center, radius, rng);
      out.push_back(p);
      placed.push_back(p);
    }
  };
  Rng relay_rng(derive_seed(trial_seed, 1));
  Rng willie_rng(derive_seed(trial_seed, 2));
  fill(t.relays, c.relays, c.topology.relays.front(), c.relay_radius, relay_rng);
  fill(t.willies, c.willies, c.topology.willies.front(), c.willie_radius, willie_rng);
  return t;
}

/// One channel draw followed by the configured optimizer; the rate is the
/// exact clamped secrecy rate at the returned operating point.
inline TrialOutcome run_trial(const ExperimentConfig& c, std::uint64_t trial_seed) {
  const Topology topo = trial_topology(c, trial_seed);
  const LinkVariances v = link_variances(topo, c.params.alpha);
  const ChannelRealization ch = sample_channels(v, c.params, derive_seed(trial_seed, 3));
  const bool colluding = c.willie_model == WillieModel::kColluding;
  TrialOutcome out;
  if (c.scheme == Scheme::kDirect) {
    const DirectResult r = direct_optimize(ch, c.params);
    out.feasible = r.feasible;
    if (r.feasible) {
      out.rate = r.rate;
      out.rho = r.rho;
    }
    return out;
  }
  AllocationResult r;
  if (c.scheme == Scheme::kTwoHop || c.selection == Selection::kSuboptimal) {
    const std::size_t relay = c.scheme == Scheme::kTwoHop ? 0 : select_relay_suboptimal(ch.h_rd);
    r = allocate_for_relay(ch, c.params, v, relay, colluding);
  } else {
    r = select_relay_exhaustive(ch, c.params, v, colluding).second;
  }
  out.feasible = r.feasible;
  if (r.feasible) {
    out.rate = r.rate;
    out.rho = r.split.rho;
    out.xi = r.split.xi;
  }
  return out;
}

/// Order-fixed pairwise summation.
inline double pairwise_sum(const double* x, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

inline double pairwise_mean(const std::vector<double>& x) {
  return x.empty() ? std::numeric_limits<double>::quiet_NaN()
                   : pairwise_sum(x.data(), x.size()) / static_cast<double>(x.size());
}

/// Worker count from COVERT_RELAY_THREADS, else the hardware concurrency.
inline std::size_t worker_count() {
  if (const char* env = std::getenv("COVERT_RELAY_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<std::size_t>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls job(i) for i in [0, count) on the worker pool.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& job) {
  const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          job(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct SweepResult {
  std::string sweep_var;
  double sweep_value = 0.0;
  Scheme scheme = Scheme::kTwoHop;
  WillieModel willie_model = WillieModel::kSingle;
  std::size_t w = 1;
  std::size_t j = 1;
  int antennas = 1;
  double epsilon = 0.0;
  double ergodic_rate = 0.0;
  double mean_rho = 0.0;
  double mean_xi = 0.0;
  double feasible_frac = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
  std::vector<double> trial_rates;  ///< per trial, in trial order

  double standard_error() const {
    const double n = static_cast<double>(trial_rates.size());
    if (n < 2) return 0.0;
    std::vector<double> sq(trial_rates.size());
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = (trial_rates[i] - ergodic_rate) * (trial_rates[i] - ergodic_rate);
    return std::sqrt(pairwise_sum(sq.data(), sq.size()) / (n - 1.0) / n);
  }
};

/// Trial t uses seed derive_seed(master_seed, t) for every sweep value, so
/// neighboring sweep points share channel draws.
inline SweepResult ergodic_rate(const ExperimentConfig& base, double sweep_value) {
  const ExperimentConfig c = at_sweep_value(base, sweep_value);
  validate(c);
  const auto start = std::chrono::steady_clock::now();
  std::vector<TrialOutcome> outcomes(c.trials);
  parallel_for(c.trials, [&](std::size_t t) { outcomes[t] = run_trial(c, derive_seed(c.master_seed, t)); });

  SweepResult r;
  r.sweep_var = c.sweep.var;
  r.sweep_value = sweep_value;
  r.scheme = c.scheme;
  r.willie_model = c.willie_model;
  r.w = c.willies;
  r.j = c.relays;
  r.antennas = c.params.antennas;
  r.epsilon = c.params.epsilon;
  r.trials = c.trials;
  r.seed = c.master_seed;
  std::vector<double> rhos;
  std::vector<double> xis;
  std::size_t feasible = 0;
  for (const auto& o : outcomes) {
    r.trial_rates.push_back(o.rate);
    if (!o.feasible) continue;
    ++feasible;
    rhos.push_back(o.rho);
    if (!std::isnan(o.xi)) xis.push_back(o.xi);
  }
  r.ergodic_rate = pairwise_mean(r.trial_rates);
  r.mean_rho = pairwise_mean(rhos);
  r.mean_xi = pairwise_mean(xis);
  r.feasible_frac = static_cast<double>(feasible) / static_cast<double>(c.trials);
  if (c.timing) {
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return r;
}

inline std::vector<SweepResult> run_sweep(const ExperimentConfig& c) {
  std::vector<SweepResult> out;
  for (double v : c.sweep.values) out.push_back(ergodic_rate(c, v));
  return out;
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig3", "fig4", "fig5", "fig6", "fig7"};
  return names;
}

/// Series making up a figure preset. `overrides` are key=value assignments
/// applied to every series after the preset's own settings.
inline std::vector<ExperimentConfig> preset_series(const std::string& name,
                                                   const std::vector<std::string>& overrides = {}) {
  std::vector<std::vector<std::string>> series;
  if (name == "fig3") {
    for (const char* scheme : {"two_hop", "direct"}) {
      series.push_back({std::string("scheme=") + scheme, "N_s=16", "sweep=P=0,5,10,15,20"});
    }
  } else if (name == "fig4") {
    for (const char* eps : {"0.01", "0.001"}) {
      series.push_back({"scheme=two_hop", std::string("epsilon=") + eps, "sweep=N_s=8,16,32,64"});
    }
  } else if (name == "fig5") {
    for (const char* ns : {"16", "64"}) {
      series.push_back({"scheme=two_hop", std::string("N_s=") + ns, "sweep=d_sr=2,3,4,5,6,7,8,9"});
    }
  } else if (name == "fig6") {
    for (const char* scheme : {"two_hop_multi_relay", "direct"}) {
      for (const char* w : {"1", "5", "10"}) {
        series.push_back({std::string("scheme=") + scheme, "willie_model=non_colluding", std::string("W=") + w,
                          "N_s=16", "scatter=true", "sweep=J=1,2,4,8"});
      }
    }
  } else if (name == "fig7") {
    for (const char* model : {"non_colluding", "colluding"}) {
      for (const char* w : {"1", "5", "10"}) {
        series.push_back({"scheme=two_hop_multi_relay", std::string("willie_model=") + model,
                          std::string("W=") + w, "N_s=16", "scatter=true", "sweep=J=1,2,4,8"});
      }
    }
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  std::vector<ExperimentConfig> out;
  for (const auto& settings : series) {
    ExperimentConfig c;
    c.params.epsilon = 0.1;
    for (const auto& s : settings) apply_assignment(c, s);
    for (const auto& s : overrides) apply_assignment(c, s);
    out.push_back(c);
  }
  return out;
}

inline std::vector<SweepResult> run_preset(const std::string& name,
                                           const std::vector<std::string>& overrides = {}) {
  std::vector<SweepResult> out;
  for (const auto& c : preset_series(name, overrides)) {
    auto part = run_sweep(c);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

inline constexpr const char* kCsvHeader =
    "sweep_var,sweep_value,scheme,willie_model,W,J,N_s,epsilon,ergodic_rate_bits,mean_rho,mean_xi,"
    "feasible_frac,trials,seed,wall_ms";

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(const std::vector<SweepResult>& results, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : results) {
    out << r.sweep_var << ',' << format_double(r.sweep_value) << ',' << to_string(r.scheme) << ','
        << to_string(r.willie_model) << ',' << r.w << ',' << r.j << ',' << r.antennas << ','
        << format_double(r.epsilon) << ',' << format_double(r.ergodic_rate) << ','
        << format_double(r.mean_rho) << ',' << format_double(r.mean_xi) << ','
        << format_double(r.feasible_frac) << ',' << r.trials << ',' << r.seed << ','
        << format_double(r.wall_ms) << '\n';
  }
}

inline void emit_csv(const std::vector<SweepResult>& results, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(results, out);
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace covert_relay

#endif  // COVERT_RELAY_EXPERIMENTS_HPP
