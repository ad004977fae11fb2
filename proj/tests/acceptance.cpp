// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "covert_relay/covert_relay.hpp"

namespace cr = covert_relay;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double log_uniform(cr::Rng& rng, double lo, double hi) {
  return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * rng.uniform());
}

/// Standard error of the paired difference a - b.
double paired_se(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double m = cr::pairwise_mean(d);
  double s = 0.0;
  for (double x : d) s += (x - m) * (x - m);
  const double n = static_cast<double>(d.size());
  return std::sqrt(s / (n - 1.0) / n);
}

cr::PhaseScales scales(double lj, double ls, double s2) { return {lj, ls, s2, cr::Phase::kFirst}; }

Verdict certificate_identity() {
  cr::Rng rng(101);
  double worst_identity = 0.0;
  double worst_beat = -1.0;
  for (int i = 0; i < 1000; ++i) {
    const double lj = log_uniform(rng, 1e-3, 1e3);
    const double ls = log_uniform(rng, 1e-3, 1e3);
    const cr::PhaseScales s = scales(lj, ls, 0.0);
    const double lhs = 1.0 - cr::min_error_sum(s);
    const double rhs = std::exp(std::log(lj / ls) * lj / (ls - lj));
    worst_identity = std::max(worst_identity, std::abs(lhs - rhs));
    const double closed = cr::min_error_sum(s);
    const double span = 3.0 * cr::optimal_threshold(s);
    double grid = 2.0;
    for (int k = 1; k <= 100000; ++k) grid = std::min(grid, cr::fa_md(s, span * k / 100000.0).error_sum);
    worst_beat = std::max(worst_beat, closed - grid);
  }
  return {worst_identity < 1e-9 && worst_beat <= 1e-6,
          fmt("max identity error %.3g, max grid improvement %.3g", worst_identity, worst_beat)};
}

Verdict monte_carlo_detection() {
  cr::Rng rng(202);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const cr::PhaseScales s = scales(log_uniform(rng, 1e-2, 1e2), log_uniform(rng, 1e-2, 1e2), log_uniform(rng, 1e-3, 1.0));
    const double t = cr::optimal_threshold(s);
    const auto mc = cr::monte_carlo_detection(s, 10000, 10000, t, 900 + i);
    const auto ex = cr::fa_md(s, t);
    worst = std::max({worst, std::abs(mc.p_fa - ex.p_fa), std::abs(mc.p_md - ex.p_md)});
  }
  return {worst <= 0.01, fmt("max |MC - analytic| over 20 configurations %.4f", worst)};
}

Verdict no_jamming() {
  const double s2 = 1e-5;
  double worst = 0.0;
  for (double ratio : {1e3, 1e4, 1e5, 1e6, 1e8}) {
    // Phase 1 with rho = 1 and phase 2 with xi = 0 both leave lambda_j = 0.
    for (double scale : {1.0, 3.0}) {
      const double ls = ratio * scale * s2;
      std::vector<double> grid;
      for (int k = 1; k <= 10000; ++k) grid.push_back(s2 + 10.0 * ls * k / 10000.0);
      worst = std::max(worst, cr::no_jamming_grid_min(ls, s2, grid));
    }
  }
  return {worst < 0.01, fmt("max grid-minimized error sum %.3g", worst)};
}

Verdict sca_vs_oracle() {
  cr::Rng rng(404);
  int instances = 0;
  int close = 0;
  double worst = 0.0;
  bool monotone = true;
  while (instances < 200) {
    cr::SystemParams p;
    p.epsilon = 0.01 + 0.98 * rng.uniform();
    const cr::WillieLinks l{log_uniform(rng, 1e-4, 1e-1), log_uniform(rng, 1e-4, 1e-1), log_uniform(rng, 1e-4, 1e-1)};
    const double vs = log_uniform(rng, 1e-2, 1e2);
    const double grd = log_uniform(rng, 1.0, 1e7);
    const cr::LinkGains g{vs * grd, grd};
    const auto r = cr::sca_optimize(p, l, g);
    if (!r.feasible) continue;
    ++instances;
    const auto o = cr::grid_oracle(p, cr::covert_box_bounds(p, l), g, 2000);
    const double gap = std::abs(r.model_rate - o.model_rate);
    worst = std::max(worst, gap);
    close += gap <= 1e-3;
    for (std::size_t k = 1; k < r.trajectory.size(); ++k) {
      monotone = monotone && r.trajectory[k] >= r.trajectory[k - 1] - 1e-9;
    }
  }
  return {close >= 190 && worst <= 1e-2 && monotone,
          fmt("%d/200 within 1e-3 bits, worst gap %.3g, trajectories %s", close, worst,
              monotone ? "monotone" : "NOT monotone")};
}

cr::Topology scattered(cr::Rng& rng, std::size_t relays, std::size_t willies) {
  cr::ExperimentConfig c;
  c.scheme = cr::Scheme::kTwoHopMultiRelay;
  c.willie_model = cr::WillieModel::kNonColluding;
  c.scatter = true;
  c.relays = relays;
  c.willies = willies;
  return cr::trial_topology(c, rng.next_u64());
}

Verdict covert_outputs() {
  cr::Rng rng(505);
  int violations = 0;
  int checked = 0;
  double fused_worst = 2.0;
  auto check = [&](double error_sum, double eps) {
    ++checked;
    violations += error_sum < 1.0 - eps - 1e-9;
  };
  for (int i = 0; i < 1000; ++i) {
    cr::SystemParams p;
    p.epsilon = 0.01 + 0.98 * rng.uniform();
    p.antennas = 2 + static_cast<int>(rng.uniform() * 31.0);
    const std::size_t relays = 1 + static_cast<std::size_t>(rng.uniform() * 4.0);
    const std::size_t willies = 1 + static_cast<std::size_t>(rng.uniform() * 5.0);
    const auto v = cr::link_variances(scattered(rng, relays, willies), p.alpha);
    const auto ch = cr::sample_channels(v, p, rng.next_u64());
    auto verify_two_hop = [&](const cr::AllocationResult& r, std::size_t relay) {
      if (!r.feasible) return;
      for (const auto& l : cr::willie_links(v, relay)) {
        check(cr::min_error_sum(cr::phase_scales(r.split, p, l, cr::Phase::kFirst)), p.epsilon);
        check(cr::min_error_sum(cr::phase_scales(r.split, p, l, cr::Phase::kSecond)), p.epsilon);
      }
    };
    switch (i % 4) {
      case 0:
        verify_two_hop(cr::allocate_for_relay(ch, p, v, 0), 0);
        break;
      case 1: {
        const auto [idx, r] = cr::select_relay_exhaustive(ch, p, v);
        verify_two_hop(r, idx);
        break;
      }
      case 2: {
        const auto r = cr::allocate_for_relay(ch, p, v, 0, true);
        verify_two_hop(r, 0);
        if (r.feasible) {
          for (cr::Phase ph : {cr::Phase::kFirst, cr::Phase::kSecond}) {
            std::vector<cr::PhaseScales> ws;
            for (const auto& l : cr::willie_links(v, 0)) ws.push_back(cr::phase_scales(r.split, p, l, ph));
            check(cr::clt_min_error_sum(cr::clt_moments_pooled(ws)), p.epsilon);
            // Exact fused-energy error sum, reported only.
            std::vector<double> silent;
            std::vector<double> active;
            for (const auto& s : ws) {
              silent.push_back(1.0 / s.lambda_j);
              active.push_back(1.0 / s.lambda_j);
              active.push_back(1.0 / s.lambda_s);
            }
            const auto m = cr::clt_moments_pooled(ws);
            const double floor = static_cast<double>(ws.size()) * p.willie_noise;
            double best = 2.0;
            for (int k = 1; k <= 400; ++k) {
              const double x = (m.mu_md + 6.0 * m.sigma_md - floor) * k / 400.0;
              best = std::min(best, cr::hypoexponential_tail(silent, x) + cr::hypoexponential_cdf(active, x));
            }
            fused_worst = std::min(fused_worst, best - (1.0 - p.epsilon));
          }
        }
        break;
      }
      default: {
        const auto r = cr::direct_optimize(ch, p);
        if (r.feasible) {
          for (std::size_t w = 0; w < willies; ++w) {
            check(cr::min_error_sum({(1.0 - r.rho) * p.power * v.mu_sw[w], r.rho * p.power * v.mu_sw[w],
                                     p.willie_noise, cr::Phase::kFirst}),
                  p.epsilon);
          }
        }
      }
    }
  }
  return {violations == 0,
          fmt("%d violations in %d certificate checks; colluding exact fused-energy slack min %.3g (diagnostic)",
              violations, checked, fused_worst)};
}

Verdict clt_validity() {
  // Willies scattered around their center; phase-1 scales at rho = 0.5.
  cr::SystemParams p;
  std::vector<double> gaps;
  cr::Rng rng(606);
  for (std::size_t w : {2u, 5u, 10u, 20u}) {
    cr::ExperimentConfig c;
    c.scheme = cr::Scheme::kTwoHopMultiRelay;
    c.willie_model = cr::WillieModel::kNonColluding;
    c.scatter = true;
    c.willies = w;
    const auto v = cr::link_variances(cr::trial_topology(c, 6060), p.alpha);
    std::vector<cr::PhaseScales> ws;
    for (const auto& l : cr::willie_links(v, 0)) ws.push_back(cr::phase_scales({0.5, 0.5}, p, l, cr::Phase::kFirst));
    const auto m = cr::clt_moments_pooled(ws);
    double gap = 0.0;
    const double top = m.mu_md + 8.0 * m.sigma_md;
    for (int k = 0; k <= 20000; ++k) {
      const double t = top * k / 20000.0;
      gap = std::max(gap, std::abs(cr::colluding_exact_fa_md(ws, t).p_fa - cr::clt_fa_md(m, t).p_fa));
    }
    gaps.push_back(gap);
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < gaps.size(); ++i) decreasing = decreasing && gaps[i] < gaps[i - 1];

  double worst_thr = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double mu_fa = 10.0 * rng.uniform();
    const double mu_md = mu_fa + 0.1 + 10.0 * rng.uniform();
    const double sf = 0.5 + 4.5 * rng.uniform();
    const double sm = sf * (1.0 + 2.0 * rng.uniform());
    const cr::CltMoments m{mu_fa, sf, mu_md, sm, 1};
    auto err = [&](double t) { return cr::clt_fa_md(m, t).error_sum; };
    double lo = mu_fa - 5.0 * sf;
    double hi = mu_md + 5.0 * sm;
    double arg = lo;
    for (int pass = 0; pass < 3; ++pass) {
      const int n = 100000;
      double best = 3.0;
      for (int k = 0; k <= n; ++k) {
        const double t = lo + (hi - lo) * k / n;
        if (err(t) < best) {
          best = err(t);
          arg = t;
        }
      }
      const double h = 2.0 * (hi - lo) / n;
      lo = arg - h;
      hi = arg + h;
    }
    worst_thr = std::max(worst_thr, std::abs(cr::clt_optimal_threshold(m) - arg));
  }
  return {gaps.back() < 0.02 && decreasing && worst_thr <= 1e-6,
          fmt("sup |exact - CLT| P_FA: W=2 %.4f, W=5 %.4f, W=10 %.4f, W=20 %.4f (%s); threshold max dev %.3g",
              gaps[0], gaps[1], gaps[2], gaps[3], decreasing ? "decreasing" : "NOT decreasing", worst_thr)};
}

std::vector<double> series_rates(const std::vector<cr::SweepResult>& rows, std::size_t begin, std::size_t count) {
  std::vector<double> out;
  for (std::size_t i = begin; i < begin + count; ++i) out.push_back(rows[i].ergodic_rate);
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + fmt("%.4f", x);
  return s;
}

Verdict fig3_trends() {
  const auto rows = cr::run_preset("fig3");
  const auto two = series_rates(rows, 0, 5);
  const auto direct = series_rates(rows, 5, 5);
  bool increasing = true;
  for (std::size_t k = 1; k < 5; ++k) increasing = increasing && two[k] > two[k - 1] && direct[k] > direct[k - 1];
  const bool low = direct[0] > two[0];
  const bool high = two[4] > direct[4];
  return {increasing && low && high,
          fmt("two-hop [%s], direct [%s]; increasing %s, direct>two-hop at 0 dBW %s, two-hop>direct at 20 dBW %s",
              join(two).c_str(), join(direct).c_str(), increasing ? "yes" : "no", low ? "yes" : "no",
              high ? "yes" : "no")};
}

Verdict fig4_trends() {
  const auto rows = cr::run_preset("fig4");
  const auto loose = series_rates(rows, 0, 4);
  const auto tight = series_rates(rows, 4, 4);
  bool below = true;
  bool band = true;
  std::string red;
  for (std::size_t k = 0; k < 3; ++k) {
    below = below && tight[k] < loose[k];
    const double reduction = (loose[k] - tight[k]) / loose[k];
    band = band && reduction >= 0.05 && reduction <= 0.30;
    red += fmt("%s%.1f%%", k ? " " : "", 100.0 * reduction);
  }
  return {below && band, fmt("eps=0.01 [%s], eps=0.001 [%s]; reductions at N_s 8,16,32: %s", join(loose).c_str(),
                             join(tight).c_str(), red.c_str())};
}

Verdict fig67_trends() {
  const auto fig6 = cr::run_preset("fig6");
  const auto fig7 = cr::run_preset("fig7");
  bool ok = true;
  std::string notes;
  for (std::size_t s = 0; s < 6; ++s) {
    for (std::size_t k = 1; k < 4; ++k) {
      const auto& prev = fig6[4 * s + k - 1];
      const auto& cur = fig6[4 * s + k];
      const double se = paired_se(cur.trial_rates, prev.trial_rates);
      const double drop = cur.scheme == cr::Scheme::kDirect ? cur.ergodic_rate - prev.ergodic_rate
                                                            : prev.ergodic_rate - cur.ergodic_rate;
      if (drop > 2.0 * se) {
        ok = false;
        notes += fmt(" [%s W=%zu J=%zu->%zu: %.4f->%.4f, 2se=%.4f]", cr::to_string(cur.scheme).c_str(), cur.w,
                     prev.j, cur.j, prev.ergodic_rate, cur.ergodic_rate, 2.0 * se);
      }
    }
  }
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t k = 0; k < 4; ++k) {
      const auto& nc = fig7[4 * s + k];
      const auto& co = fig7[12 + 4 * s + k];
      if (nc.w != 5 && nc.w != 10) continue;
      const double se = paired_se(co.trial_rates, nc.trial_rates);
      if (co.ergodic_rate - nc.ergodic_rate > 2.0 * se) {
        ok = false;
        notes += fmt(" [colluding above non-colluding W=%zu J=%zu: %.4f vs %.4f]", nc.w, nc.j, co.ergodic_rate,
                     nc.ergodic_rate);
      }
    }
  }
  std::string summary;
  for (std::size_t s = 0; s < 6; ++s) {
    summary += fmt("%s W=%zu [%s]; ", cr::to_string(fig6[4 * s].scheme).c_str(), fig6[4 * s].w,
                   join(series_rates(fig6, 4 * s, 4)).c_str());
  }
  for (std::size_t s = 3; s < 6; ++s) {
    summary += fmt("colluding W=%zu [%s]; ", fig7[4 * s].w, join(series_rates(fig7, 4 * s, 4)).c_str());
  }
  return {ok, summary + (notes.empty() ? "no significant violations" : "violations:" + notes)};
}

Verdict direct_invariants() {
  cr::Rng rng(1010);
  double worst_orth = 0.0;
  double worst_norm = 0.0;
  double worst_gamma = 0.0;
  double worst_oracle = 0.0;
  for (int i = 0; i < 300; ++i) {
    cr::SystemParams p;
    p.epsilon = 0.01 + 0.98 * rng.uniform();
    p.antennas = i < 100 ? 2 : 2 + static_cast<int>(rng.uniform() * 63.0);
    const std::size_t relays = 1 + static_cast<std::size_t>(rng.uniform() * 4.0);
    const auto v = cr::link_variances(scattered(rng, relays, 1), p.alpha);
    const auto ch = cr::sample_channels(v, p, rng.next_u64());
    const auto r = cr::direct_optimize(ch, p);
    if (!r.feasible) continue;
    const auto& z = r.jamming.z;
    worst_orth = std::max(worst_orth, std::abs(z.dot(ch.h_sd)) / (z.norm() * ch.h_sd.norm()));
    worst_norm = std::max(worst_norm, std::abs(z.squaredNorm() - (1.0 - r.rho) * p.power) / ((1.0 - r.rho) * p.power));
    cr::CVector u(r.jamming.basis.cols());
    for (Eigen::Index a = 0; a < u.size(); ++a) u(a) = rng.complex_normal(1.0);
    const auto other = cr::make_jamming(r.jamming.basis, u, r.rho, p.power).z;
    const double g1 = cr::direct_sinrs(r.rho, z, ch, p).gamma_d;
    const double g2 = cr::direct_sinrs(r.rho, other, ch, p).gamma_d;
    worst_gamma = std::max(worst_gamma, std::abs(g1 - g2) / g1);
    if (i < 100) {
      const auto o = cr::direct_rho_grid_oracle(ch, p, cr::CVector::Ones(1), 100000);
      worst_oracle = std::max(worst_oracle, std::abs(r.rate - o.value));
    }
  }
  return {worst_orth <= 1e-10 && worst_norm <= 1e-10 && worst_gamma <= 1e-12 && worst_oracle <= 1e-3,
          fmt("max |z^H h_sd|/norms %.3g, max rel norm error %.3g, max rel gamma_D change %.3g, N_s=2 oracle gap %.3g",
              worst_orth, worst_norm, worst_gamma, worst_oracle)};
}

Verdict determinism() {
  const auto dir = std::filesystem::temp_directory_path();
  const std::string a = (dir / "covert_relay_acceptance_a.csv").string();
  const std::string b = (dir / "covert_relay_acceptance_b.csv").string();
  const std::string base = std::string(COVERT_RELAY_CLI) + " --preset fig5 --seed 1 --out ";
  if (std::system((base + a).c_str()) != 0 || std::system((base + b).c_str()) != 0) {
    return {false, "CLI run failed"};
  }
  auto slurp = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string x = slurp(a);
  const std::string y = slurp(b);
  std::filesystem::remove(a);
  std::filesystem::remove(b);
  return {!x.empty() && x == y, fmt("%zu bytes, %s", x.size(), x == y ? "identical" : "DIFFERENT")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"threshold-certificate identity", certificate_identity},
      {"Monte Carlo detection", monte_carlo_detection},
      {"no-jamming detectability", no_jamming},
      {"SCA vs grid oracle", sca_vs_oracle},
      {"covertness of optimizer outputs", covert_outputs},
      {"colluding CLT validity", clt_validity},
      {"power sweep trends", fig3_trends},
      {"covertness-slack trends", fig4_trends},
      {"relay-count and collusion trends", fig67_trends},
      {"direct-scheme invariants", direct_invariants},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !v.pass;
    std::printf("%s criterion %zu (%s): %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
