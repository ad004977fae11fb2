#ifndef COVERT_RELAY_DETAIL_SCALAR_SEARCH_HPP
#define COVERT_RELAY_DETAIL_SCALAR_SEARCH_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>

namespace covert_relay::detail {

struct ScalarMax {
  double x = 0.0;
  double value = -std::numeric_limits<double>::infinity();
};

/// Golden-section maximization of a unimodal f on [lo, hi]; stops when the
/// bracket is narrower than tol. Endpoints are compared at the end so a
/// maximum sitting on the boundary is returned exactly.
template <typename F>
ScalarMax golden_section_max(F&& f, double lo, double hi, double tol) {
  if (!(hi > lo)) return {lo, f(lo)};
  constexpr double kInvPhi = 0.6180339887498948482;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  ScalarMax best = fc >= fd ? ScalarMax{c, fc} : ScalarMax{d, fd};
  for (double edge : {lo, hi}) {
    const double fe = f(edge);
    if (fe > best.value) best = {edge, fe};
  }
  return best;
}

/// Evaluates f on `points` equally spaced nodes of [lo, hi] (endpoints
/// included) and returns the best node.
template <typename F>
ScalarMax grid_max(F&& f, double lo, double hi, std::size_t points) {
  ScalarMax best;
  if (points < 2 || !(hi > lo)) return {lo, f(lo)};
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k) {
    const double x = k + 1 == points ? hi : lo + step * static_cast<double>(k);
    const double v = f(x);
    if (v > best.value) best = {x, v};
  }
  return best;
}

/// Grid bracketing followed by golden-section refinement around the best node.
template <typename F>
ScalarMax bracketed_max(F&& f, double lo, double hi, std::size_t points, double tol) {
  const ScalarMax coarse = grid_max(f, lo, hi, points);
  if (points < 2 || !(hi > lo)) return coarse;
  const double step = (hi - lo) / static_cast<double>(points - 1);
  const ScalarMax fine = golden_section_max(f, std::fmax(lo, coarse.x - step),
                                            std::fmin(hi, coarse.x + step), tol);
  return fine.value >= coarse.value ? fine : coarse;
}

/// Bisection for the boundary of a monotone predicate on [lo, hi] where
/// pred(lo) != pred(hi). Returns the final bracket.
template <typename Pred>
std::pair<double, double> bisect_boundary(Pred&& pred, double lo, double hi, double tol) {
  const bool at_lo = pred(lo);
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (pred(mid) == at_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {lo, hi};
}

}  // namespace covert_relay::detail

#endif  // COVERT_RELAY_DETAIL_SCALAR_SEARCH_HPP
