#include "mpqkd/stat_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mpqkd {

namespace {

void check_xi(double xi) {
  if (!(xi > 0.0 && xi <= 1.0))
    throw std::invalid_argument("failure probability must lie in (0, 1]");
}

// Bisection for a strictly decreasing g with g(lo) >= target >= g(hi),
// run until the bracket closes to adjacent doubles.
template <class G>
double bisect_decreasing(G&& g, double lo, double hi, double target) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (g(mid) > target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Positive deviance kernels, evaluated as a series near v = 0 where the
// direct expressions cancel to noise.
//   kernel_a(v) = (1 + v) log1p(v) - v          = sum (-v)^k / (k (k-1))
//   kernel_b(v) = log1p(v) - v / (1 + v)        = sum (-v)^k (1-k) / k
double kernel_a(double v) {
  if (std::abs(v) > 0.5) return (1.0 + v) * std::log1p(v) - v;
  double sum = 0.0;
  double pow = v * v;  // (-v)^2
  for (int k = 2; k < 80; ++k) {
    const double term = pow / (k * (k - 1.0));
    sum += term;
    if (std::abs(term) <= 1e-17 * sum) break;
    pow *= -v;
  }
  return sum;
}

double kernel_b(double v) {
  if (std::abs(v) > 0.5) return std::log1p(v) - v / (1.0 + v);
  double sum = 0.0;
  double pow = v * v;  // (-v)^2
  for (int k = 2; k < 80; ++k) {
    const double term = pow * (k - 1.0) / k;
    sum += term;
    if (std::abs(term) <= 1e-17 * sum) break;
    pow *= -v;
  }
  return sum;
}

double expand_upper_bracket(double (*g)(double, double), double scale,
                            double target, bool* out_of_range = nullptr) {
  double hi = 1.0;
  while (g(hi, scale) > target) {
    hi *= 2.0;
    if (hi > 1e15) {
      if (out_of_range) {
        *out_of_range = true;
        return hi;
      }
      throw std::runtime_error("no root in bracket for Chernoff deviation");
    }
  }
  if (out_of_range) *out_of_range = false;
  return hi;
}

// log of the four defining tail expressions, each strictly decreasing in
// the deviation.
double log_tail_obs_lower(double d, double e) { return -e * kernel_a(-d); }
double log_tail_obs_upper(double d, double e) { return -e * kernel_a(d); }
double log_tail_exp_lower(double d, double o) { return -o * kernel_b(d); }
double log_tail_exp_upper(double d, double o) { return -o * kernel_b(-d); }

}  // namespace

void FailureSplit::validate() const { check_xi(xi); }

ChernoffSolution chernoff_observed_solution(double expected, double xi,
                                            BoundDirection dir) {
  check_xi(xi);
  if (!(expected >= 0.0))
    throw std::invalid_argument("expected count must be >= 0");
  if (expected == 0.0) return {0.0, 0.0};
  if (xi == 1.0) return {expected, 0.0};
  const double target = std::log(xi);
  if (dir == BoundDirection::Lower) {
    // At deviation 1 the tail equals e^{-expected}; a smaller xi means even
    // a zero observation stays inside the confidence region.
    if (target < -expected) return {0.0, 1.0};
    const double d = bisect_decreasing(
        [&](double x) { return log_tail_obs_lower(x, expected); }, 0.0, 1.0,
        target);
    return {(1.0 - d) * expected, d};
  }
  const double hi = expand_upper_bracket(&log_tail_obs_upper, expected, target);
  const double d = bisect_decreasing(
      [&](double x) { return log_tail_obs_upper(x, expected); }, 0.0, hi,
      target);
  return {(1.0 + d) * expected, d};
}

double chernoff_observed(double expected, double xi, BoundDirection dir) {
  return chernoff_observed_solution(expected, xi, dir).bound;
}

ChernoffSolution chernoff_expected_solution(double observed, double xi,
                                            BoundDirection dir) {
  check_xi(xi);
  if (!(observed >= 0.0))
    throw std::invalid_argument("observed count must be >= 0");
  if (dir == BoundDirection::Lower) {
    if (observed == 0.0) return {0.0, 0.0};
    if (xi == 1.0) return {observed, 0.0};
    const double target = std::log(xi);
    // For observed counts far below |log xi| the deviation root runs out of
    // double range; the exact bound underflows, so 0 stands in for it (the
    // same convention as the zero-observation case).
    bool out_of_range = false;
    const double hi = expand_upper_bracket(&log_tail_exp_lower, observed,
                                           target, &out_of_range);
    if (out_of_range) return {0.0, hi};
    const double d = bisect_decreasing(
        [&](double x) { return log_tail_exp_lower(x, observed); }, 0.0, hi,
        target);
    return {observed / (1.0 + d), d};
  }
  if (observed == 0.0) return {std::log(1.0 / xi), 0.0};
  if (xi == 1.0) return {observed, 0.0};
  const double target = std::log(xi);
  const double d = bisect_decreasing(
      [&](double x) { return log_tail_exp_upper(x, observed); }, 0.0,
      1.0 - 1e-15, target);
  const double bound = observed / (1.0 - d);
  if (!(bound < 1e308)) throw std::runtime_error("upper bound diverges");
  return {bound, d};
}

double chernoff_expected(double observed, double xi, BoundDirection dir) {
  return chernoff_expected_solution(observed, xi, dir).bound;
}

namespace {

double joint_bound(const std::array<double, 4>& gammas,
                   const std::array<double, 4>& observed,
                   const std::array<double, 4>& xis, BoundDirection dir) {
  for (double g : gammas)
    if (!(g >= 0.0))
      throw std::invalid_argument("joint-constraint coefficients must be >= 0");
  for (double o : observed)
    if (!(o >= 0.0))
      throw std::invalid_argument("observed counts must be >= 0");

  std::array<int, 4> order = {0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return gammas[i] < gammas[j]; });

  // Partial sums of the observed values from the k-th sorted term onward.
  std::array<double, 4> tail_sum{};
  double acc = 0.0;
  for (int k = 3; k >= 0; --k) {
    acc += observed[order[k]];
    tail_sum[k] = acc;
  }

  double total = 0.0;
  double prev_gamma = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double coeff = gammas[order[k]] - prev_gamma;
    prev_gamma = gammas[order[k]];
    if (coeff <= 0.0) continue;
    const double xi = xis[3 - k];  // 4-way sum uses xis[3], singles xis[0]
    total += coeff * chernoff_expected(tail_sum[k], xi, dir);
  }
  return total;
}

}  // namespace

double joint_lower(const std::array<double, 4>& gammas,
                   const std::array<double, 4>& observed,
                   const std::array<double, 4>& xis) {
  return joint_bound(gammas, observed, xis, BoundDirection::Lower);
}

double joint_upper(const std::array<double, 4>& gammas,
                   const std::array<double, 4>& observed,
                   const std::array<double, 4>& xis) {
  return joint_bound(gammas, observed, xis, BoundDirection::Upper);
}

}  // namespace mpqkd
