#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace mpqkd {

// Mean value of a periodic, smooth function over one period, trapezoid rule
// with node doubling until two resolutions agree. Converges spectrally for
// the cos-exponential integrands used here. f returns an array so several
// integrals can share the expensive evaluations.
template <std::size_t N, class F>
std::array<double, N> periodic_mean(F&& f, double period, double abs_tol,
                                    double rel_tol, int n_start = 16,
                                    int n_max = 1 << 15) {
  std::array<double, N> acc{};
  int n = n_start;
  const double h0 = period / n;
  for (int k = 0; k < n; ++k) {
    const auto fx = f(k * h0);
    for (std::size_t c = 0; c < N; ++c) acc[c] += fx[c];
  }
  std::array<double, N> mean{};
  for (std::size_t c = 0; c < N; ++c) mean[c] = acc[c] / n;

  while (n < n_max) {
    // add the midpoints of the current grid
    const double h = period / n;
    std::array<double, N> mid{};
    for (int k = 0; k < n; ++k) {
      const auto fx = f((k + 0.5) * h);
      for (std::size_t c = 0; c < N; ++c) mid[c] += fx[c];
    }
    std::array<double, N> next{};
    bool converged = true;
    for (std::size_t c = 0; c < N; ++c) {
      next[c] = 0.5 * (mean[c] + mid[c] / n);
      const double err = std::abs(next[c] - mean[c]);
      if (err > abs_tol && err > rel_tol * std::abs(next[c]))
        converged = false;
    }
    mean = next;
    n *= 2;
    if (converged) return mean;
  }
  throw std::runtime_error(
      "periodic quadrature did not converge at " + std::to_string(n_max) +
      " nodes");
}

namespace detail {

template <std::size_t N, class F>
std::array<double, N> simpson_recurse(F& f, double a, double b,
                                      const std::array<double, N>& fa,
                                      const std::array<double, N>& fm,
                                      const std::array<double, N>& fb,
                                      const std::array<double, N>& whole,
                                      double abs_tol, double rel_tol,
                                      int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const auto flm = f(lm);
  const auto frm = f(rm);
  const double h6 = (b - a) / 12.0;
  std::array<double, N> left{}, right{}, sum{};
  bool ok = true;
  for (std::size_t c = 0; c < N; ++c) {
    left[c] = h6 * (fa[c] + 4.0 * flm[c] + fm[c]);
    right[c] = h6 * (fm[c] + 4.0 * frm[c] + fb[c]);
    sum[c] = left[c] + right[c];
    const double err = std::abs(sum[c] - whole[c]);
    if (err > 15.0 * abs_tol && err > 15.0 * rel_tol * std::abs(sum[c]))
      ok = false;
  }
  if (ok) {
    for (std::size_t c = 0; c < N; ++c)
      sum[c] += (sum[c] - whole[c]) / 15.0;
    return sum;
  }
  if (depth <= 0)
    throw std::runtime_error("adaptive quadrature depth exhausted");
  const auto l = simpson_recurse<N>(f, a, m, fa, flm, fm, left,
                                    0.5 * abs_tol, rel_tol, depth - 1);
  const auto r = simpson_recurse<N>(f, m, b, fm, frm, fb, right,
                                    0.5 * abs_tol, rel_tol, depth - 1);
  std::array<double, N> out{};
  for (std::size_t c = 0; c < N; ++c) out[c] = l[c] + r[c];
  return out;
}

}  // namespace detail

// Adaptive Simpson integral of an array-valued function over [a, b].
template <std::size_t N, class F>
std::array<double, N> adaptive_simpson(F&& f, double a, double b,
                                       double abs_tol, double rel_tol,
                                       int max_depth = 48) {
  if (!(b > a)) return std::array<double, N>{};
  const auto fa = f(a);
  const double m = 0.5 * (a + b);
  const auto fm = f(m);
  const auto fb = f(b);
  const double h6 = (b - a) / 6.0;
  std::array<double, N> whole{};
  for (std::size_t c = 0; c < N; ++c)
    whole[c] = h6 * (fa[c] + 4.0 * fm[c] + fb[c]);
  return detail::simpson_recurse<N>(f, a, b, fa, fm, fb, whole, abs_tol,
                                    rel_tol, max_depth);
}

// Scalar convenience wrapper.
template <class F>
double adaptive_simpson_1(F&& f, double a, double b, double abs_tol,
                          double rel_tol, int max_depth = 48) {
  auto wrap = [&f](double x) { return std::array<double, 1>{f(x)}; };
  return adaptive_simpson<1>(wrap, a, b, abs_tol, rel_tol, max_depth)[0];
}

}  // namespace mpqkd
