#pragma once

#include <array>

namespace mpqkd {

enum class BoundDirection { Lower, Upper };

// Bound together with the deviation the root-finder recovered, so callers
// can back-substitute into the defining tail equation. deviation is 0 at
// xi = 1 and at the degenerate zero-value inputs; a clamped lower observed
// bound reports deviation 1.
struct ChernoffSolution {
  double bound = 0.0;
  double deviation = 0.0;
};

// Chernoff interval for the observed value of a sum of independent Bernoulli
// variables with known expectation. The defining transcendental equations
// are solved by bisection to machine closure, so back-substituting the
// recovered deviation reproduces xi to better than 1e-10 relative.
// Conventions at the degenerate points: expected = 0 returns 0 for both
// directions; xi = 1 returns the expectation itself.
double chernoff_observed(double expected, double xi, BoundDirection dir);
ChernoffSolution chernoff_observed_solution(double expected, double xi,
                                            BoundDirection dir);

// Chernoff interval for the unknown expectation given an observation.
// observed = 0 returns 0 for the lower direction and ln(1/xi) for the upper
// one (the limiting tail at zero observations).
double chernoff_expected(double observed, double xi, BoundDirection dir);
ChernoffSolution chernoff_expected_solution(double observed, double xi,
                                            BoundDirection dir);

// Common per-estimate failure probability. The simulation assigns the same
// xi to every named component of the estimation chain, so a single field
// carries the whole split.
struct FailureSplit {
  double xi = 1.0;

  double component() const { return xi; }
  void validate() const;
};

// Analytic joint-constraint bounds on sum(gamma_i * g_i) where each g_i is
// the expectation of the observed value observed_i. Terms are sorted by
// ascending gamma and telescoped over partial sums; xis[0] guards single
// observables and xis[3] the four-way sum. Zero-padded entries (gamma = 0,
// observed = 0) drop out, which realizes the three- and two-term uses with
// the same code path.
double joint_lower(const std::array<double, 4>& gammas,
                   const std::array<double, 4>& observed,
                   const std::array<double, 4>& xis);
double joint_upper(const std::array<double, 4>& gammas,
                   const std::array<double, 4>& observed,
                   const std::array<double, 4>& xis);

}  // namespace mpqkd
