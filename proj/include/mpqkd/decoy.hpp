#pragma once

#include <array>

#include "mpqkd/observed_stats.hpp"
#include "mpqkd/stat_bounds.hpp"

namespace mpqkd {

// Truncated Poisson masses of the four decoy intensities; rows hold
// n = 0, 1, 2 for nu_a (a), mu_a (a_prime), nu_b (b) and mu_b (b_prime).
struct PoissonCoeffs {
  std::array<double, 3> a{};
  std::array<double, 3> a_prime{};
  std::array<double, 3> b{};
  std::array<double, 3> b_prime{};

  double b_tilde_12() const { return b[1] * b_prime[2] - b_prime[1] * b[2]; }
  double a_tilde_12() const { return a[1] * a_prime[2] - a_prime[1] * a[2]; }
};

PoissonCoeffs poisson_coeffs(double mu_a, double nu_a, double mu_b,
                             double nu_b);

// A rate bound that signals the protocol-abort outcome instead of silently
// clamping values past their admissible range.
struct RateBound {
  double value = 0.0;
  bool abort = false;
};

// Lower bound on the single-photon 'yield' of the raw-key classes, in the
// slot-count normalization. Clamped below at zero.
double yield_lower(const ExpectedCounts& counts, const PoissonCoeffs& coeffs,
                   const FailureSplit& split);

// Lower bound on the single-photon detections inside the raw key.
double n_z1_lower(const ExpectedCounts& counts, const PoissonCoeffs& coeffs,
                  double y_lower, const FailureSplit& split);

// Upper bound on the expected single-photon bit error rate of the X-type
// classes. Aborts at 0.5 and above.
RateBound x_bit_error_upper(const ExpectedCounts& counts,
                            const PoissonCoeffs& coeffs, double y_lower,
                            const FailureSplit& split);

// Chernoff lift of the expected error bound onto the n_z1 sample.
RateBound e_ph_upper(double n_z1_lower_count, double e_mean_upper,
                     const FailureSplit& split);

struct SixStateErrorUppers {
  RateBound e_bit_z;   // aborts at 0.5
  RateBound e_xy_sum;  // aborts at 2
};

SixStateErrorUppers sixstate_error_uppers(const ExpectedCounts& counts,
                                          const PoissonCoeffs& coeffs,
                                          double y_lower,
                                          double n_z1_lower_count,
                                          const FailureSplit& split);

// Accumulated failure probabilities of the estimation chain: eps_1 collects
// the yield components (8 of them), the error bounds 5 each.
struct FailureLedger {
  double eps_1 = 0.0;
  double eps_e = 0.0;
  double eps_e_prime = 0.0;
  double eps_e_dprime = 0.0;
};

FailureLedger failure_ledger(const FailureSplit& split);

struct SinglePhotonEstimates {
  double y_z1_lower = 0.0;
  double n_z1_lower = 0.0;
  double e_ph_upper = 0.0;
  double e_bit_z_upper = 0.0;   // six-state
  double e_xy_sum_upper = 0.0;  // six-state
  FailureLedger failures;
  bool aborted = false;
};

}  // namespace mpqkd
