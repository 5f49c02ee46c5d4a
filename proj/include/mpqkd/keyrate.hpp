#pragma once

#include "mpqkd/decoy.hpp"

namespace mpqkd {

// Composable-security budget with every user coefficient tied to the common
// xi (eps_cor = eps_hat = eps_pa = xi).
struct SecurityBudget {
  double eps_tol = 0.0;
  double eps_cor = 0.0;
  double eps_hat = 0.0;
  double eps_pa = 0.0;
  double xi = 0.0;
  double eps_bar = 0.0;
  double eps_sec = 0.0;
  Variant variant = Variant::Original;
};

double binary_entropy(double x);

// Information revealed by error correction: f * n_z * h(error_rate).
double lambda_ec(double n_z, double error_rate_z, double f_ec);

// Solves eps_cor(xi) + eps_sec(xi) = eps_tol by bisection. The closed
// relations are 4 xi + 4 sqrt(13 xi) = eps_tol for the original protocol and
// 4 xi + 4 sqrt(13 xi (2 - 13 xi)) = eps_tol for the six-state one.
SecurityBudget solve_xi(double eps_tol, Variant variant);

struct KeyLengthOutcome {
  double length = 0.0;  // right-hand side, may be negative
  bool abort = false;
};

KeyLengthOutcome key_length_original(const SinglePhotonEstimates& est,
                                     double n_z, double error_rate_z,
                                     double f_ec, const SecurityBudget& budget);
KeyLengthOutcome key_length_sixstate(const SinglePhotonEstimates& est,
                                     double n_z, double error_rate_z,
                                     double f_ec, const SecurityBudget& budget);

struct KeyRateResult {
  double key_length = 0.0;  // clamped at 0
  double key_rate = 0.0;    // key_length / N
  double n_z = 0.0;
  double error_rate_z = 0.0;
  double lambda_ec_bits = 0.0;
  SinglePhotonEstimates estimates;
  bool aborted = false;
};

// Full simulation pipeline: analytic observed values, decoy estimation and
// the final key length. Deterministic in (cfg, budget, f_ec).
KeyRateResult compute_rate(const ProtocolConfig& cfg,
                           const SecurityBudget& budget, double f_ec);

}  // namespace mpqkd
