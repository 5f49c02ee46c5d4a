#include "mpqkd/keyrate.hpp"

#include <cmath>
#include <stdexcept>

namespace mpqkd {

namespace {

constexpr double kLn2 = 0.69314718055994530941723212145818;

double eps_bar_of_xi(double xi, Variant variant) {
  const double s = 13.0 * xi;  // eps_e + eps_1 = 5 xi + 8 xi
  if (variant == Variant::Original) return std::sqrt(s);
  // sqrt(1 - (1 - s)^2), written without the cancelling square
  return std::sqrt(s * (2.0 - s));
}

double eps_total_of_xi(double xi, Variant variant) {
  const double eps_bar = eps_bar_of_xi(xi, variant);
  const double eps_sec = variant == Variant::Original
                             ? 2.0 * (xi + 2.0 * eps_bar) + xi
                             : 2.0 * xi + 4.0 * eps_bar + xi;
  return xi + eps_sec;  // eps_cor = xi
}

// - log2(2 / eps_cor) - 2 log2(1 / (sqrt(2) eps_hat eps_pa))
double security_penalty_bits(const SecurityBudget& b) {
  const double cor_term = 1.0 - std::log2(b.eps_cor);
  const double pa_term =
      -2.0 * (0.5 + std::log2(b.eps_hat) + std::log2(b.eps_pa));
  return cor_term + pa_term;
}

}  // namespace

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::invalid_argument("entropy argument must lie in [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -(x * std::log2(x) + (1.0 - x) * std::log2(1.0 - x));
}

double lambda_ec(double n_z, double error_rate_z, double f_ec) {
  if (!(f_ec >= 1.0))
    throw std::invalid_argument("error-correction efficiency must be >= 1");
  return f_ec * n_z * binary_entropy(error_rate_z);
}

SecurityBudget solve_xi(double eps_tol, Variant variant) {
  if (!(eps_tol > 0.0 && eps_tol < 1.0))
    throw std::invalid_argument("eps_tol must lie in (0, 1)");
  double lo = 0.0;
  double hi = std::min(eps_tol, 1.0 / 13.0);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (eps_total_of_xi(mid, variant) < eps_tol)
      lo = mid;
    else
      hi = mid;
  }
  SecurityBudget b;
  b.eps_tol = eps_tol;
  b.xi = 0.5 * (lo + hi);
  b.eps_cor = b.eps_hat = b.eps_pa = b.xi;
  b.eps_bar = eps_bar_of_xi(b.xi, variant);
  b.eps_sec = variant == Variant::Original
                  ? 2.0 * (b.eps_hat + 2.0 * b.eps_bar) + b.eps_pa
                  : 2.0 * b.eps_hat + 4.0 * b.eps_bar + b.eps_pa;
  b.variant = variant;
  return b;
}

KeyLengthOutcome key_length_original(const SinglePhotonEstimates& est,
                                     double n_z, double error_rate_z,
                                     double f_ec,
                                     const SecurityBudget& budget) {
  if (est.aborted || est.e_ph_upper >= 0.5) return {0.0, true};
  const double length =
      est.n_z1_lower * (1.0 - binary_entropy(est.e_ph_upper)) -
      lambda_ec(n_z, error_rate_z, f_ec) - security_penalty_bits(budget);
  return {length, false};
}

KeyLengthOutcome key_length_sixstate(const SinglePhotonEstimates& est,
                                     double n_z, double error_rate_z,
                                     double f_ec,
                                     const SecurityBudget& budget) {
  if (est.aborted || est.e_bit_z_upper >= 1.0) return {0.0, true};
  double arg = (1.0 - 0.5 * (est.e_bit_z_upper + est.e_xy_sum_upper)) /
               (1.0 - est.e_bit_z_upper);
  // Tolerate representation error at the boundary; anything further out is
  // a genuine abort.
  if (arg > 1.0 && arg < 1.0 + 1e-9) arg = 1.0;
  if (arg < 0.0 || arg > 1.0) return {0.0, true};
  // The X/Y error sum is certified one-sidedly, so the admissible region is
  // every value up to the bound. Once the argument drops below 1/2 that
  // region contains the point where the entropy credit vanishes entirely;
  // no key can be certified there.
  const double entropy_credit = arg < 0.5 ? 0.0 : 1.0 - binary_entropy(arg);
  const double length =
      est.n_z1_lower * (1.0 - est.e_bit_z_upper) * entropy_credit -
      lambda_ec(n_z, error_rate_z, f_ec) - security_penalty_bits(budget);
  return {length, false};
}

KeyRateResult compute_rate(const ProtocolConfig& cfg,
                           const SecurityBudget& budget, double f_ec) {
  if (budget.variant != cfg.variant)
    throw std::invalid_argument("budget solved for a different variant");
  KeyRateResult result;
  const ExpectedCounts counts = gather_expected_counts(cfg);
  const PoissonCoeffs coeffs =
      poisson_coeffs(cfg.intensities_a.mu, cfg.intensities_a.nu,
                     cfg.intensities_b.mu, cfg.intensities_b.nu);
  const FailureSplit split{budget.xi};

  result.n_z = counts.n_z.signal_sum();
  result.error_rate_z =
      result.n_z > 0.0 ? counts.m_z.signal_sum() / result.n_z : 0.0;
  result.estimates.failures = failure_ledger(split);

  result.estimates.y_z1_lower = yield_lower(counts, coeffs, split);
  result.estimates.n_z1_lower =
      n_z1_lower(counts, coeffs, result.estimates.y_z1_lower, split);
  if (!(result.estimates.y_z1_lower > 0.0) ||
      !(result.estimates.n_z1_lower > 0.0) || !(result.n_z > 0.0)) {
    result.estimates.aborted = true;
    result.aborted = true;
    return result;
  }
  result.lambda_ec_bits = lambda_ec(result.n_z, result.error_rate_z, f_ec);

  // The phase-error bound of the original estimation chain is also reported
  // for six-state runs; the six-state abort decision does not depend on it.
  const RateBound e_mean =
      x_bit_error_upper(counts, coeffs, result.estimates.y_z1_lower, split);
  const RateBound e_ph =
      e_ph_upper(result.estimates.n_z1_lower, e_mean.value, split);
  result.estimates.e_ph_upper = e_ph.value;

  KeyLengthOutcome outcome;
  if (cfg.variant == Variant::Original) {
    if (e_mean.abort || e_ph.abort) {
      result.estimates.aborted = true;
      result.aborted = true;
      return result;
    }
    outcome = key_length_original(result.estimates, result.n_z,
                                  result.error_rate_z, f_ec, budget);
  } else {
    const SixStateErrorUppers uppers = sixstate_error_uppers(
        counts, coeffs, result.estimates.y_z1_lower,
        result.estimates.n_z1_lower, split);
    result.estimates.e_bit_z_upper = uppers.e_bit_z.value;
    result.estimates.e_xy_sum_upper = uppers.e_xy_sum.value;
    if (uppers.e_bit_z.abort || uppers.e_xy_sum.abort) {
      result.estimates.aborted = true;
      result.aborted = true;
      return result;
    }
    outcome = key_length_sixstate(result.estimates, result.n_z,
                                  result.error_rate_z, f_ec, budget);
  }
  if (outcome.abort) {
    result.estimates.aborted = true;
    result.aborted = true;
    return result;
  }
  // Negative lengths are reported as zero rate without the abort flag; the
  // estimation itself succeeded.
  result.key_length = std::max(outcome.length, 0.0);
  result.key_rate = result.key_length / cfg.total_rounds;
  return result;
}

}  // namespace mpqkd
