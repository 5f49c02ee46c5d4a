#include "mpqkd/decoy.hpp"

#include <cmath>
#include <stdexcept>

namespace mpqkd {

namespace {

using SL = SumLabel;

std::array<double, 3> poisson_row(double lambda) {
  const double p0 = std::exp(-lambda);
  return {p0, lambda * p0, 0.5 * lambda * lambda * p0};
}

// Vacuum and single-photon masses of a doubled intensity 2*lambda, derived
// from the single-intensity row: e^{-2l} = p0^2, 2l e^{-2l} = 2 p1 p0.
// The X-type classes sum two pulses of the same intensity, so their photon
// statistics follow the doubled intensity even though the printed symbols
// reuse the per-pulse rows.
struct DoubledCoeffs {
  double a0, a1, b0, b1;
};

DoubledCoeffs doubled(const PoissonCoeffs& c) {
  return {c.a[0] * c.a[0], 2.0 * c.a[1] * c.a[0], c.b[0] * c.b[0],
          2.0 * c.b[1] * c.b[0]};
}

double yield_lower_oriented(const ClassGrid& n_z, const ClassGrid& slot_z,
                            const std::array<double, 3>& a,
                            const std::array<double, 3>& ap,
                            const std::array<double, 3>& b,
                            const std::array<double, 3>& bp, double xi) {
  const double btilde = b[1] * bp[2] - bp[1] * b[2];
  if (btilde == 0.0)
    throw std::invalid_argument("degenerate decoy intensities");
  const std::array<double, 4> xis = {xi, xi, xi, xi};

  const std::array<double, 4> gamma_plus = {
      ap[1] * bp[2] / slot_z.at(SL::Nu, SL::Nu),
      a[1] * b[2] * ap[0] / slot_z.at(SL::Vac, SL::Mu),
      a[1] * b[2] * bp[0] / slot_z.at(SL::Mu, SL::Vac),
      (ap[1] * bp[2] * a[0] * b[0] - a[1] * b[2] * ap[0] * bp[0]) /
          slot_z.at(SL::Vac, SL::Vac)};
  const std::array<double, 4> obs_plus = {
      n_z.at(SL::Nu, SL::Nu), n_z.at(SL::Vac, SL::Mu),
      n_z.at(SL::Mu, SL::Vac), n_z.at(SL::Vac, SL::Vac)};

  const std::array<double, 4> gamma_minus = {
      a[1] * b[2] / slot_z.at(SL::Mu, SL::Mu),
      ap[1] * bp[2] * a[0] / slot_z.at(SL::Vac, SL::Nu),
      ap[1] * bp[2] * b[0] / slot_z.at(SL::Nu, SL::Vac), 0.0};
  const std::array<double, 4> obs_minus = {
      n_z.at(SL::Mu, SL::Mu), n_z.at(SL::Vac, SL::Nu),
      n_z.at(SL::Nu, SL::Vac), 0.0};

  const double y_plus = joint_lower(gamma_plus, obs_plus, xis);
  const double y_minus = joint_upper(gamma_minus, obs_minus, xis);
  return (y_plus - y_minus) / (a[1] * ap[1] * btilde);
}

}  // namespace

PoissonCoeffs poisson_coeffs(double mu_a, double nu_a, double mu_b,
                             double nu_b) {
  if (!(mu_a > nu_a && nu_a > 0.0 && mu_b > nu_b && nu_b > 0.0))
    throw std::invalid_argument("intensities must satisfy mu > nu > 0");
  PoissonCoeffs c;
  c.a = poisson_row(nu_a);
  c.a_prime = poisson_row(mu_a);
  c.b = poisson_row(nu_b);
  c.b_prime = poisson_row(mu_b);
  return c;
}

double yield_lower(const ExpectedCounts& counts, const PoissonCoeffs& coeffs,
                   const FailureSplit& split) {
  split.validate();
  // Branch on a1'b2' a2 b1 <= a2'b1' a1 b2 (cross-multiplied); the opposite
  // branch swaps the two parties wholesale.
  const double lhs =
      coeffs.a_prime[1] * coeffs.b_prime[2] * coeffs.a[2] * coeffs.b[1];
  const double rhs =
      coeffs.a_prime[2] * coeffs.b_prime[1] * coeffs.a[1] * coeffs.b[2];
  double value = 0.0;
  if (lhs <= rhs) {
    value = yield_lower_oriented(counts.n_z, counts.slot_z, coeffs.a,
                                 coeffs.a_prime, coeffs.b, coeffs.b_prime,
                                 split.xi);
  } else {
    value = yield_lower_oriented(counts.n_z.transposed(),
                                 counts.slot_z.transposed(), coeffs.b,
                                 coeffs.b_prime, coeffs.a, coeffs.a_prime,
                                 split.xi);
  }
  return std::max(value, 0.0);
}

double n_z1_lower(const ExpectedCounts& counts, const PoissonCoeffs& coeffs,
                  double y_lower, const FailureSplit& split) {
  split.validate();
  if (!(y_lower >= 0.0))
    throw std::invalid_argument("yield lower bound must be >= 0");
  if (y_lower == 0.0) return 0.0;
  // slot * Pr(single photon | class sum) per side; the class sums of the
  // raw-key classes are the bare mu and nu intensities.
  const double inner =
      y_lower *
      (counts.slot_z.at(SL::Mu, SL::Mu) * coeffs.a_prime[1] *
           coeffs.b_prime[1] +
       counts.slot_z.at(SL::Mu, SL::Nu) * coeffs.a_prime[1] * coeffs.b[1] +
       counts.slot_z.at(SL::Nu, SL::Mu) * coeffs.a[1] * coeffs.b_prime[1] +
       counts.slot_z.at(SL::Nu, SL::Nu) * coeffs.a[1] * coeffs.b[1]);
  return chernoff_observed(inner, split.xi, BoundDirection::Lower);
}

RateBound x_bit_error_upper(const ExpectedCounts& counts,
                            const PoissonCoeffs& coeffs, double y_lower,
                            const FailureSplit& split) {
  split.validate();
  if (!(y_lower > 0.0))
    throw std::invalid_argument("single-photon yield vanishes");
  const DoubledCoeffs d = doubled(coeffs);
  const std::array<double, 4> xis = {split.xi, split.xi, split.xi, split.xi};
  const double t_plus = joint_upper(
      {1.0 / counts.slot_x.at(SL::Nu, SL::Nu),
       d.a0 * d.b0 / counts.slot_x.at(SL::Vac, SL::Vac), 0.0, 0.0},
      {counts.m_x.at(SL::Nu, SL::Nu), counts.m_x.at(SL::Vac, SL::Vac), 0.0,
       0.0},
      xis);
  const double t_minus = joint_lower(
      {d.a0 / counts.slot_x.at(SL::Vac, SL::Nu),
       d.b0 / counts.slot_x.at(SL::Nu, SL::Vac), 0.0, 0.0},
      {counts.m_x.at(SL::Vac, SL::Nu), counts.m_x.at(SL::Nu, SL::Vac), 0.0,
       0.0},
      xis);
  const double e = std::max((t_plus - t_minus) / (d.a1 * d.b1 * y_lower), 0.0);
  return RateBound{e, e >= 0.5};
}

RateBound e_ph_upper(double n_z1_lower_count, double e_mean_upper,
                     const FailureSplit& split) {
  split.validate();
  if (!(n_z1_lower_count > 0.0)) return RateBound{0.0, true};
  const double lifted =
      chernoff_observed(n_z1_lower_count * e_mean_upper, split.xi,
                        BoundDirection::Upper) /
      n_z1_lower_count;
  return RateBound{lifted, lifted >= 0.5};
}

SixStateErrorUppers sixstate_error_uppers(const ExpectedCounts& counts,
                                          const PoissonCoeffs& coeffs,
                                          double y_lower,
                                          double n_z1_lower_count,
                                          const FailureSplit& split) {
  split.validate();
  if (counts.variant != Variant::SixState)
    throw std::invalid_argument(
        "six-state error bounds require six-state counts");
  if (!(y_lower > 0.0))
    throw std::invalid_argument("single-photon yield vanishes");
  if (!(n_z1_lower_count > 0.0))
    return {RateBound{0.0, true}, RateBound{0.0, true}};

  const std::array<double, 4> xis = {split.xi, split.xi, split.xi, split.xi};

  // Z-type classes: class sums are the bare intensities.
  const double tz_plus = joint_upper(
      {1.0 / counts.slot_z.at(SL::Nu, SL::Nu),
       coeffs.a[0] * coeffs.b[0] / counts.slot_z.at(SL::Vac, SL::Vac), 0.0,
       0.0},
      {counts.m_z.at(SL::Nu, SL::Nu), counts.m_z.at(SL::Vac, SL::Vac), 0.0,
       0.0},
      xis);
  const double tz_minus = joint_lower(
      {coeffs.a[0] / counts.slot_z.at(SL::Vac, SL::Nu),
       coeffs.b[0] / counts.slot_z.at(SL::Nu, SL::Vac), 0.0, 0.0},
      {counts.m_z.at(SL::Vac, SL::Nu), counts.m_z.at(SL::Nu, SL::Vac), 0.0,
       0.0},
      xis);
  const double e_bit_mean = std::max(
      (tz_plus - tz_minus) / (coeffs.a[1] * coeffs.b[1] * y_lower), 0.0);

  // X/Y banks: halved slots, summed error counts, doubled-intensity masses.
  const DoubledCoeffs d = doubled(coeffs);
  const auto bar = [&](SL la, SL lb) {
    return counts.m_x_bar.at(la, lb) + counts.m_y_bar.at(la, lb);
  };
  const double txy_plus = joint_upper(
      {1.0 / counts.slot_x_bar.at(SL::Nu, SL::Nu),
       d.a0 * d.b0 / counts.slot_x_bar.at(SL::Vac, SL::Vac), 0.0, 0.0},
      {bar(SL::Nu, SL::Nu), bar(SL::Vac, SL::Vac), 0.0, 0.0}, xis);
  const double txy_minus = joint_lower(
      {d.a0 / counts.slot_x_bar.at(SL::Vac, SL::Nu),
       d.b0 / counts.slot_x_bar.at(SL::Nu, SL::Vac), 0.0, 0.0},
      {bar(SL::Vac, SL::Nu), bar(SL::Nu, SL::Vac), 0.0, 0.0}, xis);
  const double e_xy_mean =
      std::max((txy_plus - txy_minus) / (d.a1 * d.b1 * y_lower), 0.0);

  const double e_bit =
      chernoff_observed(n_z1_lower_count * e_bit_mean, split.xi,
                        BoundDirection::Upper) /
      n_z1_lower_count;
  const double e_xy =
      chernoff_observed(n_z1_lower_count * e_xy_mean, split.xi,
                        BoundDirection::Upper) /
      n_z1_lower_count;
  return {RateBound{e_bit, e_bit >= 0.5}, RateBound{e_xy, e_xy >= 2.0}};
}

FailureLedger failure_ledger(const FailureSplit& split) {
  return FailureLedger{8.0 * split.xi, 5.0 * split.xi, 5.0 * split.xi,
                       5.0 * split.xi};
}

}  // namespace mpqkd
