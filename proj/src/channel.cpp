#include "mpqkd/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace mpqkd {

void ChannelParams::validate() const {
  if (!(dark_count_prob >= 0.0 && dark_count_prob <= 1.0))
    throw std::invalid_argument("dark_count_prob must lie in [0, 1]");
  if (!(detector_eff >= 0.0 && detector_eff <= 1.0))
    throw std::invalid_argument("detector_eff must lie in [0, 1]");
  if (!(fiber_loss_db_per_km >= 0.0))
    throw std::invalid_argument("fiber_loss_db_per_km must be >= 0");
  if (!(dist_a_km >= 0.0 && dist_b_km >= 0.0))
    throw std::invalid_argument("distances must be >= 0");
}

void IntensityProfile::validate() const {
  if (!(mu > nu && nu > 0.0))
    throw std::invalid_argument("intensities must satisfy mu > nu > 0");
  if (!(prob_mu >= 0.0 && prob_mu <= 1.0 && prob_nu >= 0.0 &&
        prob_nu <= 1.0 && prob_vac >= 0.0 && prob_vac <= 1.0))
    throw std::invalid_argument("intensity probabilities must lie in [0, 1]");
  if (std::abs(prob_mu + prob_nu + prob_vac - 1.0) > 1e-12)
    throw std::invalid_argument("intensity probabilities must sum to 1");
}

void MisalignmentParams::validate() const {
  if (!(e_d_z >= 0.0 && e_d_z <= 0.5 && e_d_x >= 0.0 && e_d_x <= 0.5))
    throw std::invalid_argument("misalignment errors must lie in [0, 0.5]");
}

double overall_efficiency(double dist_km, const ChannelParams& params) {
  if (!(dist_km >= 0.0)) throw std::invalid_argument("distance must be >= 0");
  return params.detector_eff *
         std::pow(10.0, -params.fiber_loss_db_per_km * dist_km / 10.0);
}

double bessel_i0_minus_1(double x) {
  const double t = 0.25 * x * x;
  double term = t;  // k = 1
  double sum = 0.0;
  for (int k = 1; k < 500; ++k) {
    sum += term;
    if (term <= 1e-16 * (1.0 + sum)) break;
    const double kp1 = static_cast<double>(k + 1);
    term *= t / (kp1 * kp1);
  }
  return sum;
}

double bessel_i0(double x) { return 1.0 + bessel_i0_minus_1(x); }

namespace detail {

RoundAmplitude round_amplitude(double k_a, double k_b, double eta_a,
                               double eta_b, double p_d) {
  const double u = k_a * eta_a;
  const double v = k_b * eta_b;
  RoundAmplitude amp;
  amp.y = (1.0 - p_d) * std::exp(-0.5 * (u + v));
  amp.one_minus_y = p_d - (1.0 - p_d) * std::expm1(-0.5 * (u + v));
  amp.omega = std::sqrt(u * v);
  return amp;
}

}  // namespace detail

ClickProbs click_probs_given_phase(double k_a, double k_b, double theta,
                                   double eta_a, double eta_b, double p_d) {
  const auto amp = detail::round_amplitude(k_a, k_b, eta_a, eta_b, p_d);
  const double c = amp.omega * std::cos(theta);
  // q = y (e^{+-c} - y), written through expm1 so the small-signal regime
  // keeps full precision.
  return ClickProbs{amp.y * (std::expm1(c) + amp.one_minus_y),
                    amp.y * (std::expm1(-c) + amp.one_minus_y)};
}

double prob_click(double k_a, double k_b, double eta_a, double eta_b,
                  double p_d) {
  const auto amp = detail::round_amplitude(k_a, k_b, eta_a, eta_b, p_d);
  return 2.0 * amp.y * (bessel_i0_minus_1(amp.omega) + amp.one_minus_y);
}

double pairing_rate(double click_prob, std::uint64_t max_interval) {
  if (!(click_prob > 0.0))
    throw std::invalid_argument("no clicks, pairing rate undefined");
  if (!(click_prob <= 1.0))
    throw std::invalid_argument("click probability must lie in (0, 1]");
  if (max_interval < 1)
    throw std::invalid_argument("pairing interval must be >= 1");
  // reach = 1 - (1-p)^l, the chance the next click lands within the window
  const double reach =
      -std::expm1(static_cast<double>(max_interval) * std::log1p(-click_prob));
  return click_prob * reach / (1.0 + reach);
}

double plob_bound(double eta) {
  if (!(eta >= 0.0 && eta < 1.0)) {
    if (eta == 1.0) throw std::invalid_argument("infinite capacity");
    throw std::invalid_argument("eta must lie in [0, 1)");
  }
  constexpr double kLn2 = 0.69314718055994530941723212145818;
  return -std::log1p(-eta) / kLn2;
}

}  // namespace mpqkd
