#pragma once

#include <cstdint>

namespace mpqkd {

// Detector and fiber parameters shared by the two arms of the measurement
// node. Dark counts are per pulse and per detector.
struct ChannelParams {
  double dark_count_prob = 0.0;
  double detector_eff = 1.0;
  double fiber_loss_db_per_km = 0.2;
  double dist_a_km = 0.0;
  double dist_b_km = 0.0;

  void validate() const;
};

// Three-intensity source settings for one party. prob_vac is the weight of
// the vacuum intensity; the three probabilities must sum to one.
struct IntensityProfile {
  double mu = 0.0;
  double nu = 0.0;
  double prob_mu = 0.0;
  double prob_nu = 0.0;
  double prob_vac = 0.0;

  void validate() const;
};

struct MisalignmentParams {
  double e_d_z = 0.0;
  double e_d_x = 0.0;

  void validate() const;
};

struct ClickProbs {
  double q_left = 0.0;
  double q_right = 0.0;
};

// eta = detector_eff * 10^(-loss_db_per_km * dist / 10)
double overall_efficiency(double dist_km, const ChannelParams& params);

// Zero-order modified Bessel function of the first kind, full power series
// with term-ratio cutoff at 1e-16.
double bessel_i0(double x);
// I_0(x) - 1 summed without the leading term; exact to machine precision for
// small arguments where forming the difference would cancel.
double bessel_i0_minus_1(double x);

// Exclusive one-detector click probabilities for a single round, given the
// relative phase theta between the two incoming pulses.
ClickProbs click_probs_given_phase(double k_a, double k_b, double theta,
                                   double eta_a, double eta_b, double p_d);

// Phase-averaged probability that exactly one detector clicks.
double prob_click(double k_a, double k_b, double eta_a, double eta_b,
                  double p_d);

// Expected pairs generated per round by the greedy pairing strategy
// (pair two pending clicks when their round gap is at most max_interval,
// otherwise drop the older one).
double pairing_rate(double click_prob, std::uint64_t max_interval);

// Repeaterless secret-key capacity -log2(1 - eta).
double plob_bound(double eta);

namespace detail {

// Per-round interference amplitudes. one_minus_y is kept separately so that
// q and click probabilities stay fully accurate when y is close to 1.
struct RoundAmplitude {
  double y = 0.0;
  double one_minus_y = 0.0;
  double omega = 0.0;
};

RoundAmplitude round_amplitude(double k_a, double k_b, double eta_a,
                               double eta_b, double p_d);

}  // namespace detail

}  // namespace mpqkd
