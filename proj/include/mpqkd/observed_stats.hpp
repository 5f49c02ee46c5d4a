#pragma once

#include <utility>

#include "mpqkd/protocol.hpp"

namespace mpqkd {

// Analytic expectations of every tallied quantity, expressed in the same
// class conventions the decoy estimators consume. Counts follow the
// N*r_p/p^2 normalization, slot counts the N/2 one; the estimators only ever
// take their ratios, so the two conventions must be kept side by side.
struct ExpectedCounts {
  Variant variant = Variant::Original;
  ClassGrid n_z;      // effective Z/'0'-pair detections
  ClassGrid m_z;      // Z error counts, misalignment applied
  ClassGrid n_x_all;  // X-type detections before phase post-selection
  ClassGrid n_x;      // retained X-type detections
  ClassGrid m_x;      // X error counts, misalignment applied
  ClassGrid slot_z;   // pair-slot counts N_Z^k
  ClassGrid slot_x;   // N_X^k; sifted classes carry the 2*delta/pi factor
  // Six-state split, populated when variant == SixState.
  ClassGrid m_x_bar;
  ClassGrid m_y_bar;
  ClassGrid slot_x_bar;
};

ClassGrid expected_z_counts(const ProtocolConfig& cfg);
ClassGrid expected_z_errors(const ProtocolConfig& cfg);
// {before post-selection, after post-selection}
std::pair<ClassGrid, ClassGrid> expected_x_counts(const ProtocolConfig& cfg);
ClassGrid expected_x_errors(const ProtocolConfig& cfg);
// {slot_z, slot_x}
std::pair<ClassGrid, ClassGrid> slot_counts(const ProtocolConfig& cfg);

// Halves the X-pair error and slot counts into the X/Y banks. Requires a
// six-state input.
ExpectedCounts sixstate_split(const ExpectedCounts& counts);

// One-pass evaluation of all maps; click probabilities and the phase
// quadratures are shared across the individual operations above.
ExpectedCounts gather_expected_counts(const ProtocolConfig& cfg);

// theta/delta-averaged click products for one sifted X class:
//   keep:  <(q_L + q_R)_i (q_L + q_R)_j>
//   error: <q_L_i q_R_j + q_R_i q_L_j>
// with round j evaluated at theta + delta, delta averaged over
// [-delta_max, delta_max] and theta over a full period.
struct XPairBrackets {
  double keep = 0.0;
  double error = 0.0;
};

XPairBrackets x_pair_brackets(double omega, double y, double one_minus_y,
                              double delta_max);

}  // namespace mpqkd
