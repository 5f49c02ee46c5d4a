#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mpqkd/observed_stats.hpp"

namespace mpqkd {

enum class Click : std::uint8_t { None = 0, L = 1, R = 2 };

enum class SideBasis : std::uint8_t { Z = 0, XY = 1, Zero = 2, Discard = 3 };

enum class PairClass : std::uint8_t {
  ZPair = 0,
  XPair = 1,
  YPair = 2,
  ZeroPair = 3,
  Discarded = 4
};

struct RoundRecord {
  std::uint64_t index = 0;
  std::uint8_t intensity_a = 2;  // 0 = mu, 1 = nu, 2 = vacuum
  std::uint8_t intensity_b = 2;
  double phase_a = 0.0;
  double phase_b = 0.0;
  Click click = Click::None;
};

// One paired double round after sifting and key mapping. '0'-pairs carry a
// bit in both banks: the Z bank holds the randomly assigned raw-key bits,
// the X bank the phase-derived ones used for error estimation. Bits are
// stored after every flip (phase window, click pattern, misalignment);
// -1 marks a bank that does not apply.
struct PairRecord {
  std::uint64_t i = 0;
  std::uint64_t j = 0;
  SideBasis basis_a = SideBasis::Discard;
  SideBasis basis_b = SideBasis::Discard;
  PairClass pair_class = PairClass::Discarded;
  SumLabel class_a = SumLabel::Vac;
  SumLabel class_b = SumLabel::Vac;
  bool x_candidate = false;  // counts toward the pre-selection X tally
  std::int8_t z_bit_a = -1, z_bit_b = -1;
  std::int8_t x_bit_a = -1, x_bit_b = -1;
  double delta_a = 0.0, delta_b = 0.0;
  std::int8_t r_a = -1, r_b = -1;  // six-state basis labels before flips
  Click click_i = Click::None, click_j = Click::None;
};

// Samples total_rounds rounds. Draw order per round is fixed (intensity a,
// intensity b, phase a, phase b, click uniform) so identical seeds yield
// identical streams. With clicked_only the returned vector holds just the
// effective detections.
std::vector<RoundRecord> simulate_rounds(const ProtocolConfig& cfg,
                                         std::uint64_t seed,
                                         bool clicked_only = true);

// Greedy pairing: walk the effective detections in time order, pair the two
// pending ones when their round gap is <= max_interval, otherwise drop the
// older one. Returns position pairs into the supplied vector.
std::vector<std::pair<std::size_t, std::size_t>> pair_events(
    const std::vector<RoundRecord>& rounds, std::uint64_t max_interval);

// Basis sifting, pair assignment and key mapping. Random draws (vacuum-side
// raw-key bits, misalignment flips) come from a generator seeded with the
// given seed and are consumed in pair order: Z-bank bits first (a then b),
// then the Z misalignment flip, then the X-bank misalignment flip when the
// pair is retained for error estimation.
std::vector<PairRecord> sift_and_map(const std::vector<RoundRecord>& rounds,
                                     const std::vector<std::pair<std::size_t,
                                                                 std::size_t>>&
                                         pairs,
                                     const ProtocolConfig& cfg,
                                     std::uint64_t seed);

// Aggregates pair records into the same class grids the analytic module
// produces; errors are bits that differ after all flips.
ExpectedCounts tally(const std::vector<PairRecord>& records,
                     const ProtocolConfig& cfg);

// Pairs-per-round of a synthetic click stream with i.i.d. click probability
// click_prob, simulated by geometric gap sampling.
double pairing_rate_mc(double click_prob, std::uint64_t max_interval,
                       std::uint64_t rounds, std::uint64_t seed);

}  // namespace mpqkd
