#include "mpqkd/mc_oracle.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace mpqkd {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::uint64_t kSiftSeedSalt = 0x9e3779b97f4a7c15ULL;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint8_t draw_intensity(double u, double p_mu, double p_nu) {
  if (u < p_mu) return 0;
  if (u < p_mu + p_nu) return 1;
  return 2;
}

struct PhaseBits {
  double theta = 0.0;   // relative phase (j minus i), in [0, 2pi)
  int kappa = 0;        // raw key bit
  double delta = 0.0;   // alignment angle
  int r = 0;            // six-state basis label
};

PhaseBits phase_bits(double phase_i, double phase_j, bool sixstate) {
  PhaseBits out;
  double t = std::fmod(phase_j - phase_i, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  out.theta = t;
  out.kappa = t >= kPi ? 1 : 0;
  if (sixstate) {
    const int quadrant = std::min(static_cast<int>(t / (kPi / 2)), 3);
    out.r = quadrant - 2 * out.kappa;
    out.delta = t - quadrant * (kPi / 2);
  } else {
    out.delta = t - out.kappa * kPi;
  }
  return out;
}

SideBasis side_basis(std::uint8_t k_i, std::uint8_t k_j) {
  const bool vac_i = k_i == 2;
  const bool vac_j = k_j == 2;
  if (vac_i && vac_j) return SideBasis::Zero;
  if (vac_i != vac_j) return SideBasis::Z;
  if (k_i == k_j) return SideBasis::XY;
  return SideBasis::Discard;
}

// Sum label of a side: the non-vacuum intensity index if any.
SumLabel side_label(std::uint8_t k_i, std::uint8_t k_j) {
  const std::uint8_t k = std::min(k_i, k_j);
  return k == 0 ? SumLabel::Mu : (k == 1 ? SumLabel::Nu : SumLabel::Vac);
}

}  // namespace

std::vector<RoundRecord> simulate_rounds(const ProtocolConfig& cfg,
                                         std::uint64_t seed,
                                         bool clicked_only) {
  cfg.validate();
  const double n_rounds_d = cfg.total_rounds;
  if (n_rounds_d > 2e9)
    throw std::invalid_argument(
        "event-level simulation supports at most ~1e9 rounds");
  const auto n_rounds = static_cast<std::uint64_t>(n_rounds_d);

  const double eta_a = overall_efficiency(cfg.channel.dist_a_km, cfg.channel);
  const double eta_b = overall_efficiency(cfg.channel.dist_b_km, cfg.channel);
  const double p_d = cfg.channel.dark_count_prob;
  const std::array<double, 3> k_a = {cfg.intensities_a.mu,
                                     cfg.intensities_a.nu, 0.0};
  const std::array<double, 3> k_b = {cfg.intensities_b.mu,
                                     cfg.intensities_b.nu, 0.0};

  // Per-combination amplitudes; only the cos(theta) factor varies per round.
  std::array<std::array<detail::RoundAmplitude, 3>, 3> amp;
  for (int ia = 0; ia < 3; ++ia)
    for (int ib = 0; ib < 3; ++ib)
      amp[ia][ib] =
          detail::round_amplitude(k_a[ia], k_b[ib], eta_a, eta_b, p_d);

  std::mt19937_64 rng(seed);
  std::vector<RoundRecord> out;
  if (!clicked_only) out.reserve(n_rounds);

  for (std::uint64_t i = 0; i < n_rounds; ++i) {
    RoundRecord rec;
    rec.index = i;
    rec.intensity_a = draw_intensity(uniform01(rng), cfg.intensities_a.prob_mu,
                                     cfg.intensities_a.prob_nu);
    rec.intensity_b = draw_intensity(uniform01(rng), cfg.intensities_b.prob_mu,
                                     cfg.intensities_b.prob_nu);
    rec.phase_a = uniform01(rng) * kTwoPi;
    rec.phase_b = uniform01(rng) * kTwoPi;
    const double u = uniform01(rng);

    const auto& a = amp[rec.intensity_a][rec.intensity_b];
    const double c = a.omega * std::cos(rec.phase_a - rec.phase_b);
    const double q_l = a.y * (std::expm1(c) + a.one_minus_y);
    const double q_r = a.y * (std::expm1(-c) + a.one_minus_y);
    if (u < q_l)
      rec.click = Click::L;
    else if (u < q_l + q_r)
      rec.click = Click::R;

    if (!clicked_only || rec.click != Click::None) out.push_back(rec);
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> pair_events(
    const std::vector<RoundRecord>& rounds, std::uint64_t max_interval) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  bool have_pending = false;
  std::size_t pending = 0;
  for (std::size_t t = 0; t < rounds.size(); ++t) {
    if (rounds[t].click == Click::None) continue;
    if (!have_pending) {
      pending = t;
      have_pending = true;
      continue;
    }
    if (rounds[t].index - rounds[pending].index <= max_interval) {
      pairs.emplace_back(pending, t);
      have_pending = false;
    } else {
      pending = t;
    }
  }
  return pairs;
}

std::vector<PairRecord> sift_and_map(
    const std::vector<RoundRecord>& rounds,
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
    const ProtocolConfig& cfg, std::uint64_t seed) {
  const bool sixstate = cfg.variant == Variant::SixState;
  std::mt19937_64 rng(seed ^ kSiftSeedSalt);
  std::vector<PairRecord> out;
  out.reserve(pairs.size());

  for (const auto& [pi, pj] : pairs) {
    const RoundRecord& ri = rounds[pi];
    const RoundRecord& rj = rounds[pj];
    PairRecord rec;
    rec.i = ri.index;
    rec.j = rj.index;
    rec.click_i = ri.click;
    rec.click_j = rj.click;
    rec.basis_a = side_basis(ri.intensity_a, rj.intensity_a);
    rec.basis_b = side_basis(ri.intensity_b, rj.intensity_b);

    const bool a_z = rec.basis_a == SideBasis::Z;
    const bool b_z = rec.basis_b == SideBasis::Z;
    const bool a_xy = rec.basis_a == SideBasis::XY;
    const bool b_xy = rec.basis_b == SideBasis::XY;
    const bool a_vac = rec.basis_a == SideBasis::Zero;
    const bool b_vac = rec.basis_b == SideBasis::Zero;

    if (rec.basis_a == SideBasis::Discard ||
        rec.basis_b == SideBasis::Discard || (a_z && b_xy) ||
        (a_xy && b_z)) {
      rec.pair_class = PairClass::Discarded;
      out.push_back(rec);
      continue;
    }

    rec.class_a = side_label(ri.intensity_a, rj.intensity_a);
    rec.class_b = side_label(ri.intensity_b, rj.intensity_b);
    const bool z_type = (a_z || a_vac) && (b_z || b_vac);
    const bool zero_pair = a_vac && b_vac;
    const bool xy_type = (a_xy || a_vac) && (b_xy || b_vac) && !zero_pair;

    // Z bank: raw key bits from which round carried the signal. Alice maps
    // the signal-in-round-i split to 1, Bob to 0; double-vacuum sides draw
    // a uniform bit.
    if (z_type || zero_pair) {
      int bit_a, bit_b;
      if (a_vac)
        bit_a = uniform01(rng) < 0.5 ? 1 : 0;
      else
        bit_a = rj.intensity_a == 2 ? 1 : 0;
      if (b_vac)
        bit_b = uniform01(rng) < 0.5 ? 1 : 0;
      else
        bit_b = rj.intensity_b == 2 ? 0 : 1;
      if (uniform01(rng) < cfg.misalignment.e_d_z) bit_b ^= 1;
      rec.z_bit_a = static_cast<std::int8_t>(bit_a);
      rec.z_bit_b = static_cast<std::int8_t>(bit_b);
      rec.pair_class = zero_pair ? PairClass::ZeroPair : PairClass::ZPair;
    }

    // X bank: bits from the relative phases, kept inside the alignment
    // windows (pairs with a vacuum side are always kept).
    if (xy_type || zero_pair) {
      rec.x_candidate = true;
      const PhaseBits pa = phase_bits(ri.phase_a, rj.phase_a, sixstate);
      const PhaseBits pb = phase_bits(ri.phase_b, rj.phase_b, sixstate);
      rec.delta_a = pa.delta;
      rec.delta_b = pb.delta;
      if (sixstate) {
        rec.r_a = static_cast<std::int8_t>(pa.r);
        rec.r_b = static_cast<std::int8_t>(pb.r);
      }

      bool retained = false;
      bool flip_b = false;
      int label_r = 0;
      if (a_vac || b_vac) {
        // One side announced the vacuum class: no window test applies. The
        // X/Y label follows the announcing side's basis value.
        retained = true;
        label_r = a_vac && b_vac ? pa.r : (a_vac ? pb.r : pa.r);
      } else if (!sixstate) {
        const double gap = pa.delta - pb.delta;
        if (std::abs(gap) <= cfg.delta) {
          retained = true;
        } else if (std::abs(gap) >= kPi - cfg.delta) {
          retained = true;
          flip_b = true;
        }
      } else {
        const double gap = pa.delta - pb.delta;
        if (pa.r == pb.r && std::abs(gap) <= cfg.delta) {
          retained = true;
          label_r = pa.r;
        } else if (pa.r != pb.r && std::abs(gap) >= kPi / 2 - cfg.delta) {
          retained = true;
          label_r = pa.r;  // r_b flips toward r_a
          // Flip table: the key bit flips when the announced basis values
          // and the sign of the angle gap point the same way.
          const bool b_ahead = pb.delta - pa.delta >= kPi / 2 - cfg.delta;
          if (pa.r == 0)
            flip_b = b_ahead;
          else
            flip_b = !b_ahead;
        }
      }

      if (retained) {
        int bit_a = pa.kappa;
        int bit_b = pb.kappa;
        if (flip_b) bit_b ^= 1;
        if (rec.click_i != rec.click_j) bit_b ^= 1;
        if (uniform01(rng) < cfg.misalignment.e_d_x) bit_b ^= 1;
        rec.x_bit_a = static_cast<std::int8_t>(bit_a);
        rec.x_bit_b = static_cast<std::int8_t>(bit_b);
        if (!zero_pair)
          rec.pair_class = sixstate && label_r == 1 ? PairClass::YPair
                                                    : PairClass::XPair;
        // '0'-pairs keep the ZeroPair class; their X/Y label is r_a.
      } else {
        rec.pair_class = PairClass::Discarded;
      }
    }
    out.push_back(rec);
  }
  return out;
}

ExpectedCounts tally(const std::vector<PairRecord>& records,
                     const ProtocolConfig& cfg) {
  ExpectedCounts t;
  t.variant = cfg.variant;
  const bool sixstate = cfg.variant == Variant::SixState;
  // Slot counts are the fixed normalization convention, not an observable;
  // carrying them here makes the tally a drop-in input for the estimators.
  const auto [slot_z, slot_x] = slot_counts(cfg);
  t.slot_z = slot_z;
  t.slot_x = slot_x;
  if (sixstate) t.slot_x_bar = slot_x.scaled(0.5);
  for (const PairRecord& rec : records) {
    const bool z_bank = rec.z_bit_a >= 0;
    const bool x_bank = rec.x_bit_a >= 0;
    if (z_bank) {
      t.n_z.at(rec.class_a, rec.class_b) += 1.0;
      if (rec.z_bit_a != rec.z_bit_b) t.m_z.at(rec.class_a, rec.class_b) += 1.0;
    }
    if (rec.x_candidate) t.n_x_all.at(rec.class_a, rec.class_b) += 1.0;
    if (x_bank) {
      t.n_x.at(rec.class_a, rec.class_b) += 1.0;
      const bool err = rec.x_bit_a != rec.x_bit_b;
      if (err) t.m_x.at(rec.class_a, rec.class_b) += 1.0;
      if (sixstate && err) {
        // '0'-pairs carry their label in r_a, X/Y pairs in the class.
        const bool y_label = rec.pair_class == PairClass::YPair ||
                             (rec.pair_class == PairClass::ZeroPair &&
                              rec.r_a == 1);
        if (y_label)
          t.m_y_bar.at(rec.class_a, rec.class_b) += 1.0;
        else
          t.m_x_bar.at(rec.class_a, rec.class_b) += 1.0;
      }
    }
  }
  return t;
}

double pairing_rate_mc(double click_prob, std::uint64_t max_interval,
                       std::uint64_t rounds, std::uint64_t seed) {
  if (!(click_prob > 0.0 && click_prob <= 1.0))
    throw std::invalid_argument("click probability must lie in (0, 1]");
  std::mt19937_64 rng(seed);
  const double log_q = std::log1p(-click_prob);
  std::uint64_t pos = 0;
  std::uint64_t pending = 0;
  bool have_pending = false;
  std::uint64_t pairs = 0;
  while (true) {
    // geometric gap >= 1 by inversion sampling
    std::uint64_t gap = 1;
    if (click_prob < 1.0) {
      const double u = 1.0 - uniform01(rng);  // (0, 1]
      gap = 1 + static_cast<std::uint64_t>(std::floor(std::log(u) / log_q));
    }
    pos += gap;
    if (pos > rounds) break;
    if (!have_pending) {
      pending = pos;
      have_pending = true;
    } else if (pos - pending <= max_interval) {
      ++pairs;
      have_pending = false;
    } else {
      pending = pos;
    }
  }
  return static_cast<double>(pairs) / static_cast<double>(rounds);
}

}  // namespace mpqkd
