#include "mpqkd/observed_stats.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mpqkd/quadrature.hpp"

namespace mpqkd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// One (round-i, round-j) intensity assignment for a single side.
struct SideSplit {
  double k_i = 0.0;
  double k_j = 0.0;
};

// Z-type side splits per sum label, with the per-split probability weight.
struct ZSide {
  std::array<SideSplit, 2> splits;
  int n_splits = 0;
  double split_prob = 0.0;  // probability of each split
};

ZSide z_side(SumLabel label, const IntensityProfile& prof) {
  switch (label) {
    case SumLabel::Mu:
      return {{SideSplit{prof.mu, 0.0}, SideSplit{0.0, prof.mu}}, 2,
              prof.prob_mu * prof.prob_vac};
    case SumLabel::Nu:
      return {{SideSplit{prof.nu, 0.0}, SideSplit{0.0, prof.nu}}, 2,
              prof.prob_nu * prof.prob_vac};
    case SumLabel::Vac:
    default:
      return {{SideSplit{0.0, 0.0}, SideSplit{}}, 1,
              prof.prob_vac * prof.prob_vac};
  }
}

// X-type sides send the same intensity in both rounds.
struct XSide {
  double k = 0.0;     // per-round intensity
  double prob = 0.0;  // probability of the (k, k) assignment
};

XSide x_side(SumLabel label, const IntensityProfile& prof) {
  switch (label) {
    case SumLabel::Mu:
      return {prof.mu, prof.prob_mu * prof.prob_mu};
    case SumLabel::Nu:
      return {prof.nu, prof.prob_nu * prof.prob_nu};
    case SumLabel::Vac:
    default:
      return {0.0, prof.prob_vac * prof.prob_vac};
  }
}

struct StatContext {
  double eta_a = 0.0;
  double eta_b = 0.0;
  double p_d = 0.0;
  double click_rate = 0.0;  // p
  double pair_rate = 0.0;   // r_p
  double count_scale = 0.0; // N * r_p / p^2

  double prc(double k_a, double k_b) const {
    return prob_click(k_a, k_b, eta_a, eta_b, p_d);
  }
};

StatContext make_context(const ProtocolConfig& cfg) {
  cfg.validate();
  StatContext ctx;
  ctx.eta_a = overall_efficiency(cfg.channel.dist_a_km, cfg.channel);
  ctx.eta_b = overall_efficiency(cfg.channel.dist_b_km, cfg.channel);
  ctx.p_d = cfg.channel.dark_count_prob;

  const IntensityProfile& pa = cfg.intensities_a;
  const IntensityProfile& pb = cfg.intensities_b;
  const std::array<std::pair<double, double>, 3> choices_a = {
      {{pa.mu, pa.prob_mu}, {pa.nu, pa.prob_nu}, {0.0, pa.prob_vac}}};
  const std::array<std::pair<double, double>, 3> choices_b = {
      {{pb.mu, pb.prob_mu}, {pb.nu, pb.prob_nu}, {0.0, pb.prob_vac}}};
  double p = 0.0;
  for (const auto& [ka, wa] : choices_a)
    for (const auto& [kb, wb] : choices_b) p += wa * wb * ctx.prc(ka, kb);
  ctx.click_rate = p;
  ctx.pair_rate = pairing_rate(p, cfg.max_pair_interval);
  ctx.count_scale = cfg.total_rounds * ctx.pair_rate / (p * p);
  return ctx;
}

void fill_z(const ProtocolConfig& cfg, const StatContext& ctx, ClassGrid* n_z,
            ClassGrid* m_z) {
  const double e_d = cfg.misalignment.e_d_z;
  for (SumLabel la : kSumLabels) {
    const ZSide sa = z_side(la, cfg.intensities_a);
    for (SumLabel lb : kSumLabels) {
      const ZSide sb = z_side(lb, cfg.intensities_b);
      double total = 0.0;
      double same_round_vac = 0.0;
      for (int i = 0; i < sa.n_splits; ++i) {
        for (int j = 0; j < sb.n_splits; ++j) {
          const SideSplit& a = sa.splits[i];
          const SideSplit& b = sb.splits[j];
          const double w = sa.split_prob * sb.split_prob *
                           ctx.prc(a.k_i, b.k_i) * ctx.prc(a.k_j, b.k_j);
          total += w;
          if ((a.k_i == 0.0 && b.k_i == 0.0) || (a.k_j == 0.0 && b.k_j == 0.0))
            same_round_vac += w;
        }
      }
      const double n = ctx.count_scale * total;
      // Sides in the vacuum class carry a uniformly random bit, so half of
      // the detections are errors before misalignment. Signal classes only
      // err when both parties sent in the same round.
      const double m0 = (la == SumLabel::Vac || lb == SumLabel::Vac)
                            ? 0.5 * n
                            : ctx.count_scale * same_round_vac;
      if (n_z) n_z->at(la, lb) = n;
      if (m_z) m_z->at(la, lb) = (1.0 - e_d) * m0 + e_d * (n - m0);
    }
  }
}

void fill_x(const ProtocolConfig& cfg, const StatContext& ctx,
            ClassGrid* n_all, ClassGrid* n_ret, ClassGrid* m_ret) {
  const double e_d = cfg.misalignment.e_d_x;
  const double sift = 2.0 * cfg.delta / std::numbers::pi;

  // Brackets depend on the class only through (omega, y); cache across the
  // four sifted classes (two coincide for symmetric configurations).
  struct CacheEntry {
    double omega = -1.0, y = -1.0;
    XPairBrackets br;
  };
  std::array<CacheEntry, 4> cache;
  int n_cached = 0;

  for (SumLabel la : kSumLabels) {
    const XSide sa = x_side(la, cfg.intensities_a);
    for (SumLabel lb : kSumLabels) {
      const XSide sb = x_side(lb, cfg.intensities_b);
      const double prob = sa.prob * sb.prob;
      const double prc_round = ctx.prc(sa.k, sb.k);
      const double all = ctx.count_scale * prob * prc_round * prc_round;
      if (n_all) n_all->at(la, lb) = all;

      double n = 0.0, m0 = 0.0;
      if (la == SumLabel::Vac || lb == SumLabel::Vac) {
        // One side announces the vacuum class: every pair is retained and
        // its bit is uniformly random.
        n = all;
        m0 = 0.5 * all;
      } else {
        const auto amp = detail::round_amplitude(sa.k, sb.k, ctx.eta_a,
                                                 ctx.eta_b, ctx.p_d);
        XPairBrackets br;
        bool hit = false;
        for (int c = 0; c < n_cached; ++c) {
          if (cache[c].omega == amp.omega && cache[c].y == amp.y) {
            br = cache[c].br;
            hit = true;
            break;
          }
        }
        if (!hit) {
          br = x_pair_brackets(amp.omega, amp.y, amp.one_minus_y, cfg.delta);
          cache[n_cached++] = {amp.omega, amp.y, br};
        }
        n = ctx.count_scale * sift * prob * br.keep;
        m0 = ctx.count_scale * sift * prob * br.error;
      }
      if (n_ret) n_ret->at(la, lb) = n;
      if (m_ret) m_ret->at(la, lb) = (1.0 - e_d) * m0 + e_d * (n - m0);
    }
  }
}

void fill_slots(const ProtocolConfig& cfg, ClassGrid* slot_z,
                ClassGrid* slot_x) {
  const double half_n = 0.5 * cfg.total_rounds;
  const double sift = 2.0 * cfg.delta / std::numbers::pi;
  for (SumLabel la : kSumLabels) {
    const ZSide za = z_side(la, cfg.intensities_a);
    const XSide xa = x_side(la, cfg.intensities_a);
    for (SumLabel lb : kSumLabels) {
      const ZSide zb = z_side(lb, cfg.intensities_b);
      const XSide xb = x_side(lb, cfg.intensities_b);
      if (slot_z)
        slot_z->at(la, lb) = half_n * (za.n_splits * za.split_prob) *
                             (zb.n_splits * zb.split_prob);
      if (slot_x) {
        const bool sifted = la != SumLabel::Vac && lb != SumLabel::Vac;
        slot_x->at(la, lb) =
            half_n * xa.prob * xb.prob * (sifted ? sift : 1.0);
      }
    }
  }
}

}  // namespace

XPairBrackets x_pair_brackets(double omega, double y, double one_minus_y,
                              double delta_max) {
  // Integrand shared by both brackets; q(theta) = y (expm1(w cos) + (1-y)).
  const auto inner = [&](double delta) {
    auto f = [&](double theta) -> std::array<double, 2> {
      const double c1 = omega * std::cos(theta);
      const double c2 = omega * std::cos(theta + delta);
      const double e1p = std::expm1(c1), e1m = std::expm1(-c1);
      const double e2p = std::expm1(c2), e2m = std::expm1(-c2);
      const double ql_i = y * (e1p + one_minus_y);
      const double qr_i = y * (e1m + one_minus_y);
      const double ql_j = y * (e2p + one_minus_y);
      const double qr_j = y * (e2m + one_minus_y);
      return {(ql_i + qr_i) * (ql_j + qr_j), ql_i * qr_j + qr_i * ql_j};
    };
    return periodic_mean<2>(f, kTwoPi, 1e-13, 1e-10);
  };
  const auto integral =
      adaptive_simpson<2>(inner, -delta_max, delta_max, 1e-12, 1e-9);
  const double norm = 1.0 / (2.0 * delta_max);
  return XPairBrackets{integral[0] * norm, integral[1] * norm};
}

ClassGrid expected_z_counts(const ProtocolConfig& cfg) {
  ClassGrid n;
  const StatContext ctx = make_context(cfg);
  fill_z(cfg, ctx, &n, nullptr);
  return n;
}

ClassGrid expected_z_errors(const ProtocolConfig& cfg) {
  ClassGrid m;
  const StatContext ctx = make_context(cfg);
  fill_z(cfg, ctx, nullptr, &m);
  return m;
}

std::pair<ClassGrid, ClassGrid> expected_x_counts(const ProtocolConfig& cfg) {
  ClassGrid all, ret;
  const StatContext ctx = make_context(cfg);
  fill_x(cfg, ctx, &all, &ret, nullptr);
  return {all, ret};
}

ClassGrid expected_x_errors(const ProtocolConfig& cfg) {
  ClassGrid m;
  const StatContext ctx = make_context(cfg);
  fill_x(cfg, ctx, nullptr, nullptr, &m);
  return m;
}

std::pair<ClassGrid, ClassGrid> slot_counts(const ProtocolConfig& cfg) {
  cfg.validate();
  ClassGrid sz, sx;
  fill_slots(cfg, &sz, &sx);
  return {sz, sx};
}

ExpectedCounts sixstate_split(const ExpectedCounts& counts) {
  if (counts.variant != Variant::SixState)
    throw std::invalid_argument(
        "sixstate_split requires a six-state configuration");
  ExpectedCounts out = counts;
  out.m_x_bar = counts.m_x.scaled(0.5);
  out.m_y_bar = counts.m_x.scaled(0.5);
  out.slot_x_bar = counts.slot_x.scaled(0.5);
  return out;
}

ExpectedCounts gather_expected_counts(const ProtocolConfig& cfg) {
  ExpectedCounts out;
  out.variant = cfg.variant;
  const StatContext ctx = make_context(cfg);
  fill_z(cfg, ctx, &out.n_z, &out.m_z);
  fill_x(cfg, ctx, &out.n_x_all, &out.n_x, &out.m_x);
  fill_slots(cfg, &out.slot_z, &out.slot_x);
  if (cfg.variant == Variant::SixState) out = sixstate_split(out);
  return out;
}

}  // namespace mpqkd
