#include "mpqkd/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mpqkd {

namespace {

constexpr double kPi = std::numbers::pi;

struct Objective {
  const ProtocolConfig& base;
  const SecurityBudget& budget;
  double f_ec;
  double distance_km;
  const OptimizationBox& box;
  std::vector<std::pair<ParamVector, double>>* trace;
  int evals = 0;

  double operator()(const ParamVector& raw) {
    const ParamVector p = box.project(raw);
    const ProtocolConfig cfg = apply_params(base, distance_km, p);
    const KeyRateResult r = compute_rate(cfg, budget, f_ec);
    const double rate = r.aborted ? 0.0 : r.key_rate;
    trace->emplace_back(p, rate);
    ++evals;
    return rate;
  }
};

struct SimplexPoint {
  ParamVector x;
  double rate;
};

// Nelder-Mead (maximizing), reflection 1, expansion 2, contraction 0.5,
// shrink 0.5. Order ties by insertion for determinism.
void nelder_mead(Objective& obj, const ParamVector& start, int eval_budget,
                 ParamVector* best_x, double* best_rate) {
  constexpr int kDim = 5;
  const OptimizationBox& box = obj.box;
  const std::array<double, kDim> width = {
      box.mu_max - box.mu_min, box.mu_max - box.nu_min, 1.0, 1.0,
      box.delta_max - box.delta_min};

  std::array<SimplexPoint, kDim + 1> s;
  s[0] = {box.project(start), 0.0};
  s[0].rate = obj(s[0].x);
  --eval_budget;
  for (int k = 0; k < kDim && eval_budget > 0; ++k) {
    ParamVector x = s[0].x;
    x[k] += 0.1 * width[k];
    s[k + 1] = {box.project(x), 0.0};
    s[k + 1].rate = obj(s[k + 1].x);
    --eval_budget;
  }

  auto order = [&]() {
    std::stable_sort(s.begin(), s.end(),
                     [](const SimplexPoint& a, const SimplexPoint& b) {
                       return a.rate > b.rate;
                     });
  };
  order();

  while (eval_budget > 0) {
    const double spread = s[0].rate - s[kDim].rate;
    if (spread <= 1e-4 * std::max(s[0].rate, 1e-300)) break;

    ParamVector centroid{};
    for (int k = 0; k < kDim; ++k) {
      double c = 0.0;
      for (int v = 0; v < kDim; ++v) c += s[v].x[k];
      centroid[k] = c / kDim;
    }
    auto blend = [&](double t) {
      ParamVector x;
      for (int k = 0; k < kDim; ++k)
        x[k] = centroid[k] + t * (centroid[k] - s[kDim].x[k]);
      return x;
    };

    const ParamVector xr = box.project(blend(1.0));
    const double fr = obj(xr);
    --eval_budget;
    if (fr > s[0].rate) {
      if (eval_budget <= 0) {
        if (fr > s[kDim].rate) s[kDim] = {xr, fr};
        order();
        break;
      }
      const ParamVector xe = box.project(blend(2.0));
      const double fe = obj(xe);
      --eval_budget;
      s[kDim] = fe > fr ? SimplexPoint{xe, fe} : SimplexPoint{xr, fr};
    } else if (fr > s[kDim - 1].rate) {
      s[kDim] = {xr, fr};
    } else {
      if (eval_budget <= 0) break;
      const ParamVector xc = box.project(blend(fr > s[kDim].rate ? 0.5 : -0.5));
      const double fc = obj(xc);
      --eval_budget;
      if (fc > std::max(fr, s[kDim].rate)) {
        s[kDim] = {xc, fc};
      } else {
        // shrink toward the incumbent
        for (int v = 1; v <= kDim && eval_budget > 0; ++v) {
          ParamVector x;
          for (int k = 0; k < kDim; ++k)
            x[k] = s[0].x[k] + 0.5 * (s[v].x[k] - s[0].x[k]);
          s[v].x = box.project(x);
          s[v].rate = obj(s[v].x);
          --eval_budget;
        }
      }
    }
    order();
  }
  if (s[0].rate > *best_rate) {
    *best_rate = s[0].rate;
    *best_x = s[0].x;
  }
}

}  // namespace

OptimizationBox OptimizationBox::defaults(Variant variant) {
  OptimizationBox box;
  // strictly inside the admissible open interval, so projected points always
  // validate
  box.delta_max =
      (variant == Variant::Original ? kPi / 2 : kPi / 4) * (1.0 - 1e-9);
  box.seeds = {
      ParamVector{0.43, 0.04, 0.25, 0.25, kPi / 14},
      ParamVector{0.20, 0.02, 0.10, 0.35, kPi / 16},
      ParamVector{0.60, 0.08, 0.40, 0.20, kPi / 10},
      ParamVector{0.10, 0.01, 0.05, 0.45, kPi / 20},
      ParamVector{0.30, 0.05, 0.20, 0.30, kPi / 8},
  };
  return box;
}

ParamVector OptimizationBox::project(ParamVector p) const {
  p[0] = std::clamp(p[0], mu_min, mu_max);
  p[1] = std::clamp(p[1], nu_min, p[0] * (1.0 - nu_gap));
  p[2] = std::clamp(p[2], prob_min, 1.0 - 2.0 * prob_min);
  p[3] = std::clamp(p[3], prob_min, 1.0 - 2.0 * prob_min);
  const double sum = p[2] + p[3];
  const double sum_max = 1.0 - prob_min;
  if (sum > sum_max) {
    p[2] *= sum_max / sum;
    p[3] *= sum_max / sum;
  }
  p[4] = std::clamp(p[4], delta_min, delta_max);
  return p;
}

bool OptimizationBox::contains(const ParamVector& p) const {
  return p[0] >= mu_min && p[0] <= mu_max && p[1] >= nu_min &&
         p[1] <= p[0] * (1.0 - nu_gap) && p[2] >= prob_min &&
         p[3] >= prob_min && p[2] + p[3] <= 1.0 - prob_min &&
         p[4] >= delta_min && p[4] <= delta_max;
}

void OptimizationBox::validate() const {
  if (!(mu_min > 0.0 && mu_min < mu_max && nu_min > 0.0 && nu_min < mu_max &&
        prob_min > 0.0 && delta_min > 0.0 && delta_min < delta_max))
    throw std::invalid_argument("optimization box bounds are inconsistent");
  if (seeds.empty()) throw std::invalid_argument("no optimization seeds");
  for (const ParamVector& s : seeds) {
    if (s[1] >= s[0])
      throw std::invalid_argument("seed has nu >= mu");
    if (!(s[2] > 0.0 && s[3] > 0.0 && s[2] + s[3] < 1.0))
      throw std::invalid_argument("seed probabilities are infeasible");
  }
  if (max_evals < static_cast<int>(seeds.size()) * 8)
    throw std::invalid_argument("evaluation budget too small");
}

ProtocolConfig apply_params(const ProtocolConfig& base_cfg, double distance_km,
                            const ParamVector& params) {
  ProtocolConfig cfg = base_cfg;
  cfg.channel.dist_a_km = distance_km / 2.0;
  cfg.channel.dist_b_km = distance_km / 2.0;
  IntensityProfile prof;
  prof.mu = params[0];
  prof.nu = params[1];
  prof.prob_mu = params[2];
  prof.prob_nu = params[3];
  prof.prob_vac = 1.0 - params[2] - params[3];
  cfg.intensities_a = prof;
  cfg.intensities_b = prof;
  cfg.delta = params[4];
  return cfg;
}

OptimizerResult optimize(double distance_km, const ProtocolConfig& base_cfg,
                         const SecurityBudget& budget, double f_ec,
                         const OptimizationBox& box) {
  box.validate();
  OptimizerResult result;
  Objective obj{base_cfg, budget, f_ec, distance_km, box, &result.trace};

  const int per_seed = box.max_evals / static_cast<int>(box.seeds.size());
  ParamVector best_x{};
  double best_rate = -1.0;
  for (const ParamVector& seed : box.seeds)
    nelder_mead(obj, seed, per_seed, &best_x, &best_rate);

  if (best_rate <= 0.0) {
    result.best_rate = 0.0;
    result.best_params = ParamVector{};  // sentinel: everything aborted
    return result;
  }
  result.best_rate = best_rate;
  result.best_params = best_x;
  return result;
}

std::vector<OptimizerResult> warm_start_sweep(
    const std::vector<double>& distances_km, const ProtocolConfig& base_cfg,
    const SecurityBudget& budget, double f_ec, const OptimizationBox& box) {
  for (std::size_t k = 1; k < distances_km.size(); ++k)
    if (!(distances_km[k] > distances_km[k - 1]))
      throw std::invalid_argument("distances must be strictly ascending");
  std::vector<OptimizerResult> results;
  results.reserve(distances_km.size());
  OptimizationBox local = box;
  for (double d : distances_km) {
    results.push_back(optimize(d, base_cfg, budget, f_ec, local));
    const OptimizerResult& r = results.back();
    if (r.best_rate > 0.0) {
      local = box;
      local.seeds.insert(local.seeds.begin(), r.best_params);
    }
  }
  return results;
}

}  // namespace mpqkd
