#pragma once

#include <array>
#include <utility>
#include <vector>

#include "mpqkd/keyrate.hpp"

namespace mpqkd {

// Search coordinates: (mu, nu, p_mu, p_nu, delta), symmetric sides.
using ParamVector = std::array<double, 5>;

struct OptimizationBox {
  double mu_min = 0.01;
  double mu_max = 1.0;
  double nu_min = 0.001;
  double nu_gap = 1e-3;        // keep nu <= mu * (1 - nu_gap)
  double prob_min = 1e-4;      // floor for p_mu, p_nu and the vacuum weight
  double delta_min = 0.002;
  double delta_max = 0.0;      // set by defaults() per variant
  std::vector<ParamVector> seeds;
  int max_evals = 3000;        // total objective evaluations per optimize()

  // Five spread-out feasible seeds and the variant's delta range.
  static OptimizationBox defaults(Variant variant);

  ParamVector project(ParamVector p) const;
  bool contains(const ParamVector& p) const;
  // Rejects seeds that are infeasible even before projection (nu >= mu or
  // probabilities outside the open box).
  void validate() const;
};

struct OptimizerResult {
  ParamVector best_params{};
  double best_rate = 0.0;
  std::vector<std::pair<ParamVector, double>> trace;  // every evaluation
};

// Multi-start Nelder-Mead over the box; candidate points are projected onto
// the box before evaluation. Deterministic for fixed seeds and budget.
// When every evaluation aborts the result carries rate 0 and zeroed params.
OptimizerResult optimize(double distance_km, const ProtocolConfig& base_cfg,
                         const SecurityBudget& budget, double f_ec,
                         const OptimizationBox& box);

// Ascending-distance sweep where each distance seeds the next with its
// optimum.
std::vector<OptimizerResult> warm_start_sweep(
    const std::vector<double>& distances_km, const ProtocolConfig& base_cfg,
    const SecurityBudget& budget, double f_ec, const OptimizationBox& box);

// base_cfg with symmetric arms of dist_km / 2 and the given parameters.
ProtocolConfig apply_params(const ProtocolConfig& base_cfg, double distance_km,
                            const ParamVector& params);

}  // namespace mpqkd
