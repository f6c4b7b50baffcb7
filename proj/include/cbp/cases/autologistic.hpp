#pragma once

#include "cbp/grid.hpp"
#include "cbp/moments.hpp"
#include "cbp/optimize.hpp"
#include "cbp/sandwich.hpp"
#include "cbp/sim/gibbs.hpp"
#include "cbp/types.hpp"

#include <cstdint>

namespace cbp::autolog {

/// Field effect and nearest-neighbor interaction of the two-state model.
struct AutologisticParams {
  double theta1 = 0.0;
  double theta2 = 0.0;

  Vector as_vector() const { return Vector{{theta1, theta2}}; }
  static AutologisticParams from(const Vector& v) { return {v[0], v[1]}; }
};

/// P(X = x | neighbor sum s) under the logistic conditional.
double conditional_prob(int x, int neighbor_sum, const AutologisticParams& params);

/// Negative mean conditional log-likelihood over interior sites
/// (sites with all four neighbors present); m = (n-2)^2.
double pseudolik_contrast(const sim::LatticeField& field, const AutologisticParams& params);

/// Score contribution of one interior site: (x - p)(1, s)'.
Vector score_vector(const sim::LatticeField& field, const AutologisticParams& params, int i,
                    int j);

Vector pseudolik_gradient(const sim::LatticeField& field, const AutologisticParams& params);
Matrix pseudolik_hessian(const sim::LatticeField& field, const AutologisticParams& params);

/// Contrast problem with t = (n-2)^2, analytic score and Hessian, and
/// resimulation through fresh Gibbs chains.
ContrastProblem make_problem(const sim::LatticeField& field,
                             int resim_sweeps = sim::kDefaultGibbsSweeps);

struct FitConfig {
  ParamBox box = ParamBox({-1.5, -1.5}, {1.5, 1.5});
  int posterior_nodes = 101;  // per axis
  int mc_reps = 1000;
  int resim_sweeps = sim::kDefaultGibbsSweeps;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  MapOptions map = {};
};

struct FitReport {
  MapEstimate map;
  PosteriorGrid posterior;
  Matrix gamma_mc;            // m * var of resimulated gradients
  Matrix info_mc;             // mean of resimulated Hessians
  Matrix info_posterior;      // Omega^{-1} / m from the posterior fit
  Matrix limit_covariance;    // I^{-1} Gamma I^{-1} / m
  ConfidenceRegion region95;  // intervals + ellipse at level 0.95
};

FitReport run_markov_fit(const sim::LatticeField& field, const Prior& prior,
                         const FitConfig& config);

}  // namespace cbp::autolog
