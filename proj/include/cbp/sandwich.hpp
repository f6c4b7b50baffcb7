#pragma once

#include "cbp/derivatives.hpp"
#include "cbp/optimize.hpp"
#include "cbp/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace cbp {

struct McOptions {
  unsigned threads = 0;  // 0 = hardware concurrency
  FdOptions fd = {};
};

/// Monte-Carlo estimate of the limit variance of sqrt(t) grad U_t at `at`:
/// t times the sample variance matrix of the gradient over `reps` fresh
/// datasets resimulated at `at`. Deterministic given (master_seed, reps).
Matrix mc_estimate_gamma(const ContrastProblem& problem, const Vector& at, int reps,
                         std::uint64_t master_seed, const McOptions& opts = {});

/// Monte-Carlo estimate of the limit Hessian: the sample mean of the Hessian
/// over resimulated datasets.
Matrix mc_estimate_info(const ContrastProblem& problem, const Vector& at, int reps,
                        std::uint64_t master_seed, const McOptions& opts = {});

/// N(map.point, I^{-1} Gamma I^{-1} / t), covariance symmetrized and
/// validated.
LimitDistribution limit_distribution(const MapEstimate& map, const Matrix& info,
                                     const Matrix& gamma, double t);

struct ConfidenceRegion {
  double level = 0.0;
  std::vector<std::pair<double, double>> intervals;  // per-component
  Vector center;
  Matrix shape;          // covariance defining the ellipsoid metric
  double chi2_radius2 = 0.0;  // (x-c)' shape^{-1} (x-c) <= chi2_radius2

  bool ellipse_contains(const Vector& x) const;
};

/// Componentwise z-intervals plus the chi-square ellipsoid at `level`.
ConfidenceRegion confidence_region(const LimitDistribution& dist, double level);

}  // namespace cbp
