#pragma once

#include "cbp/grid.hpp"
#include "cbp/optimize.hpp"
#include "cbp/types.hpp"

#include <optional>

namespace cbp {

struct PosteriorMoments {
  Vector mean;
  Matrix covariance;  // Omega: moment-matched normal covariance
};

/// Mean and covariance of the tabulated posterior by trapezoid quadrature.
/// Throws "degenerate posterior" if the covariance is not positive definite.
PosteriorMoments posterior_moments(const PosteriorGrid& grid);

struct PosteriorInfoEstimate {
  Matrix from_moments;                    // Omega^{-1} / t
  std::optional<double> from_mode_height; // 2 pi p(mode)^2 / t, p = 1 only
};

/// Estimate the limit Hessian of the contrast from the posterior shape.
/// The map estimate supplies the exact density height at the mode.
PosteriorInfoEstimate info_from_posterior(const PosteriorGrid& grid, const MapEstimate& map,
                                          double t);

}  // namespace cbp
