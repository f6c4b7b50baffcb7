#pragma once

#include "cbp/types.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace cbp::sim {

/// Square lattice of real (or 0/1) values with constant node spacing.
struct LatticeField {
  int n = 0;
  std::vector<double> values;  // row-major, n*n
  double spacing = 1.0;

  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n + j]; }
  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * n + j]; }
};

/// Reusable exact sampler for the centered unit-variance Gaussian field with
/// covariance exp(-theta h). Holds the Cholesky factor of the n^2 x n^2
/// covariance so repeated draws at the same theta cost one triangular
/// product each.
class GrfSampler {
 public:
  GrfSampler(int n, double theta, double spacing = 1.0);

  LatticeField draw(std::uint64_t seed) const;

  int n() const { return n_; }
  double theta() const { return theta_; }

 private:
  int n_;
  double theta_;
  double spacing_;
  std::shared_ptr<const Matrix> chol_;  // lower factor
};

/// Exact simulation by dense Cholesky; n^2 is capped at 1e4.
LatticeField simulate_grf_exponential(int n, double theta, std::uint64_t seed,
                                      double spacing = 1.0);

}  // namespace cbp::sim
