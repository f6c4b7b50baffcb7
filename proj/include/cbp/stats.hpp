#pragma once

#include "cbp/types.hpp"

#include <cmath>
#include <vector>

namespace cbp {

/// Standard normal quantile, Phi^{-1}(p).
double normal_quantile(double p);

/// Chi-square quantile with `df` degrees of freedom.
double chi_square_quantile(int df, double p);

double normal_cdf(double x);

inline double sample_mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double sample_variance(const std::vector<double>& x) {
  const double m = sample_mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

/// Unbiased sample covariance matrix of row vectors.
Matrix sample_covariance(const std::vector<Vector>& rows);

Vector sample_mean(const std::vector<Vector>& rows);

Matrix sample_mean(const std::vector<Matrix>& mats);

/// Symmetrize then check eigenvalues; throws `Error` if any eigenvalue
/// falls below -tol_scale * trace.
Matrix symmetrize_validate_psd(const Matrix& a, double tol_scale = 1e-8,
                               const char* context = "matrix");

}  // namespace cbp
