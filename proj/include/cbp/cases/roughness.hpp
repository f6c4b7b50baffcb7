#pragma once

#include "cbp/grid.hpp"
#include "cbp/moments.hpp"
#include "cbp/optimize.hpp"
#include "cbp/sandwich.hpp"
#include "cbp/sim/cylinders.hpp"
#include "cbp/types.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cbp::rough {

/// First two pooled height moments of a transect sample.
struct MomentPair {
  double m1 = 0.0;    // mean height, mm
  double m2 = 0.0;    // mean squared height, mm^2
  double nu_a = 0.0;  // total sampled length, mm
};

/// Intensity scale alpha (mm^-3) and radius decay rate beta (mm^-1).
struct RoughnessParams {
  double alpha = 0.0;
  double beta = 0.0;

  Vector as_vector() const { return Vector{{alpha, beta}}; }
  static RoughnessParams from(const Vector& v) { return {v[0], v[1]}; }
};

struct RawTransects {
  std::vector<std::vector<double>> heights;
  double spacing = 0.0;
};

/// Read a transect manifest (JSON listing height files and the sampling
/// step) and the height files it names.
RawTransects load_transects(const std::string& manifest_path);

/// Remove the long-scale trend with a Nadaraya-Watson Gaussian smoother;
/// the mean level is preserved.
std::vector<double> detrend_kernel(const std::vector<double>& heights, double spacing,
                                   double bandwidth = 100.0);

sim::SurfaceSample make_sample(std::vector<std::vector<double>> transects, double spacing);

MomentPair sample_moments(const sim::SurfaceSample& sample);

/// Expected value of the moment pair under the cylinder model.
std::pair<double, double> expected_moments(const RoughnessParams& params);

/// Dimensionless overlap constant entering the variance of the second
/// moment. Computed once by two independent quadrature schemes that must
/// agree to 1e-4 relative; cached process-wide. The environment variable
/// CBP_KAPPA_OVERRIDE bypasses the computation (fault-injection hook for
/// the validation suite only).
double kappa_constant();

/// Limit matrix V of nu(A) var(moment pair).
Matrix asymptotic_variance_V(const RoughnessParams& params);

/// Weighted least squares contrast (V evaluated at the running parameter).
double wls_contrast(const MomentPair& moments, const RoughnessParams& params);

/// J' V^{-1} J with J the Jacobian of the expected moments; for this
/// contrast the gradient-variance and Hessian limits coincide with it.
Matrix info_matrix_moments(const RoughnessParams& params);

/// Closed-form Jacobian of expected_moments, column j = d E / d theta_j.
Matrix expected_moments_jacobian(const RoughnessParams& params);

/// Contrast problem with t = nu(A). Supplying a resimulation design enables
/// the Monte-Carlo gradient-variance route.
struct ResimDesign {
  sim::Rect window;
  sim::TransectDesign design;
};
ContrastProblem make_problem(const MomentPair& moments);
ContrastProblem make_problem(const MomentPair& moments, const ResimDesign& resim);

struct FitConfig {
  ParamBox box = ParamBox({1.0, 1.0}, {100.0, 5.0});
  int posterior_nodes = 101;  // per axis, both passes
  std::uint64_t seed = 0;
  unsigned threads = 0;
  MapOptions map = {};
};

struct FitReport {
  MapEstimate map;
  PosteriorGrid posterior;  // refined around the MAP
  ParamBox refined_box;
  MomentPair moments;
  Matrix info_moments;  // J' V^{-1} J at the MAP
  // 95% intervals: directly from posterior marginal quantiles, and from the
  // Gaussian N(map, I^{-1}/nu) for cross-checking.
  std::pair<double, double> ci_alpha_posterior, ci_beta_posterior;
  std::pair<double, double> ci_alpha_gauss, ci_beta_gauss;
};

FitReport run_roughness_fit(const MomentPair& moments, const Prior& prior,
                            const FitConfig& config);
FitReport run_roughness_fit(const sim::SurfaceSample& sample, const Prior& prior,
                            const FitConfig& config);

}  // namespace cbp::rough
