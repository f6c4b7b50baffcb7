#pragma once

#include "cbp/grid.hpp"
#include "cbp/moments.hpp"
#include "cbp/optimize.hpp"
#include "cbp/sandwich.hpp"
#include "cbp/sim/grf.hpp"
#include "cbp/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cbp::vario {

/// Semivariogram estimates at the distinct lattice distances.
struct EmpiricalVariogram {
  std::vector<double> lags;       // strictly increasing distances
  std::vector<double> gamma_hat;  // estimates at each lag
  std::vector<long> counts;       // pair counts
};

/// Every distinct inter-node distance strictly below the half diagonal of an
/// n x n grid, deduplicated through integer squared distances.
std::vector<double> lag_classes(int n, double spacing = 1.0);

/// gamma_hat(h) = (1 / 2 n_h) sum over pairs at distance h of (X_i - X_j)^2,
/// by exact pair enumeration.
EmpiricalVariogram sample_variogram(const sim::LatticeField& field,
                                    const std::vector<double>& lags);

/// Least-squares contrast between the sample variogram and 1 - exp(-a h).
double ls_contrast(const EmpiricalVariogram& vario, double alpha);
double ls_contrast_gradient(const EmpiricalVariogram& vario, double alpha);
double ls_contrast_hessian(const EmpiricalVariogram& vario, double alpha);

/// Contrast problem for a simulated or loaded field: t = n^2, analytic
/// derivatives, resimulation by fresh fields at the requested parameter
/// (the Cholesky factor is cached per parameter value).
ContrastProblem make_problem(const sim::LatticeField& field);

struct FitConfig {
  ParamBox box = ParamBox({0.0}, {4.0});
  int posterior_nodes = 401;
  int mc_reps = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  MapOptions map = {};
};

struct FitReport {
  MapEstimate map;
  PosteriorGrid posterior;
  double gamma_mc = 0.0;       // MC estimate of the gradient limit variance
  double info_mc = 0.0;        // MC estimate of the limit Hessian
  double info_posterior = 0.0; // mode-height estimate 2 pi p(mode)^2 / t
  double info_posterior_moments = 0.0;  // Omega^{-1} / t
  double limit_var_mc = 0.0;        // Gamma / (t I_mc^2)
  double limit_var_posterior = 0.0; // Gamma / (t I_post^2)
  std::pair<double, double> ci_mc;        // 95% interval, MC info route
  std::pair<double, double> ci_posterior; // 95% interval, posterior info route
};

FitReport run_variogram_fit(const sim::LatticeField& field, const Prior& prior,
                            const FitConfig& config);

struct CoverageRecord {
  std::uint64_t seed = 0;
  double map = 0.0;
  double gamma = 0.0;
  double info_mc = 0.0;
  double info_posterior = 0.0;
  double ci_lo_mc = 0.0, ci_hi_mc = 0.0;
  double ci_lo_post = 0.0, ci_hi_post = 0.0;
  bool covered_mc = false;
  bool covered_post = false;
  bool failed = false;
  std::string error;
};

struct CoverageResult {
  double rate_mc = 0.0;
  double rate_posterior = 0.0;
  double binomial_se_mc = 0.0;
  double binomial_se_posterior = 0.0;
  int completed = 0;
  int failures = 0;
  std::vector<CoverageRecord> records;
};

/// Repeatedly simulate at theta_true, fit, and record whether the 95%
/// interval covers the truth, for both information-estimate variants.
CoverageResult coverage_experiment(double theta_true, int n, int outer_reps, int gamma_reps,
                                   std::uint64_t master_seed, unsigned threads = 0);

}  // namespace cbp::vario
