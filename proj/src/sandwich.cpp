#include "cbp/sandwich.hpp"

#include "cbp/parallel.hpp"
#include "cbp/rng.hpp"
#include "cbp/stats.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <sstream>

namespace cbp {

namespace {

void require_resimulate(const ContrastProblem& problem, const char* op) {
  if (!problem.resimulate)
    throw Error(std::string(op) + ": the contrast has no resimulation hook");
}

[[noreturn]] void rethrow_with_rep(const char* op, std::size_t rep) {
  try {
    throw;
  } catch (const std::exception& e) {
    std::ostringstream os;
    os << op << ": replication " << rep << " failed: " << e.what();
    throw Error(os.str());
  }
}

}  // namespace

Matrix mc_estimate_gamma(const ContrastProblem& problem, const Vector& at, int reps,
                         std::uint64_t master_seed, const McOptions& opts) {
  if (reps < 2) throw Error("mc_estimate_gamma: need at least 2 replications");
  require_resimulate(problem, "mc_estimate_gamma");
  std::vector<Vector> grads(reps);
  parallel_for(static_cast<std::size_t>(reps), opts.threads, [&](std::size_t r) {
    try {
      const ContrastProblem fresh = problem.resimulate(at, derive_seed(master_seed, r));
      grads[r] = gradient_of(fresh, at, opts.fd);
    } catch (...) {
      rethrow_with_rep("mc_estimate_gamma", r);
    }
  });
  return problem.t * sample_covariance(grads);
}

Matrix mc_estimate_info(const ContrastProblem& problem, const Vector& at, int reps,
                        std::uint64_t master_seed, const McOptions& opts) {
  if (reps < 2) throw Error("mc_estimate_info: need at least 2 replications");
  require_resimulate(problem, "mc_estimate_info");
  std::vector<Matrix> hessians(reps);
  parallel_for(static_cast<std::size_t>(reps), opts.threads, [&](std::size_t r) {
    try {
      const ContrastProblem fresh = problem.resimulate(at, derive_seed(master_seed, r));
      hessians[r] = hessian_of(fresh, at, opts.fd);
    } catch (...) {
      rethrow_with_rep("mc_estimate_info", r);
    }
  });
  return sample_mean(hessians);
}

LimitDistribution limit_distribution(const MapEstimate& map, const Matrix& info,
                                     const Matrix& gamma, double t) {
  const int p = static_cast<int>(info.rows());
  Eigen::FullPivLU<Matrix> lu(info);
  if (!lu.isInvertible()) throw Error("limit_distribution: info matrix is singular");
  const Matrix inv = lu.inverse();
  Matrix cov = inv * gamma * inv.transpose() / t;
  cov = symmetrize_validate_psd(cov, 1e-8, "limit_distribution covariance");
  (void)p;
  return {map.point, cov};
}

bool ConfidenceRegion::ellipse_contains(const Vector& x) const {
  Eigen::LDLT<Matrix> ldlt(shape);
  if (ldlt.info() != Eigen::Success) return false;
  const Vector d = x - center;
  return d.dot(ldlt.solve(d)) <= chi2_radius2;
}

ConfidenceRegion confidence_region(const LimitDistribution& dist, double level) {
  if (!(level > 0.0 && level < 1.0)) throw Error("confidence_region: level must lie in (0,1)");
  const int p = static_cast<int>(dist.mean.size());
  const double z = normal_quantile(0.5 * (1.0 + level));
  ConfidenceRegion out;
  out.level = level;
  out.center = dist.mean;
  out.shape = dist.covariance;
  out.chi2_radius2 = chi_square_quantile(p, level);
  out.intervals.reserve(p);
  for (int i = 0; i < p; ++i) {
    const double half = z * std::sqrt(std::max(0.0, dist.covariance(i, i)));
    out.intervals.emplace_back(dist.mean[i] - half, dist.mean[i] + half);
  }
  return out;
}

}  // namespace cbp
