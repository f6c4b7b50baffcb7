#include "cbp/moments.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace cbp {

PosteriorMoments posterior_moments(const PosteriorGrid& grid) {
  const int p = grid.dim();
  Vector mean = Vector::Zero(p);
  for (std::size_t i = 0; i < grid.size(); ++i)
    mean += grid.node_weight(i) * grid.density(i) * grid.node(i);

  Matrix cov = Matrix::Zero(p, p);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vector d = grid.node(i) - mean;
    cov += grid.node_weight(i) * grid.density(i) * (d * d.transpose());
  }
  cov = 0.5 * (cov + cov.transpose());
  // degeneracy gauge: a variance far below one grid cell means the mass is
  // unresolved (grid too coarse or piled on the boundary)
  double floor = std::numeric_limits<double>::max();
  for (const auto& ax : grid.axes()) {
    const double span = ax.nodes.back() - ax.nodes.front();
    floor = std::min(floor, 1e-12 * span * span);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= floor)
    throw Error("posterior_moments: degenerate posterior (covariance not positive definite)");
  return {mean, cov};
}

PosteriorInfoEstimate info_from_posterior(const PosteriorGrid& grid, const MapEstimate& map,
                                          double t) {
  const PosteriorMoments m = posterior_moments(grid);
  Eigen::LDLT<Matrix> ldlt(m.covariance);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw Error("info_from_posterior: Omega is singular");
  Matrix inv = ldlt.solve(Matrix::Identity(grid.dim(), grid.dim()));

  PosteriorInfoEstimate out;
  out.from_moments = inv / t;
  if (grid.dim() == 1) {
    // log p(mode) = -t * (U - (1/t) log c) - log normalizing constant.
    const double log_mode = -t * map.objective - grid.log_norm_const();
    const double h = std::exp(log_mode);
    out.from_mode_height = 2.0 * M_PI * h * h / t;
  }
  return out;
}

}  // namespace cbp
