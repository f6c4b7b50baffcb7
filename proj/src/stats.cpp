#include "cbp/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <Eigen/Eigenvalues>

namespace cbp {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error("normal_quantile: p must lie in (0,1)");
  static const boost::math::normal_distribution<double> dist;
  return boost::math::quantile(dist, p);
}

double normal_cdf(double x) {
  static const boost::math::normal_distribution<double> dist;
  return boost::math::cdf(dist, x);
}

double chi_square_quantile(int df, double p) {
  if (df < 1) throw Error("chi_square_quantile: df must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw Error("chi_square_quantile: p must lie in (0,1)");
  const boost::math::chi_squared_distribution<double> dist(df);
  return boost::math::quantile(dist, p);
}

Vector sample_mean(const std::vector<Vector>& rows) {
  if (rows.empty()) throw Error("sample_mean: empty sample");
  Vector m = Vector::Zero(rows.front().size());
  for (const auto& r : rows) m += r;
  return m / static_cast<double>(rows.size());
}

Matrix sample_covariance(const std::vector<Vector>& rows) {
  if (rows.size() < 2) throw Error("sample_covariance: need at least 2 observations");
  const Vector m = sample_mean(rows);
  const int p = static_cast<int>(m.size());
  Matrix c = Matrix::Zero(p, p);
  for (const auto& r : rows) {
    const Vector d = r - m;
    c += d * d.transpose();
  }
  return c / static_cast<double>(rows.size() - 1);
}

Matrix sample_mean(const std::vector<Matrix>& mats) {
  if (mats.empty()) throw Error("sample_mean: empty sample");
  Matrix m = Matrix::Zero(mats.front().rows(), mats.front().cols());
  for (const auto& a : mats) m += a;
  return m / static_cast<double>(mats.size());
}

Matrix symmetrize_validate_psd(const Matrix& a, double tol_scale, const char* context) {
  Matrix s = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
  if (eig.info() != Eigen::Success)
    throw Error(std::string(context) + ": eigenvalue computation failed");
  const double tr = s.trace();
  const double floor = -tol_scale * std::abs(tr);
  if (eig.eigenvalues().minCoeff() < floor)
    throw Error(std::string(context) + ": not positive semi-definite");
  return s;
}

}  // namespace cbp
