#include "cbp/sim/grf.hpp"

#include "cbp/rng.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace cbp::sim {

GrfSampler::GrfSampler(int n, double theta, double spacing)
    : n_(n), theta_(theta), spacing_(spacing) {
  if (n < 1) throw Error("GrfSampler: n must be >= 1");
  if (static_cast<long>(n) * n > 10000)
    throw Error("GrfSampler: n^2 exceeds the dense-Cholesky bound of 1e4 nodes");
  if (!(theta > 0.0)) throw Error("GrfSampler: theta must be positive");
  if (!(spacing > 0.0)) throw Error("GrfSampler: spacing must be positive");

  const int m = n * n;
  Matrix cov(m, m);
  for (int a = 0; a < m; ++a) {
    const int ai = a / n, aj = a % n;
    for (int b = 0; b <= a; ++b) {
      const int bi = b / n, bj = b % n;
      const double dx = spacing * (ai - bi);
      const double dy = spacing * (aj - bj);
      const double c = std::exp(-theta * std::sqrt(dx * dx + dy * dy));
      cov(a, b) = c;
      cov(b, a) = c;
    }
  }
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    // one jitter retry, then give up
    cov.diagonal().array() += 1e-10;
    llt.compute(cov);
    if (llt.info() != Eigen::Success)
      throw Error("GrfSampler: Cholesky factorization failed even with jitter");
  }
  chol_ = std::make_shared<const Matrix>(llt.matrixL());
}

LatticeField GrfSampler::draw(std::uint64_t seed) const {
  const int m = n_ * n_;
  NormalSampler normal(seed);
  Vector z(m);
  for (int i = 0; i < m; ++i) z[i] = normal();
  const Vector x = chol_->triangularView<Eigen::Lower>() * z;
  LatticeField field;
  field.n = n_;
  field.spacing = spacing_;
  field.values.assign(x.data(), x.data() + m);
  return field;
}

LatticeField simulate_grf_exponential(int n, double theta, std::uint64_t seed, double spacing) {
  return GrfSampler(n, theta, spacing).draw(seed);
}

}  // namespace cbp::sim
