#include "cbp/derivatives.hpp"

#include <cmath>

namespace cbp {

namespace {

double checked_eval(const ContrastProblem& problem, const Vector& x) {
  const double v = problem.value(x);
  if (!std::isfinite(v)) throw Error("finite differences: non-finite contrast at a stencil point");
  return v;
}

double step_for(double x, const FdOptions& o) { return std::max(o.rel * std::abs(x), o.floor); }

}  // namespace

Vector finite_difference_gradient(const ContrastProblem& problem, const Vector& at,
                                  const FdOptions& opts) {
  const int p = static_cast<int>(at.size());
  Vector g(p);
  Vector x = at;
  for (int i = 0; i < p; ++i) {
    const double h = step_for(at[i], opts);
    x[i] = at[i] + h;
    const double fp = checked_eval(problem, x);
    x[i] = at[i] - h;
    const double fm = checked_eval(problem, x);
    x[i] = at[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Matrix finite_difference_hessian(const ContrastProblem& problem, const Vector& at,
                                 const FdOptions& opts) {
  const int p = static_cast<int>(at.size());
  Matrix hmat(p, p);
  const double f0 = checked_eval(problem, at);
  Vector x = at;
  for (int i = 0; i < p; ++i) {
    const double hi = step_for(at[i], opts);
    x[i] = at[i] + hi;
    const double fp = checked_eval(problem, x);
    x[i] = at[i] - hi;
    const double fm = checked_eval(problem, x);
    x[i] = at[i];
    hmat(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
    for (int j = i + 1; j < p; ++j) {
      const double hj = step_for(at[j], opts);
      x[i] = at[i] + hi; x[j] = at[j] + hj;
      const double fpp = checked_eval(problem, x);
      x[j] = at[j] - hj;
      const double fpm = checked_eval(problem, x);
      x[i] = at[i] - hi; x[j] = at[j] + hj;
      const double fmp = checked_eval(problem, x);
      x[j] = at[j] - hj;
      const double fmm = checked_eval(problem, x);
      x[i] = at[i]; x[j] = at[j];
      const double v = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
      hmat(i, j) = v;
      hmat(j, i) = v;
    }
  }
  return 0.5 * (hmat + hmat.transpose());
}

Vector gradient_of(const ContrastProblem& problem, const Vector& at, const FdOptions& opts) {
  if (problem.gradient) return problem.gradient(at);
  return finite_difference_gradient(problem, at, opts);
}

Matrix hessian_of(const ContrastProblem& problem, const Vector& at, const FdOptions& opts) {
  if (problem.hessian) return problem.hessian(at);
  return finite_difference_hessian(problem, at, opts);
}

}  // namespace cbp
