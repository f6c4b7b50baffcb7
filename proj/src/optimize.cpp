#include "cbp/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace cbp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Objective = std::function<double(const Vector&)>;

// Brent minimization on [a, b] starting from an interior point x0 with
// f(x0) = f0. Combines golden-section with successive parabolic
// interpolation, so exactly quadratic objectives converge to rounding level.
std::pair<double, double> brent_minimize(const Objective& f, double a, double b, double x0,
                                         double f0, double tol, int max_iter) {
  const double gold = 0.3819660112501051;
  double x = x0, w = x0, v = x0;
  double fx = f0, fw = f0, fv = f0;
  double d = 0.0, e = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    const double xm = 0.5 * (a + b);
    const double tol1 = tol * std::abs(x) + 1e-12 * std::max(1.0, std::abs(x)) + tol;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) break;
    bool take_golden = true;
    if (std::abs(e) > tol1) {
      // Parabola through (v, fv), (w, fw), (x, fx).
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_old = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_old) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (xm > x) ? tol1 : -tol1;
        take_golden = false;
      }
    }
    if (take_golden) {
      e = (x >= xm) ? a - x : b - x;
      d = gold * e;
    }
    const double u = (std::abs(d) >= tol1) ? x + d : x + (d > 0 ? tol1 : -tol1);
    const double fu = f(Vector::Constant(1, u));
    if (fu <= fx) {
      if (u >= x)
        a = x;
      else
        b = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x)
        a = u;
      else
        b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {x, fx};
}

// Nelder-Mead with standard coefficients; +inf objectives (outside the box)
// are rejected by the ordering.
std::pair<Vector, double> nelder_mead(const Objective& f, const Vector& start, double scale_hint,
                                      const ParamBox& box, double tol, int max_iter) {
  const int p = static_cast<int>(start.size());
  std::vector<Vector> pts;
  std::vector<double> vals;
  pts.push_back(start);
  vals.push_back(f(start));
  for (int d = 0; d < p; ++d) {
    Vector q = start;
    double h = scale_hint;
    if (q[d] + h > box.upper[d]) h = -h;
    q[d] += h;
    q = box.clamp_interior(q);
    pts.push_back(q);
    vals.push_back(f(q));
  }
  auto order = [&] {
    std::vector<int> idx(p + 1);
    for (int i = 0; i <= p; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int i, int j) { return vals[i] < vals[j]; });
    std::vector<Vector> np(p + 1);
    std::vector<double> nv(p + 1);
    for (int i = 0; i <= p; ++i) {
      np[i] = pts[idx[i]];
      nv[i] = vals[idx[i]];
    }
    pts = std::move(np);
    vals = std::move(nv);
  };
  order();
  for (int iter = 0; iter < max_iter; ++iter) {
    double diam = 0.0;
    for (int i = 1; i <= p; ++i) diam = std::max(diam, (pts[i] - pts[0]).cwiseAbs().maxCoeff());
    if (diam < tol) break;
    Vector centroid = Vector::Zero(p);
    for (int i = 0; i < p; ++i) centroid += pts[i];
    centroid /= p;
    auto eval = [&](double coef) {
      Vector q = centroid + coef * (centroid - pts[p]);
      const double fq = box.contains(q) ? f(q) : kInf;
      return std::make_pair(q, fq);
    };
    auto [xr, fr] = eval(1.0);  // reflection
    if (fr < vals[0]) {
      auto [xe, fe] = eval(2.0);  // expansion
      if (fe < fr) {
        pts[p] = xe; vals[p] = fe;
      } else {
        pts[p] = xr; vals[p] = fr;
      }
    } else if (fr < vals[p - 1]) {
      pts[p] = xr; vals[p] = fr;
    } else {
      auto [xc, fc] = eval(fr < vals[p] ? 0.5 : -0.5);  // contraction
      if (fc < std::min(fr, vals[p])) {
        pts[p] = xc; vals[p] = fc;
      } else {  // shrink toward the best vertex
        for (int i = 1; i <= p; ++i) {
          pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
          vals[i] = f(pts[i]);
        }
      }
    }
    order();
  }
  return {pts[0], vals[0]};
}

MapEstimate search(const Objective& f, const ParamBox& box, const MapOptions& opts) {
  const int p = box.dim();
  const int nodes = std::max(3, opts.grid_nodes);

  // Coarse scan.
  std::vector<int> idx(p, 0);
  Vector best = Vector::Zero(p);
  double fbest = kInf;
  bool done = false;
  Vector x(p);
  while (!done) {
    for (int d = 0; d < p; ++d)
      x[d] = box.lower[d] + (box.upper[d] - box.lower[d]) * idx[d] / (nodes - 1);
    const double v = f(x);
    if (std::isnan(v)) throw Error("map search: objective returned NaN");
    if (v < fbest) {
      fbest = v;
      best = x;
    }
    done = true;
    for (int d = p - 1; d >= 0; --d) {
      if (++idx[d] < nodes) {
        done = false;
        break;
      }
      idx[d] = 0;
    }
  }
  if (std::isinf(fbest))
    throw Error("map search: objective is +inf at every grid node");

  MapEstimate out;
  if (p == 1) {
    const double step = (box.upper[0] - box.lower[0]) / (nodes - 1);
    const double a = std::max(box.lower[0], best[0] - step);
    const double b = std::min(box.upper[0], best[0] + step);
    auto [xmin, fmin] = brent_minimize(f, a, b, best[0], fbest, opts.coord_tol, opts.max_iter);
    out.point = Vector::Constant(1, xmin);
    out.objective = fmin;
  } else {
    double step = 0.0;
    for (int d = 0; d < p; ++d) step = std::max(step, (box.upper[d] - box.lower[d]) / (nodes - 1));
    if (!std::isfinite(f(best))) throw Error("map search: non-finite objective at refinement start");
    auto [xmin, fmin] = nelder_mead(f, best, step, box, opts.coord_tol, opts.max_iter);
    out.point = xmin;
    out.objective = fmin;
  }
  out.refined = true;
  if (out.objective > fbest) {  // keep the scan winner if refinement drifted
    out.point = best;
    out.objective = fbest;
    out.refined = false;
  }
  for (int d = 0; d < p; ++d) {
    const double margin = 2.0 * opts.coord_tol * std::max(1.0, std::abs(out.point[d]));
    if (out.point[d] - box.lower[d] <= margin || box.upper[d] - out.point[d] <= margin)
      out.boundary_warning = true;
  }
  const Vector clamped = box.clamp_interior(out.point);
  if ((clamped - out.point).cwiseAbs().maxCoeff() > 0.0) {
    out.point = clamped;
    out.objective = f(out.point);
  }
  return out;
}

}  // namespace

MapEstimate map_estimate(const ContrastProblem& problem, const Prior& prior, const ParamBox& box,
                         const MapOptions& opts) {
  for (int d = 0; d < box.dim(); ++d)
    if (box.lower[d] < prior.support.lower[d] || box.upper[d] > prior.support.upper[d])
      throw Error("map_estimate: box extends outside the prior support");
  const double inv_t = 1.0 / problem.t;
  auto f = [&](const Vector& x) {
    const double u = problem.value(x);
    if (std::isinf(u) && u > 0) return kInf;
    return u - inv_t * prior.log_density(x);
  };
  return search(f, box, opts);
}

MapEstimate minimize_contrast(const ContrastProblem& problem, const ParamBox& box,
                              const MapOptions& opts) {
  auto f = [&](const Vector& x) { return problem.value(x); };
  return search(f, box, opts);
}

}  // namespace cbp
