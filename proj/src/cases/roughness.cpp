#include "cbp/cases/roughness.hpp"

#include "cbp/stats.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/Cholesky>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

namespace cbp::rough {

namespace {

// --- quadrature helpers for the overlap constant ---------------------------

// Gauss-Legendre nodes/weights on [0, 1] by Newton iteration on P_n.
void gauss_legendre01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = 0.5 * (1.0 - x);
    nodes[n - 1 - i] = 0.5 * (1.0 + x);
    weights[i] = 0.5 * w;
    weights[n - 1 - i] = 0.5 * w;
  }
}

double lens_factor(double x) { return std::acos(x) - x * std::sqrt(1.0 - x * x); }

// Integrand after u = s^2, v = t^2 (bounded near the origin).
double kappa_integrand_st(double s, double t) {
  const double ss = s * s, tt = t * t;
  const double num = std::pow(s * t, 11.0);
  const double den = std::pow(ss + tt, 11.0);
  return 4.0 * lens_factor(ss) * lens_factor(tt) * num / den;
}

// Original-coordinate integrand; 1/rho singular at the origin but integrable.
double kappa_integrand_uv(double u, double v) {
  return lens_factor(u) * lens_factor(v) * std::pow(u * v, 5.0) / std::pow(u + v, 11.0);
}

double tensor_gauss(int n, double (*f)(double, double)) {
  std::vector<double> x, w;
  gauss_legendre01(n, x, w);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += w[j] * f(x[i], x[j]);
    total += w[i] * row;
  }
  return total;
}

double simpson2d(double (*f)(double, double), double x0, double x1, double y0, double y1) {
  const double xm = 0.5 * (x0 + x1), ym = 0.5 * (y0 + y1);
  const double s = f(x0, y0) + f(x0, y1) + f(x1, y0) + f(x1, y1) +
                   4.0 * (f(xm, y0) + f(xm, y1) + f(x0, ym) + f(x1, ym)) + 16.0 * f(xm, ym);
  return s * (x1 - x0) * (y1 - y0) / 36.0;
}

double adaptive2d(double (*f)(double, double), double x0, double x1, double y0, double y1,
                  double whole, double tol, int depth) {
  const double xm = 0.5 * (x0 + x1), ym = 0.5 * (y0 + y1);
  const double q1 = simpson2d(f, x0, xm, y0, ym);
  const double q2 = simpson2d(f, xm, x1, y0, ym);
  const double q3 = simpson2d(f, x0, xm, ym, y1);
  const double q4 = simpson2d(f, xm, x1, ym, y1);
  const double sum = q1 + q2 + q3 + q4;
  if (depth <= 0 || std::abs(sum - whole) <= 15.0 * tol) return sum + (sum - whole) / 15.0;
  const double t2 = tol / 2.0;
  return adaptive2d(f, x0, xm, y0, ym, q1, t2, depth - 1) +
         adaptive2d(f, xm, x1, y0, ym, q2, t2, depth - 1) +
         adaptive2d(f, x0, xm, ym, y1, q3, t2, depth - 1) +
         adaptive2d(f, xm, x1, ym, y1, q4, t2, depth - 1);
}

double compute_kappa() {
  // Scheme 1: tensor Gauss-Legendre on the substituted integrand. The
  // directional limit at the origin slows convergence to algebraic, so the
  // refinement check is against the 1e-4 contract, not machine precision.
  const double g1 = tensor_gauss(192, kappa_integrand_st);
  const double g2 = tensor_gauss(384, kappa_integrand_st);
  if (std::abs(g2 - g1) > 1e-5 * std::abs(g2))
    throw Error("kappa_constant: Gauss-Legendre scheme did not converge");

  // Scheme 2: adaptive subdivision in the original coordinates. The corner
  // [0,eps]^2 contributes O(eps) with a tiny constant, so it is cut off.
  const double eps = 1e-9;
  const double adaptive = adaptive2d(kappa_integrand_uv, eps, 1.0, eps, 1.0,
                                     simpson2d(kappa_integrand_uv, eps, 1.0, eps, 1.0), 2e-8, 48);

  if (std::abs(adaptive - g2) > 1e-4 * std::abs(g2))
    throw Error("kappa_constant: quadrature schemes disagree beyond 1e-4 relative");
  return g2;
}

// --- transect ingestion -----------------------------------------------------

std::vector<double> read_height_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("load_transects: cannot open " + path.string());
  std::vector<double> heights;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) {
        std::ostringstream os;
        os << "load_transects: non-numeric value '" << tok << "' at " << path.string() << ":"
           << lineno;
        throw Error(os.str());
      }
      heights.push_back(v);
    }
  }
  if (heights.size() < 10)
    throw Error("load_transects: fewer than 10 points in " + path.string());
  return heights;
}

}  // namespace

RawTransects load_transects(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error("load_transects: cannot open " + manifest_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(std::string("load_transects: bad manifest: ") + e.what());
  }
  if (!j.contains("spacing_mm") || !j.contains("files"))
    throw Error("load_transects: manifest needs 'spacing_mm' and 'files'");
  RawTransects out;
  out.spacing = j["spacing_mm"].get<double>();
  if (!(out.spacing > 0.0)) throw Error("load_transects: spacing must be positive");
  const auto dir = std::filesystem::path(manifest_path).parent_path();
  for (const auto& f : j["files"]) {
    const std::filesystem::path p = dir / f.get<std::string>();
    out.heights.push_back(read_height_file(p));
  }
  if (out.heights.empty()) throw Error("load_transects: manifest lists no files");
  return out;
}

std::vector<double> detrend_kernel(const std::vector<double>& heights, double spacing,
                                   double bandwidth) {
  if (!(bandwidth > spacing)) throw Error("detrend_kernel: bandwidth must exceed the spacing");
  const int n = static_cast<int>(heights.size());
  double mean = 0.0;
  for (double h : heights) {
    if (!std::isfinite(h)) throw Error("detrend_kernel: non-finite height");
    mean += h;
  }
  mean /= n;

  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    double num = 0.0, den = 0.0;
    for (int j = 0; j < n; ++j) {
      const double z = spacing * (i - j) / bandwidth;
      const double w = std::exp(-0.5 * z * z);
      num += w * heights[j];
      den += w;
    }
    out[i] = heights[i] - num / den + mean;
  }
  return out;
}

sim::SurfaceSample make_sample(std::vector<std::vector<double>> transects, double spacing) {
  sim::SurfaceSample s;
  s.spacing = spacing;
  s.transects = std::move(transects);
  for (const auto& t : s.transects) {
    if (t.size() < 2) throw Error("make_sample: transect with fewer than 2 points");
    s.nu_a += (static_cast<double>(t.size()) - 1.0) * spacing;
  }
  return s;
}

MomentPair sample_moments(const sim::SurfaceSample& sample) {
  if (sample.transects.empty()) throw Error("sample_moments: empty sample");
  double s1 = 0.0, s2 = 0.0;
  long count = 0;
  for (const auto& t : sample.transects) {
    for (double h : t) {
      if (!std::isfinite(h)) throw Error("sample_moments: non-finite height");
      s1 += h;
      s2 += h * h;
    }
    count += static_cast<long>(t.size());
  }
  if (count == 0) throw Error("sample_moments: no heights");
  MomentPair m;
  m.m1 = s1 / count;
  m.m2 = s2 / count;
  m.nu_a = sample.nu_a;
  if (m.m2 < m.m1 * m.m1 - 1e-9 * std::max(1.0, m.m1 * m.m1))
    throw Error("sample_moments: moment pair violates m2 >= m1^2");
  return m;
}

std::pair<double, double> expected_moments(const RoughnessParams& p) {
  if (p.alpha < 0.0 || !(p.beta > 0.0)) throw Error("expected_moments: invalid parameters");
  const double b4 = std::pow(p.beta, 4.0);
  const double e1 = 6.0 * M_PI * p.alpha / b4;
  const double e2 = 36.0 * M_PI * M_PI * p.alpha * p.alpha / (b4 * b4) +
                    24.0 * M_PI * p.alpha / (b4 * p.beta);
  return {e1, e2};
}

Matrix expected_moments_jacobian(const RoughnessParams& p) {
  const double a = p.alpha, b = p.beta;
  Matrix j(2, 2);
  j(0, 0) = 6.0 * M_PI / std::pow(b, 4.0);
  j(0, 1) = -24.0 * M_PI * a / std::pow(b, 5.0);
  j(1, 0) = 72.0 * M_PI * M_PI * a / std::pow(b, 8.0) + 24.0 * M_PI / std::pow(b, 5.0);
  j(1, 1) = -288.0 * M_PI * M_PI * a * a / std::pow(b, 9.0) -
            120.0 * M_PI * a / std::pow(b, 6.0);
  return j;
}

double kappa_constant() {
  static const double value = [] {
    if (const char* env = std::getenv("CBP_KAPPA_OVERRIDE")) {
      return std::strtod(env, nullptr);
    }
    return compute_kappa();
  }();
  return value;
}

Matrix asymptotic_variance_V(const RoughnessParams& p) {
  if (p.alpha < 0.0 || !(p.beta > 0.0)) throw Error("asymptotic_variance_V: invalid parameters");
  const double a = p.alpha, b = p.beta;
  const double kappa = kappa_constant();
  constexpr double f3 = 6.0, f5 = 120.0, f6 = 720.0, f7 = 5040.0, f10 = 3628800.0;
  Matrix v(2, 2);
  v(0, 0) = f5 * (16.0 / 3.0) * a / std::pow(b, 6.0);
  v(0, 1) = f6 * (16.0 / 3.0) * a / std::pow(b, 7.0) +
            f5 * 64.0 * M_PI * a * a / std::pow(b, 10.0);
  v(1, 0) = v(0, 1);
  v(1, 1) = f7 * (16.0 / 3.0) * a / std::pow(b, 8.0) +
            (f6 * 128.0 * M_PI + f10 * 32.0 * kappa) * a * a / std::pow(b, 11.0) +
            f3 * f5 * 128.0 * M_PI * M_PI * a * a * a / std::pow(b, 14.0);
  return v;
}

double wls_contrast(const MomentPair& moments, const RoughnessParams& params) {
  const Matrix v = asymptotic_variance_V(params);
  Eigen::LDLT<Matrix> ldlt(v);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw Error("wls_contrast: V is singular at this parameter");
  const auto [e1, e2] = expected_moments(params);
  const Vector d{{moments.m1 - e1, moments.m2 - e2}};
  return 0.5 * d.dot(ldlt.solve(d));
}

Matrix info_matrix_moments(const RoughnessParams& params) {
  const Matrix v = asymptotic_variance_V(params);
  Eigen::LDLT<Matrix> ldlt(v);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw Error("info_matrix_moments: V is singular at this parameter");
  const Matrix j = expected_moments_jacobian(params);
  return j.transpose() * ldlt.solve(j);
}

ContrastProblem make_problem(const MomentPair& moments) {
  ContrastProblem p;
  p.t = moments.nu_a;
  p.value = [moments](const Vector& x) {
    const RoughnessParams rp = RoughnessParams::from(x);
    if (rp.alpha < 0.0 || rp.beta <= 0.0) return std::numeric_limits<double>::infinity();
    return wls_contrast(moments, rp);
  };
  return p;
}

ContrastProblem make_problem(const MomentPair& moments, const ResimDesign& resim) {
  ContrastProblem p = make_problem(moments);
  const ResimDesign r = resim;
  p.resimulate = [r](const Vector& at, std::uint64_t seed) {
    const sim::SurfaceSample fresh = sim::simulate_transect_sample(
        r.window, at[0], at[1], r.design, seed);
    return make_problem(sample_moments(fresh));
  };
  return p;
}

namespace {

std::pair<double, double> gauss_ci(double center, double var, double z) {
  const double half = z * std::sqrt(std::max(0.0, var));
  return {center - half, center + half};
}

}  // namespace

FitReport run_roughness_fit(const MomentPair& moments, const Prior& prior,
                            const FitConfig& config) {
  ContrastProblem problem = make_problem(moments);
  const double nu = moments.nu_a;

  MapEstimate map = map_estimate(problem, prior, config.box, config.map);

  auto grid_on = [&](const ParamBox& box) {
    return evaluate_cb_posterior(
        problem, prior,
        {GridAxis::linspace(box.lower[0], box.upper[0], config.posterior_nodes),
         GridAxis::linspace(box.lower[1], box.upper[1], config.posterior_nodes)});
  };

  // First pass over the whole prior box, then one zoom around the MAP so the
  // narrow axis keeps enough nodes for quantile work.
  const PosteriorGrid coarse = grid_on(config.box);
  const PosteriorMoments cm = posterior_moments(coarse);
  Vector lo(2), hi(2);
  for (int d = 0; d < 2; ++d) {
    const double coarse_step =
        (config.box.upper[d] - config.box.lower[d]) / (config.posterior_nodes - 1);
    const double half = std::max(4.0 * std::sqrt(cm.covariance(d, d)), 3.0 * coarse_step);
    lo[d] = std::max(config.box.lower[d], map.point[d] - half);
    hi[d] = std::min(config.box.upper[d], map.point[d] + half);
  }
  ParamBox refined(lo, hi);
  PosteriorGrid posterior = grid_on(refined);

  const Matrix info = info_matrix_moments(RoughnessParams::from(map.point));
  Eigen::LDLT<Matrix> ldlt(info);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw Error("run_roughness_fit: information matrix is singular at the MAP");
  const Matrix cov_gauss = ldlt.solve(Matrix::Identity(2, 2)) / nu;
  const double z = normal_quantile(0.975);
  const auto ci_alpha = posterior.marginal_interval(0, 0.95);
  const auto ci_beta = posterior.marginal_interval(1, 0.95);

  return FitReport{
      .map = map,
      .posterior = std::move(posterior),
      .refined_box = refined,
      .moments = moments,
      .info_moments = info,
      .ci_alpha_posterior = ci_alpha,
      .ci_beta_posterior = ci_beta,
      .ci_alpha_gauss = gauss_ci(map.point[0], cov_gauss(0, 0), z),
      .ci_beta_gauss = gauss_ci(map.point[1], cov_gauss(1, 1), z),
  };
}

FitReport run_roughness_fit(const sim::SurfaceSample& sample, const Prior& prior,
                            const FitConfig& config) {
  return run_roughness_fit(sample_moments(sample), prior, config);
}

}  // namespace cbp::rough
