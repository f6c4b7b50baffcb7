#include "cbp/derivatives.hpp"
#include "cbp/grid.hpp"
#include "cbp/moments.hpp"
#include "cbp/optimize.hpp"
#include "cbp/rng.hpp"
#include "cbp/sandwich.hpp"
#include "cbp/stats.hpp"
#include "cbp/types.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace cbp;

namespace {

ContrastProblem quadratic_problem(double m, double t) {
  ContrastProblem p;
  p.t = t;
  p.value = [m](const Vector& x) { return 0.5 * (x[0] - m) * (x[0] - m); };
  return p;
}

// Likelihood contrast of an i.i.d. unit-variance Gaussian-mean sample,
// carrying only the sufficient statistics.
ContrastProblem gaussian_mean_problem(int n, double gen_mean, std::uint64_t seed) {
  NormalSampler normal(seed);
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = gen_mean + normal();
    sum += x;
    sumsq += x * x;
  }
  const double xbar = sum / n;
  ContrastProblem p;
  p.t = n;
  p.value = [n, sum, sumsq](const Vector& a) {
    return (sumsq - 2.0 * a[0] * sum + n * a[0] * a[0]) / (2.0 * n);
  };
  p.gradient = [xbar](const Vector& a) { return Vector::Constant(1, a[0] - xbar); };
  p.hessian = [](const Vector&) { return Matrix::Constant(1, 1, 1.0); };
  p.resimulate = [n](const Vector& at, std::uint64_t s) {
    return gaussian_mean_problem(n, at[0], s);
  };
  return p;
}

}  // namespace

TEST_CASE("constant contrast cancels out of the posterior") {
  ContrastProblem p;
  p.t = 100.0;
  p.value = [](const Vector&) { return 3.7; };
  const Prior prior = Prior::uniform(ParamBox({0.0}, {4.0}));
  const PosteriorGrid grid = evaluate_cb_posterior(p, prior, {GridAxis::linspace(0, 4, 401)});
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(grid.density(i) == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(grid.integral() == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("quadratic contrast gives the closed-form Gaussian mode height") {
  const double m = 1.7, t = 100.0;
  ContrastProblem p = quadratic_problem(m, t);
  const Prior prior = Prior::uniform(ParamBox({-10.0}, {10.0}));
  const PosteriorGrid grid =
      evaluate_cb_posterior(p, prior, {GridAxis::linspace(-10, 10, 2001)});
  // density of N(m, 1/t) at its mode
  const double expect = std::sqrt(t / (2.0 * M_PI));
  double at_m = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (std::abs(grid.node(i)[0] - m) < 1e-9) at_m = grid.density(i);
  CHECK(at_m == doctest::Approx(expect).epsilon(1e-3));
  CHECK(grid.integral() == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("posterior evaluation rejects bad grids and bad contrasts") {
  ContrastProblem p = quadratic_problem(0.0, 10.0);
  const Prior prior = Prior::uniform(ParamBox({-1.0}, {1.0}));
  CHECK_THROWS_AS(evaluate_cb_posterior(p, prior, {GridAxis::linspace(-2, 2, 11)}), Error);
  CHECK_THROWS_AS(evaluate_cb_posterior(p, prior, {GridAxis{{-0.5, 0.5}}}), Error);

  ContrastProblem all_inf;
  all_inf.t = 10.0;
  all_inf.value = [](const Vector&) { return std::numeric_limits<double>::infinity(); };
  CHECK_THROWS_WITH_AS(
      evaluate_cb_posterior(all_inf, prior, {GridAxis::linspace(-1, 1, 11)}),
      doctest::Contains("empty posterior"), Error);

  ContrastProblem nan_at_zero = all_inf;
  nan_at_zero.value = [](const Vector& x) {
    return x[0] == 0.0 ? std::numeric_limits<double>::quiet_NaN() : 1.0;
  };
  CHECK_THROWS_AS(evaluate_cb_posterior(nan_at_zero, prior, {GridAxis::linspace(-1, 1, 11)}),
                  Error);
}

TEST_CASE("partially excluded region is fine") {
  ContrastProblem p;
  p.t = 50.0;
  p.value = [](const Vector& x) {
    if (x[0] < 0.0) return std::numeric_limits<double>::infinity();
    return 0.5 * (x[0] - 1.0) * (x[0] - 1.0);
  };
  const Prior prior = Prior::uniform(ParamBox({-2.0}, {4.0}));
  const PosteriorGrid grid = evaluate_cb_posterior(p, prior, {GridAxis::linspace(-2, 4, 601)});
  CHECK(grid.integral() == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(grid.density(0) == 0.0);
}

TEST_CASE("flat-prior MAP equals the direct contrast minimizer") {
  // asymmetric objective so refinement has something to do
  ContrastProblem p;
  p.t = 200.0;
  p.value = [](const Vector& x) {
    const double d = x[0] - 1.2345;
    return 0.5 * d * d + 0.1 * d * d * d * d + 0.02 * d * d * d;
  };
  const ParamBox box({0.0}, {4.0});
  const Prior prior = Prior::uniform(box);
  const MapEstimate map = map_estimate(p, prior, box);
  const MapEstimate direct = minimize_contrast(p, box);
  CHECK(std::abs(map.point[0] - direct.point[0]) < 1e-6);
  CHECK(map.refined);
  CHECK_FALSE(map.boundary_warning);
}

TEST_CASE("conjugate normal shrinkage matches the closed form") {
  const double m = 1.2, sigma = 0.8;
  for (double t : {10.0, 100.0, 1000.0}) {
    ContrastProblem p = quadratic_problem(m, t);
    const ParamBox box({-4.0}, {4.0});
    const Prior prior = Prior::gaussian(Vector{{0.0}}, Vector{{sigma}}, box);
    const MapEstimate map = map_estimate(p, prior, box);
    const double expect = m * t * sigma * sigma / (1.0 + t * sigma * sigma);
    CHECK(map.point[0] == doctest::Approx(expect).epsilon(1e-8));
  }
}

TEST_CASE("MAP deviation from the minimizer decays like 1/t") {
  const double m = 1.2, sigma = 1.0;
  const ParamBox box({-4.0}, {4.0});
  const Prior prior = Prior::gaussian(Vector{{0.0}}, Vector{{sigma}}, box);
  auto gap = [&](double t) {
    const MapEstimate map = map_estimate(quadratic_problem(m, t), prior, box);
    return m - map.point[0];
  };
  const double g1 = gap(1000.0), g2 = gap(2000.0);
  CHECK(g2 / g1 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("boundary minimum raises a warning and stays inside the box") {
  ContrastProblem p = quadratic_problem(5.0, 10.0);  // argmin outside the box
  const ParamBox box({0.0}, {4.0});
  const Prior prior = Prior::uniform(box);
  const MapEstimate map = map_estimate(p, prior, box);
  CHECK(map.boundary_warning);
  CHECK(map.point[0] < 4.0);
  CHECK(map.point[0] == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("posterior moments recover a tabulated Gaussian") {
  ContrastProblem p;
  p.t = 1.0;
  p.value = [](const Vector& x) { return 0.5 * (x[0] * x[0] / 1.0 + x[1] * x[1] / 4.0); };
  const Prior prior = Prior::uniform(ParamBox({-6.0, -12.0}, {6.0, 12.0}));
  const PosteriorGrid grid = evaluate_cb_posterior(
      p, prior, {GridAxis::linspace(-6, 6, 201), GridAxis::linspace(-12, 12, 201)});
  const PosteriorMoments mom = posterior_moments(grid);
  CHECK(std::abs(mom.mean[0]) < 1e-9);
  CHECK(std::abs(mom.mean[1]) < 1e-9);
  CHECK(mom.covariance(0, 0) == doctest::Approx(1.0).epsilon(0.01));
  CHECK(mom.covariance(1, 1) == doctest::Approx(4.0).epsilon(0.01));
  CHECK(std::abs(mom.covariance(0, 1)) < 0.01);
}

TEST_CASE("uniform posterior has variance width^2/12") {
  ContrastProblem p;
  p.t = 1.0;
  p.value = [](const Vector&) { return 0.0; };
  const Prior prior = Prior::uniform(ParamBox({0.0}, {4.0}));
  const PosteriorGrid grid = evaluate_cb_posterior(p, prior, {GridAxis::linspace(0, 4, 401)});
  const PosteriorMoments mom = posterior_moments(grid);
  CHECK(mom.mean[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(mom.covariance(0, 0) == doctest::Approx(16.0 / 12.0).epsilon(0.01));
}

TEST_CASE("posterior information estimators recover the generating matrix") {
  // posterior exactly N(0, (tI)^{-1}) with I = diag(2, 5), t = 50
  const double t = 50.0;
  ContrastProblem p;
  p.t = t;
  p.value = [](const Vector& x) { return 0.5 * (2.0 * x[0] * x[0] + 5.0 * x[1] * x[1]); };
  const double s0 = 6.0 / std::sqrt(2.0 * t), s1 = 6.0 / std::sqrt(5.0 * t);
  const Prior prior = Prior::uniform(ParamBox({-s0, -s1}, {s0, s1}));
  const PosteriorGrid grid = evaluate_cb_posterior(
      p, prior,
      {GridAxis::linspace(-s0, s0, 201), GridAxis::linspace(-s1, s1, 201)});
  const MapEstimate map = map_estimate(p, prior, ParamBox({-s0, -s1}, {s0, s1}));
  const PosteriorInfoEstimate info = info_from_posterior(grid, map, t);
  CHECK(info.from_moments(0, 0) == doctest::Approx(2.0).epsilon(0.02));
  CHECK(info.from_moments(1, 1) == doctest::Approx(5.0).epsilon(0.02));
  CHECK_FALSE(info.from_mode_height.has_value());
}

TEST_CASE("scalar mode-height shortcut returns 1/s^2") {
  const double t = 100.0, s = 0.7;
  ContrastProblem p;
  p.t = t;
  p.value = [s](const Vector& x) { return 0.5 * x[0] * x[0] / (s * s); };
  const double half = 7.0 * s / std::sqrt(t);
  const ParamBox box({-half}, {half});
  const Prior prior = Prior::uniform(box);
  const PosteriorGrid grid =
      evaluate_cb_posterior(p, prior, {GridAxis::linspace(-half, half, 401)});
  const MapEstimate map = map_estimate(p, prior, box);
  const PosteriorInfoEstimate info = info_from_posterior(grid, map, t);
  REQUIRE(info.from_mode_height.has_value());
  CHECK(*info.from_mode_height == doctest::Approx(1.0 / (s * s)).epsilon(0.01));
  CHECK(info.from_moments(0, 0) == doctest::Approx(1.0 / (s * s)).epsilon(0.02));
}

TEST_CASE("finite differences on polynomials") {
  ContrastProblem p;
  p.t = 1.0;
  p.value = [](const Vector& x) { return x[0] * x[0]; };
  const Vector at = Vector::Constant(1, 3.0);
  CHECK(finite_difference_gradient(p, at)[0] == doctest::Approx(6.0).epsilon(1e-6));
  CHECK(finite_difference_hessian(p, at)(0, 0) == doctest::Approx(2.0).epsilon(1e-4));

  ContrastProblem c;
  c.t = 1.0;
  c.value = [](const Vector&) { return 4.2; };
  CHECK(finite_difference_gradient(c, at)[0] == 0.0);
  CHECK(finite_difference_hessian(c, at)(0, 0) == 0.0);

  ContrastProblem bad;
  bad.t = 1.0;
  bad.value = [](const Vector& x) {
    return x[0] > 3.0 ? std::numeric_limits<double>::infinity() : x[0];
  };
  CHECK_THROWS_AS(finite_difference_gradient(bad, at), Error);
}

TEST_CASE("mixed-partial finite differences are symmetric and accurate") {
  ContrastProblem p;
  p.t = 1.0;
  p.value = [](const Vector& x) {
    return x[0] * x[0] * x[1] + 0.5 * x[1] * x[1] + std::sin(x[0]);
  };
  const Vector at{{0.7, -0.4}};
  const Matrix h = finite_difference_hessian(p, at);
  CHECK(h(0, 1) == h(1, 0));
  CHECK(h(0, 1) == doctest::Approx(2.0 * at[0]).epsilon(1e-4));
  CHECK(h(0, 0) == doctest::Approx(2.0 * at[1] - std::sin(at[0])).epsilon(1e-3));
}

TEST_CASE("gamma estimate of a deterministic contrast is zero") {
  ContrastProblem p = quadratic_problem(1.0, 25.0);
  p.resimulate = [](const Vector&, std::uint64_t) { return quadratic_problem(1.0, 25.0); };
  const Matrix g = mc_estimate_gamma(p, Vector::Constant(1, 0.5), 50, 42);
  CHECK(std::abs(g(0, 0)) < 1e-12);
}

TEST_CASE("info estimate of a quadratic contrast is exactly its curvature") {
  ContrastProblem p = quadratic_problem(0.3, 25.0);
  p.resimulate = [](const Vector&, std::uint64_t s) {
    auto q = quadratic_problem(0.3 + 1e-3 * static_cast<double>(s % 7), 25.0);
    return q;
  };
  const Matrix i = mc_estimate_info(p, Vector::Constant(1, 0.1), 20, 7);
  CHECK(i(0, 0) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("sandwich pieces of the iid Gaussian-mean contrast converge to 1") {
  const int n = 400, reps = 2000;
  ContrastProblem p = gaussian_mean_problem(n, 0.0, 99);
  const Vector at = Vector::Constant(1, 0.0);
  const Matrix gamma = mc_estimate_gamma(p, at, reps, 1234);
  CHECK(gamma(0, 0) == doctest::Approx(1.0).epsilon(3.0 * std::sqrt(2.0 / reps)));
  const Matrix info = mc_estimate_info(p, at, reps, 1234);
  CHECK(info(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("monte-carlo estimates are deterministic across thread counts") {
  const int n = 100;
  ContrastProblem p = gaussian_mean_problem(n, 0.5, 3);
  const Vector at = Vector::Constant(1, 0.5);
  McOptions one;
  one.threads = 1;
  McOptions eight;
  eight.threads = 8;
  const Matrix g1 = mc_estimate_gamma(p, at, 64, 5, one);
  const Matrix g8 = mc_estimate_gamma(p, at, 64, 5, eight);
  CHECK(g1(0, 0) == g8(0, 0));
  const Matrix i1 = mc_estimate_info(p, at, 64, 5, one);
  const Matrix i8 = mc_estimate_info(p, at, 64, 5, eight);
  CHECK(i1(0, 0) == i8(0, 0));
  CHECK_THROWS_AS(mc_estimate_gamma(p, at, 1, 5), Error);
}

TEST_CASE("replication failures carry the replication index") {
  ContrastProblem p = quadratic_problem(0.0, 4.0);
  p.resimulate = [](const Vector&, std::uint64_t) -> ContrastProblem {
    throw Error("synthetic resimulation failure");
  };
  CHECK_THROWS_WITH_AS(mc_estimate_gamma(p, Vector::Constant(1, 0.0), 8, 1),
                       doctest::Contains("replication 0"), Error);
}

TEST_CASE("limit distribution wiring") {
  MapEstimate map;
  map.point = Vector::Constant(1, 1.34);

  SUBCASE("gamma equal to info collapses the sandwich") {
    const Matrix i = Matrix::Constant(1, 1, 2.5);
    const LimitDistribution d = limit_distribution(map, i, i, 10.0);
    CHECK(d.covariance(0, 0) == doctest::Approx(1.0 / 25.0).epsilon(1e-12));
  }
  SUBCASE("scalar sandwich matches hand arithmetic") {
    const LimitDistribution d = limit_distribution(map, Matrix::Constant(1, 1, 0.27),
                                                   Matrix::Constant(1, 1, 1.97), 400.0);
    CHECK(d.covariance(0, 0) == doctest::Approx(1.97 / (400.0 * 0.27 * 0.27)).epsilon(1e-12));
    CHECK(d.covariance(0, 0) == doctest::Approx(0.0676).epsilon(0.01));
    const LimitDistribution dp = limit_distribution(map, Matrix::Constant(1, 1, 0.20),
                                                    Matrix::Constant(1, 1, 1.97), 400.0);
    CHECK(dp.covariance(0, 0) == doctest::Approx(0.123).epsilon(0.01));
  }
  SUBCASE("singular info is rejected") {
    CHECK_THROWS_AS(limit_distribution(map, Matrix::Zero(1, 1), Matrix::Constant(1, 1, 1.0), 10.0),
                    Error);
  }
}

TEST_CASE("confidence regions") {
  LimitDistribution d;
  d.mean = Vector::Constant(1, 0.0);
  d.covariance = Matrix::Constant(1, 1, 1.0);
  const ConfidenceRegion r = confidence_region(d, 0.95);
  CHECK(r.intervals[0].first == doctest::Approx(-1.95996).epsilon(1e-3));
  CHECK(r.intervals[0].second == doctest::Approx(1.95996).epsilon(1e-3));
  CHECK(r.chi2_radius2 == doctest::Approx(normal_quantile(0.975) * normal_quantile(0.975)));

  d.covariance(0, 0) = 0.0;
  const ConfidenceRegion degen = confidence_region(d, 0.95);
  CHECK(degen.intervals[0].first == 0.0);
  CHECK(degen.intervals[0].second == 0.0);

  CHECK_THROWS_AS(confidence_region(d, 1.5), Error);

  LimitDistribution d2;
  d2.mean = Vector{{0.0, 0.0}};
  d2.covariance = Matrix::Identity(2, 2);
  const ConfidenceRegion r2 = confidence_region(d2, 0.95);
  // chi-square(2) quantile has the closed form -2 log(1 - level)
  CHECK(r2.chi2_radius2 == doctest::Approx(-2.0 * std::log(0.05)).epsilon(1e-10));
  CHECK(r2.ellipse_contains(Vector{{1.0, 1.0}}));
  CHECK_FALSE(r2.ellipse_contains(Vector{{2.0, 2.0}}));
}

TEST_CASE("posterior approaches its Gaussian limit as t grows") {
  // Gaussian prior, so the exact posterior variance 1/(n+1) differs from the
  // limit law's 1/n by a factor that shrinks with n.
  const ParamBox box({-5.0}, {5.0});
  const Prior prior = Prior::gaussian(Vector{{0.0}}, Vector{{1.0}}, box);
  double last = 1.0;
  for (int n : {100, 400, 1600}) {
    ContrastProblem p = gaussian_mean_problem(n, 0.3, 2024);
    const MapEstimate map = map_estimate(p, prior, box);
    const double sd = 1.0 / std::sqrt(static_cast<double>(n));
    const PosteriorGrid grid = evaluate_cb_posterior(
        p, prior,
        {GridAxis::linspace(map.point[0] - 6.0 * sd, map.point[0] + 6.0 * sd, 401)});
    double dev = 0.0, mode = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double x = grid.node(i)[0];
      const double z = (x - map.point[0]) / sd;
      const double gauss = std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
      dev = std::max(dev, std::abs(grid.density(i) - gauss));
      mode = std::max(mode, grid.density(i));
    }
    const double scaled = dev / mode;
    CHECK(scaled < last);
    last = scaled;
    if (n == 1600) CHECK(scaled < 0.02);
  }
}

TEST_CASE("degenerate posteriors are rejected by the moment extractor") {
  // all mass collapses onto one node, so the covariance loses rank
  ContrastProblem p;
  p.t = 1e30;
  p.value = [](const Vector& x) { return 0.5 * (x[0] - 1.0) * (x[0] - 1.0); };
  const Prior prior = Prior::uniform(ParamBox({0.0}, {4.0}));
  const PosteriorGrid grid = evaluate_cb_posterior(p, prior, {GridAxis::linspace(0, 4, 41)});
  CHECK_THROWS_WITH_AS(posterior_moments(grid), doctest::Contains("degenerate"), Error);
}

TEST_CASE("NaN objectives abort the map search") {
  ContrastProblem p;
  p.t = 4.0;
  p.value = [](const Vector&) { return std::numeric_limits<double>::quiet_NaN(); };
  const ParamBox box({0.0}, {1.0});
  CHECK_THROWS_AS(minimize_contrast(p, box), Error);
}

TEST_CASE("parameter type invariants") {
  CHECK_THROWS_AS(ParamPoint(Vector{}), Error);
  CHECK_THROWS_AS(ParamPoint({1.0, std::numeric_limits<double>::infinity()}), Error);
  CHECK_THROWS_AS(ParamBox({0.0}, {0.0}), Error);
  CHECK_THROWS_AS(ParamBox({0.0, 1.0}, {1.0}), Error);
  const ParamBox box({0.0, -1.0}, {2.0, 1.0});
  CHECK(box.contains(Vector{{0.0, 0.0}}));
  CHECK_FALSE(box.strictly_contains(Vector{{0.0, 0.0}}));
  CHECK(box.volume() == doctest::Approx(4.0));
}
