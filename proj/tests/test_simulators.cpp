#include "cbp/rng.hpp"
#include "cbp/sim/cylinders.hpp"
#include "cbp/sim/gibbs.hpp"
#include "cbp/sim/grf.hpp"
#include "cbp/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace cbp;
using namespace cbp::sim;

namespace {

// mean product of values at the given lattice offset
double lag_covariance(const LatticeField& f, int da, int db) {
  double s = 0.0;
  long c = 0;
  for (int i = 0; i + da < f.n; ++i)
    for (int j = 0; j + db < f.n; ++j) {
      s += f.at(i, j) * f.at(i + da, j + db);
      ++c;
    }
  return s / c;
}

struct MeanSe {
  double mean;
  double se;
};

MeanSe summarize(const std::vector<double>& xs) {
  const double m = sample_mean(xs);
  return {m, std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()))};
}

}  // namespace

TEST_CASE("gaussian field matches its covariance model at several lags") {
  const int reps = 500;
  const GrfSampler sampler(20, 1.0);
  std::vector<double> lag1, lag_diag, lag2, var;
  for (int r = 0; r < reps; ++r) {
    const LatticeField f = sampler.draw(derive_seed(11, r));
    lag1.push_back(0.5 * (lag_covariance(f, 0, 1) + lag_covariance(f, 1, 0)));
    lag_diag.push_back(lag_covariance(f, 1, 1));
    lag2.push_back(0.5 * (lag_covariance(f, 0, 2) + lag_covariance(f, 2, 0)));
    var.push_back(lag_covariance(f, 0, 0));
  }
  const MeanSe v = summarize(var);
  CHECK(std::abs(v.mean - 1.0) < 3.0 * v.se);
  const MeanSe l1 = summarize(lag1);
  CHECK(std::abs(l1.mean - std::exp(-1.0)) < 3.0 * l1.se);
  const MeanSe ld = summarize(lag_diag);
  CHECK(std::abs(ld.mean - std::exp(-std::sqrt(2.0))) < 3.0 * ld.se);
  const MeanSe l2 = summarize(lag2);
  CHECK(std::abs(l2.mean - std::exp(-2.0)) < 3.0 * l2.se);
}

TEST_CASE("large theta decorrelates neighbors") {
  const GrfSampler sampler(20, 50.0);
  std::vector<double> lag1;
  for (int r = 0; r < 500; ++r) {
    const LatticeField f = sampler.draw(derive_seed(12, r));
    lag1.push_back(0.5 * (lag_covariance(f, 0, 1) + lag_covariance(f, 1, 0)));
  }
  const MeanSe l1 = summarize(lag1);
  CHECK(std::abs(l1.mean - std::exp(-50.0)) < 3.0 * l1.se);
}

TEST_CASE("field simulation is reproducible and validated") {
  const LatticeField a = simulate_grf_exponential(10, 1.3, 77);
  const LatticeField b = simulate_grf_exponential(10, 1.3, 77);
  CHECK(a.values == b.values);
  const LatticeField c = simulate_grf_exponential(10, 1.3, 78);
  CHECK(a.values != c.values);
  CHECK_THROWS_AS(simulate_grf_exponential(101, 1.0, 1), Error);  // n^2 > 1e4
  CHECK_THROWS_AS(simulate_grf_exponential(10, 0.0, 1), Error);
}

TEST_CASE("independent Markov field is a fair coin field") {
  const LatticeField f = simulate_markov_field(50, 0.0, 0.0, 500, 5);
  double mean = 0.0;
  for (double v : f.values) {
    CHECK((v == 0.0 || v == 1.0));
    mean += v;
  }
  mean /= f.values.size();
  CHECK(std::abs(mean - 0.5) < 3.0 * std::sqrt(0.25 / 2500.0));
}

TEST_CASE("Gibbs equilibrium honors the logistic conditional frequencies") {
  const double t1 = 0.0, t2 = 0.3;
  const LatticeField f = simulate_markov_field(50, t1, t2, 500, 321);
  long count[5] = {0, 0, 0, 0, 0};
  long ones[5] = {0, 0, 0, 0, 0};
  for (int i = 1; i < f.n - 1; ++i)
    for (int j = 1; j < f.n - 1; ++j) {
      const int s = static_cast<int>(f.at(i - 1, j) + f.at(i + 1, j) + f.at(i, j - 1) +
                                     f.at(i, j + 1));
      ++count[s];
      if (f.at(i, j) == 1.0) ++ones[s];
    }
  for (int s = 0; s <= 4; ++s) {
    if (count[s] < 100) continue;
    const double p = 1.0 / (1.0 + std::exp(-(t1 + t2 * s)));
    const double f_hat = static_cast<double>(ones[s]) / count[s];
    const double se = std::sqrt(p * (1.0 - p) / count[s]);
    CHECK(std::abs(f_hat - p) < 3.0 * se);
  }
}

TEST_CASE("positive interaction produces positively correlated neighbors") {
  double pooled = 0.0;
  for (int seed = 1; seed <= 5; ++seed) {
    const LatticeField f = simulate_markov_field(50, 0.0, 0.3, 500, seed);
    const double m = sample_mean(f.values);
    pooled += 0.5 * (lag_covariance(f, 0, 1) + lag_covariance(f, 1, 0)) - m * m;
  }
  CHECK(pooled / 5.0 > 0.005);
}

TEST_CASE("Markov simulation validates its inputs and reproduces per seed") {
  CHECK_THROWS_AS(simulate_markov_field(10, 0.0, 1.2, 10, 1), Error);
  CHECK_THROWS_AS(simulate_markov_field(10, 0.0, 0.5, 0, 1), Error);
  const LatticeField a = simulate_markov_field(15, 0.2, -0.4, 50, 3);
  const LatticeField b = simulate_markov_field(15, 0.2, -0.4, 50, 3);
  CHECK(a.values == b.values);
}

TEST_CASE("surface heights follow the covering-cylinder definition") {
  CylinderProcess p;
  p.window = {10.0, 10.0};
  p.buffer = 1.0;
  p.cx = {5.0, 5.5};
  p.cy = {5.0, 5.0};
  p.radius = {2.0, 1.0};
  const auto h = evaluate_surface(p, {{5.0, 5.0}, {5.0, 8.5}, {5.3, 5.0}});
  CHECK(h[0] == doctest::Approx(3.0));  // both cylinders cover the first point
  CHECK(h[1] == doctest::Approx(0.0));  // distance 3.5 > 2
  CHECK(h[2] == doctest::Approx(3.0));
  CHECK_THROWS_AS(evaluate_surface(p, {{-1.0, 0.0}}), Error);
}

TEST_CASE("cylinder process respects its intensity and mark law") {
  const Rect window{100.0, 100.0};
  const double alpha = 46.6, beta = 3.28;
  const CylinderProcess p = simulate_cylinder_surface(window, alpha, beta, 2718);
  const double lam = expected_cylinder_count(window, alpha, beta);
  CHECK(std::abs(static_cast<double>(p.size()) - lam) < 3.0 * std::sqrt(lam));

  std::vector<double> radii(p.radius.begin(), p.radius.end());
  const MeanSe r = summarize(radii);
  CHECK(std::abs(r.mean - 1.0 / beta) < 3.0 * r.se);

  const double b = cylinder_buffer(beta);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(p.radius[i] > 0.0);
    CHECK(p.cx[i] >= -b);
    CHECK(p.cx[i] <= window.width + b);
  }
}

TEST_CASE("degenerate cylinder processes") {
  const CylinderProcess empty = simulate_cylinder_surface({50.0, 50.0}, 0.0, 2.0, 4);
  CHECK(empty.size() == 0);
  const SurfaceSample s = sample_transects(empty, 1, 10.0, 2.0, 5);
  REQUIRE(s.transects.size() == 1);
  CHECK(s.transects[0].size() == 6);
  CHECK(s.nu_a == doctest::Approx(10.0));
  for (double h : s.transects[0]) CHECK(h == 0.0);

  CHECK_THROWS_AS(simulate_cylinder_surface({10.0, 10.0}, -1.0, 2.0, 4), Error);
  CHECK_THROWS_AS(simulate_cylinder_surface({10.0, 10.0}, 1.0, 0.0, 4), Error);
  // resource guard
  CHECK_THROWS_AS(simulate_cylinder_surface({1000.0, 1000.0}, 1e5, 1.0, 4), Error);
}

TEST_CASE("default transect design matches the experimental layout") {
  const CylinderProcess p = simulate_cylinder_surface({1200.0, 100.0}, 5.0, 3.0, 31);
  const SurfaceSample s = sample_transects(p, 12, 1180.0, 2.0, 32);
  REQUIRE(s.transects.size() == 12);
  for (const auto& t : s.transects) CHECK(t.size() == 591);
  CHECK(s.nu_a == doctest::Approx(14160.0));
  CHECK_THROWS_AS(sample_transects(p, 12, 2000.0, 2.0, 32), Error);  // window too small
}

TEST_CASE("cylinder realizations reproduce per seed") {
  const Rect w{60.0, 60.0};
  const CylinderProcess a = simulate_cylinder_surface(w, 8.0, 2.0, 12);
  const CylinderProcess b = simulate_cylinder_surface(w, 8.0, 2.0, 12);
  CHECK(a.cx == b.cx);
  CHECK(a.radius == b.radius);
  const CylinderProcess c = simulate_cylinder_surface(w, 8.0, 2.0, 13);
  CHECK(a.radius != c.radius);
}

TEST_CASE("streamed and materialized transect samples coincide") {
  const Rect window{300.0, 40.0};
  const TransectDesign design{3, 250.0, 2.0};
  const std::uint64_t seed = 555;
  const SurfaceSample streamed = simulate_transect_sample(window, 15.0, 2.5, design, seed);
  const CylinderProcess proc = simulate_cylinder_surface(window, 15.0, 2.5, derive_seed(seed, 0));
  const SurfaceSample mat =
      sample_transects(proc, design.count, design.length_mm, design.spacing_mm, derive_seed(seed, 1));
  REQUIRE(streamed.transects.size() == mat.transects.size());
  for (std::size_t k = 0; k < mat.transects.size(); ++k)
    CHECK(streamed.transects[k] == mat.transects[k]);
}

TEST_CASE("transect moments agree with the model's first two moments") {
  const double alpha = 20.0, beta = 3.0;
  const Rect window{1020.0, 10.0};
  const TransectDesign design{1, 1000.0, 2.0};
  const int reps = 24;
  std::vector<double> m1s, m2s;
  for (int r = 0; r < reps; ++r) {
    const SurfaceSample s = simulate_transect_sample(window, alpha, beta, design, derive_seed(88, r));
    double s1 = 0.0, s2 = 0.0;
    long c = 0;
    for (const auto& t : s.transects)
      for (double h : t) {
        s1 += h;
        s2 += h * h;
        ++c;
      }
    m1s.push_back(s1 / c);
    m2s.push_back(s2 / c);
  }
  const double e1 = 6.0 * M_PI * alpha / std::pow(beta, 4.0);
  const double e2 = 36.0 * M_PI * M_PI * alpha * alpha / std::pow(beta, 8.0) +
                    24.0 * M_PI * alpha / std::pow(beta, 5.0);
  const MeanSe m1 = summarize(m1s);
  CHECK(std::abs(m1.mean - e1) < 3.0 * m1.se);
  const MeanSe m2 = summarize(m2s);
  CHECK(std::abs(m2.mean - e2) < 3.0 * m2.se);
}
