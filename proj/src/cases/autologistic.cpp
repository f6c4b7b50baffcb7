#include "cbp/cases/autologistic.hpp"

#include "cbp/rng.hpp"

#include <array>
#include <cmath>
#include <memory>

namespace cbp::autolog {

namespace {

double logistic(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// log(1 + e^z) without overflow
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// Interior sites grouped by (value, neighbor sum); enough to evaluate the
// contrast and both derivatives in O(1) per parameter point.
struct SiteTable {
  std::array<std::array<long, 5>, 2> counts{};  // [x][s]
  long m = 0;
};

SiteTable build_table(const sim::LatticeField& field) {
  const int n = field.n;
  if (n < 3) throw Error("pseudolik contrast: n must be >= 3 (no interior sites)");
  SiteTable t;
  for (int i = 1; i < n - 1; ++i) {
    for (int j = 1; j < n - 1; ++j) {
      const double xv = field.at(i, j);
      if (xv != 0.0 && xv != 1.0) throw Error("pseudolik contrast: field is not binary");
      const int s = static_cast<int>(field.at(i - 1, j) + field.at(i + 1, j) +
                                     field.at(i, j - 1) + field.at(i, j + 1));
      ++t.counts[xv == 1.0 ? 1 : 0][s];
    }
  }
  t.m = static_cast<long>(n - 2) * (n - 2);
  return t;
}

double contrast_from_table(const SiteTable& t, const AutologisticParams& p) {
  double sum = 0.0;
  for (int s = 0; s <= 4; ++s) {
    const double z = p.theta1 + p.theta2 * s;
    const double sp = softplus(z);
    // log P(x|s) = x z - log(1 + e^z)
    sum += t.counts[1][s] * (z - sp) + t.counts[0][s] * (-sp);
  }
  return -sum / static_cast<double>(t.m);
}

Vector gradient_from_table(const SiteTable& t, const AutologisticParams& p) {
  Vector g = Vector::Zero(2);
  for (int s = 0; s <= 4; ++s) {
    const double pr = logistic(p.theta1 + p.theta2 * s);
    for (int x = 0; x <= 1; ++x) {
      const double resid = x - pr;
      const double c = static_cast<double>(t.counts[x][s]);
      g[0] -= c * resid;
      g[1] -= c * resid * s;
    }
  }
  return g / static_cast<double>(t.m);
}

Matrix hessian_from_table(const SiteTable& t, const AutologisticParams& p) {
  Matrix h = Matrix::Zero(2, 2);
  for (int s = 0; s <= 4; ++s) {
    const double pr = logistic(p.theta1 + p.theta2 * s);
    const double w = pr * (1.0 - pr) * (t.counts[0][s] + t.counts[1][s]);
    h(0, 0) += w;
    h(0, 1) += w * s;
    h(1, 1) += w * s * s;
  }
  h(1, 0) = h(0, 1);
  return h / static_cast<double>(t.m);
}

ContrastProblem problem_from_table(std::shared_ptr<const SiteTable> t) {
  ContrastProblem p;
  p.t = static_cast<double>(t->m);
  p.value = [t](const Vector& x) { return contrast_from_table(*t, AutologisticParams::from(x)); };
  p.gradient = [t](const Vector& x) {
    return gradient_from_table(*t, AutologisticParams::from(x));
  };
  p.hessian = [t](const Vector& x) { return hessian_from_table(*t, AutologisticParams::from(x)); };
  return p;
}

}  // namespace

double conditional_prob(int x, int neighbor_sum, const AutologisticParams& params) {
  if (x != 0 && x != 1) throw Error("conditional_prob: state must be 0 or 1");
  if (neighbor_sum < 0 || neighbor_sum > 4)
    throw Error("conditional_prob: neighbor sum must lie in 0..4");
  const double p1 = logistic(params.theta1 + params.theta2 * neighbor_sum);
  return x == 1 ? p1 : 1.0 - p1;
}

double pseudolik_contrast(const sim::LatticeField& field, const AutologisticParams& params) {
  return contrast_from_table(build_table(field), params);
}

Vector score_vector(const sim::LatticeField& field, const AutologisticParams& params, int i,
                    int j) {
  const int n = field.n;
  if (i < 1 || i >= n - 1 || j < 1 || j >= n - 1)
    throw Error("score_vector: not an interior site");
  const double s = field.at(i - 1, j) + field.at(i + 1, j) + field.at(i, j - 1) +
                   field.at(i, j + 1);
  const double resid = field.at(i, j) - logistic(params.theta1 + params.theta2 * s);
  return Vector{{resid, resid * s}};
}

Vector pseudolik_gradient(const sim::LatticeField& field, const AutologisticParams& params) {
  return gradient_from_table(build_table(field), params);
}

Matrix pseudolik_hessian(const sim::LatticeField& field, const AutologisticParams& params) {
  return hessian_from_table(build_table(field), params);
}

ContrastProblem make_problem(const sim::LatticeField& field, int resim_sweeps) {
  auto table = std::make_shared<const SiteTable>(build_table(field));
  ContrastProblem p = problem_from_table(std::move(table));
  const int n = field.n;
  p.resimulate = [n, resim_sweeps](const Vector& at, std::uint64_t seed) {
    const sim::LatticeField fresh = sim::simulate_markov_field(n, at[0], at[1], resim_sweeps, seed);
    return problem_from_table(std::make_shared<const SiteTable>(build_table(fresh)));
  };
  return p;
}

FitReport run_markov_fit(const sim::LatticeField& field, const Prior& prior,
                         const FitConfig& config) {
  ContrastProblem problem = make_problem(field, config.resim_sweeps);
  const double m = problem.t;

  MapEstimate map = map_estimate(problem, prior, config.box, config.map);
  PosteriorGrid posterior = evaluate_cb_posterior(
      problem, prior,
      {GridAxis::linspace(config.box.lower[0], config.box.upper[0], config.posterior_nodes),
       GridAxis::linspace(config.box.lower[1], config.box.upper[1], config.posterior_nodes)});

  McOptions mc;
  mc.threads = config.threads;
  const std::uint64_t mc_seed = derive_seed(config.seed, 0x6d63);
  const Matrix gamma = mc_estimate_gamma(problem, map.point, config.mc_reps, mc_seed, mc);
  const Matrix info = mc_estimate_info(problem, map.point, config.mc_reps, mc_seed, mc);

  const PosteriorInfoEstimate pinfo = info_from_posterior(posterior, map, m);
  const LimitDistribution limit = limit_distribution(map, info, gamma, m);

  return FitReport{
      .map = map,
      .posterior = std::move(posterior),
      .gamma_mc = gamma,
      .info_mc = info,
      .info_posterior = pinfo.from_moments,
      .limit_covariance = limit.covariance,
      .region95 = confidence_region(limit, 0.95),
  };
}

}  // namespace cbp::autolog
