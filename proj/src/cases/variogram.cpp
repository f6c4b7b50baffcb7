#include "cbp/cases/variogram.hpp"

#include "cbp/parallel.hpp"
#include "cbp/rng.hpp"
#include "cbp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace cbp::vario {

namespace {

// Pair enumeration plan: displacement vectors grouped by squared distance.
struct Plan {
  int n = 0;
  double spacing = 1.0;
  std::vector<long> sq_dists;                       // ascending
  std::vector<std::vector<std::pair<int, int>>> disp;  // canonical half-plane
  std::vector<long> counts;
};

// Canonical half-plane displacements at squared distance s, so each
// unordered site pair is visited once.
std::vector<std::pair<int, int>> displacements_for(int n, long s) {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a <= n - 1; ++a) {
    const int blo = (a == 0) ? 1 : -(n - 1);
    for (int b = blo; b <= n - 1; ++b)
      if (static_cast<long>(a) * a + static_cast<long>(b) * b == s) out.emplace_back(a, b);
  }
  return out;
}

std::vector<long> half_diagonal_classes(int n) {
  // strict bound: s < (n-1)^2 / 2  (distance below the half diagonal)
  const double bound = 0.5 * static_cast<double>(n - 1) * (n - 1);
  std::map<long, bool> seen;
  for (int a = 0; a <= n - 1; ++a)
    for (int b = 0; b <= n - 1; ++b) {
      const long s = static_cast<long>(a) * a + static_cast<long>(b) * b;
      if (s > 0 && static_cast<double>(s) < bound) seen[s] = true;
    }
  std::vector<long> out;
  for (const auto& [s, _] : seen) out.push_back(s);
  return out;
}

Plan build_plan(int n, double spacing, const std::vector<double>& lags) {
  Plan plan;
  plan.n = n;
  plan.spacing = spacing;
  for (double h : lags) {
    const double ratio = h / spacing;
    const long s = std::lround(ratio * ratio);
    if (s < 1 || std::abs(std::sqrt(static_cast<double>(s)) * spacing - h) >
                     1e-9 * std::max(1.0, h))
      throw Error("sample_variogram: lag is not a lattice distance of this grid");
    auto vecs = displacements_for(n, s);
    if (vecs.empty()) throw Error("sample_variogram: lag not realizable on this grid");
    long count = 0;
    for (const auto& [a, b] : vecs)
      count += static_cast<long>(n - std::abs(a)) * (n - std::abs(b));
    plan.sq_dists.push_back(s);
    plan.disp.push_back(std::move(vecs));
    plan.counts.push_back(count);
  }
  return plan;
}

EmpiricalVariogram run_plan(const sim::LatticeField& field, const Plan& plan) {
  const int n = plan.n;
  EmpiricalVariogram v;
  v.lags.reserve(plan.sq_dists.size());
  v.gamma_hat.reserve(plan.sq_dists.size());
  v.counts = plan.counts;
  for (std::size_t l = 0; l < plan.sq_dists.size(); ++l) {
    double sum = 0.0;
    for (const auto& [a, b] : plan.disp[l]) {
      const int i1_hi = n - a;
      const int j_lo = b >= 0 ? 0 : -b;
      const int j_hi = b >= 0 ? n - b : n;
      for (int i = 0; i < i1_hi; ++i) {
        const double* row = &field.values[static_cast<std::size_t>(i) * n];
        const double* row2 = &field.values[static_cast<std::size_t>(i + a) * n];
        for (int j = j_lo; j < j_hi; ++j) {
          const double d = row[j] - row2[j + b];
          sum += d * d;
        }
      }
    }
    v.lags.push_back(plan.spacing * std::sqrt(static_cast<double>(plan.sq_dists[l])));
    v.gamma_hat.push_back(sum / (2.0 * static_cast<double>(plan.counts[l])));
  }
  return v;
}

// One-entry cache so resimulating many fields at one parameter factors the
// covariance once.
class SamplerCache {
 public:
  SamplerCache(int n, double spacing) : n_(n), spacing_(spacing) {}

  std::shared_ptr<const sim::GrfSampler> get(double theta) {
    std::lock_guard<std::mutex> lock(mu_);
    if (!sampler_ || theta_ != theta) {
      sampler_ = std::make_shared<const sim::GrfSampler>(n_, theta, spacing_);
      theta_ = theta;
    }
    return sampler_;
  }

 private:
  int n_;
  double spacing_;
  std::mutex mu_;
  double theta_ = -1.0;
  std::shared_ptr<const sim::GrfSampler> sampler_;
};

ContrastProblem problem_from_vario(std::shared_ptr<const EmpiricalVariogram> v, double t) {
  ContrastProblem p;
  p.t = t;
  p.value = [v](const Vector& x) { return ls_contrast(*v, x[0]); };
  p.gradient = [v](const Vector& x) {
    return Vector::Constant(1, ls_contrast_gradient(*v, x[0]));
  };
  p.hessian = [v](const Vector& x) {
    return Matrix::Constant(1, 1, ls_contrast_hessian(*v, x[0]));
  };
  return p;
}

}  // namespace

std::vector<double> lag_classes(int n, double spacing) {
  if (n < 2) throw Error("lag_classes: n must be >= 2");
  std::vector<double> lags;
  for (long s : half_diagonal_classes(n))
    lags.push_back(spacing * std::sqrt(static_cast<double>(s)));
  return lags;
}

EmpiricalVariogram sample_variogram(const sim::LatticeField& field,
                                    const std::vector<double>& lags) {
  if (lags.empty()) throw Error("sample_variogram: empty lag list");
  return run_plan(field, build_plan(field.n, field.spacing, lags));
}

double ls_contrast(const EmpiricalVariogram& vario, double alpha) {
  double u = 0.0;
  for (std::size_t l = 0; l < vario.lags.size(); ++l) {
    const double r = vario.gamma_hat[l] - (1.0 - std::exp(-alpha * vario.lags[l]));
    u += r * r;
  }
  return 0.5 * u;
}

double ls_contrast_gradient(const EmpiricalVariogram& vario, double alpha) {
  double g = 0.0;
  for (std::size_t l = 0; l < vario.lags.size(); ++l) {
    const double h = vario.lags[l];
    const double e = std::exp(-alpha * h);
    g -= h * e * (vario.gamma_hat[l] - (1.0 - e));
  }
  return g;
}

double ls_contrast_hessian(const EmpiricalVariogram& vario, double alpha) {
  double s = 0.0;
  for (std::size_t l = 0; l < vario.lags.size(); ++l) {
    const double h = vario.lags[l];
    const double e = std::exp(-alpha * h);
    const double r = vario.gamma_hat[l] - (1.0 - e);
    s += h * h * e * (e + r);
  }
  return s;
}

ContrastProblem make_problem(const sim::LatticeField& field) {
  const double t = static_cast<double>(field.n) * field.n;
  auto plan = std::make_shared<const Plan>(
      build_plan(field.n, field.spacing, lag_classes(field.n, field.spacing)));
  auto vario = std::make_shared<const EmpiricalVariogram>(run_plan(field, *plan));
  ContrastProblem p = problem_from_vario(std::move(vario), t);
  auto cache = std::make_shared<SamplerCache>(field.n, field.spacing);
  p.resimulate = [cache, plan, t](const Vector& at, std::uint64_t seed) {
    const auto sampler = cache->get(at[0]);
    const sim::LatticeField fresh = sampler->draw(seed);
    auto v = std::make_shared<const EmpiricalVariogram>(run_plan(fresh, *plan));
    return problem_from_vario(std::move(v), t);
  };
  return p;
}

FitReport run_variogram_fit(const sim::LatticeField& field, const Prior& prior,
                            const FitConfig& config) {
  ContrastProblem problem = make_problem(field);
  const double t = problem.t;

  MapEstimate map = map_estimate(problem, prior, config.box, config.map);
  PosteriorGrid posterior = evaluate_cb_posterior(
      problem, prior,
      {GridAxis::linspace(config.box.lower[0], config.box.upper[0], config.posterior_nodes)});

  McOptions mc;
  mc.threads = config.threads;
  // The same seed feeds both estimates so gradients and Hessians come from
  // the same resimulated fields.
  const std::uint64_t mc_seed = derive_seed(config.seed, 0x6d63);
  const double gamma = mc_estimate_gamma(problem, map.point, config.mc_reps, mc_seed, mc)(0, 0);
  const double info_mc = mc_estimate_info(problem, map.point, config.mc_reps, mc_seed, mc)(0, 0);

  const PosteriorInfoEstimate pinfo = info_from_posterior(posterior, map, t);
  const double info_post = *pinfo.from_mode_height;

  const double lv_mc = gamma / (t * info_mc * info_mc);
  const double lv_post = gamma / (t * info_post * info_post);
  const double z = normal_quantile(0.975);
  const double theta = map.point[0];

  return FitReport{
      .map = map,
      .posterior = std::move(posterior),
      .gamma_mc = gamma,
      .info_mc = info_mc,
      .info_posterior = info_post,
      .info_posterior_moments = pinfo.from_moments(0, 0),
      .limit_var_mc = lv_mc,
      .limit_var_posterior = lv_post,
      .ci_mc = {theta - z * std::sqrt(lv_mc), theta + z * std::sqrt(lv_mc)},
      .ci_posterior = {theta - z * std::sqrt(lv_post), theta + z * std::sqrt(lv_post)},
  };
}

CoverageResult coverage_experiment(double theta_true, int n, int outer_reps, int gamma_reps,
                                   std::uint64_t master_seed, unsigned threads) {
  if (outer_reps < 50) throw Error("coverage_experiment: outer_reps must be >= 50");
  if (gamma_reps < 2) throw Error("coverage_experiment: gamma_reps must be >= 2");

  const sim::GrfSampler truth_sampler(n, theta_true);
  CoverageResult out;
  out.records.resize(outer_reps);

  parallel_for(static_cast<std::size_t>(outer_reps), threads, [&](std::size_t r) {
    CoverageRecord& rec = out.records[r];
    rec.seed = derive_seed(master_seed, r);
    try {
      const sim::LatticeField field = truth_sampler.draw(derive_seed(rec.seed, 0));
      FitConfig cfg;
      cfg.mc_reps = gamma_reps;
      cfg.seed = derive_seed(rec.seed, 1);
      cfg.threads = 1;  // the outer loop owns the parallelism
      const Prior prior = Prior::uniform(cfg.box);
      const FitReport fit = run_variogram_fit(field, prior, cfg);
      rec.map = fit.map.point[0];
      rec.gamma = fit.gamma_mc;
      rec.info_mc = fit.info_mc;
      rec.info_posterior = fit.info_posterior;
      rec.ci_lo_mc = fit.ci_mc.first;
      rec.ci_hi_mc = fit.ci_mc.second;
      rec.ci_lo_post = fit.ci_posterior.first;
      rec.ci_hi_post = fit.ci_posterior.second;
      rec.covered_mc = rec.ci_lo_mc <= theta_true && theta_true <= rec.ci_hi_mc;
      rec.covered_post = rec.ci_lo_post <= theta_true && theta_true <= rec.ci_hi_post;
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
    }
  });

  long cov_mc = 0, cov_post = 0;
  for (const auto& rec : out.records) {
    if (rec.failed) {
      ++out.failures;
      continue;
    }
    ++out.completed;
    cov_mc += rec.covered_mc ? 1 : 0;
    cov_post += rec.covered_post ? 1 : 0;
  }
  if (out.failures * 20 > outer_reps)
    throw Error("coverage_experiment: more than 5% of replications failed");
  const double m = static_cast<double>(out.completed);
  out.rate_mc = cov_mc / m;
  out.rate_posterior = cov_post / m;
  out.binomial_se_mc = std::sqrt(out.rate_mc * (1.0 - out.rate_mc) / m);
  out.binomial_se_posterior = std::sqrt(out.rate_posterior * (1.0 - out.rate_posterior) / m);
  return out;
}

}  // namespace cbp::vario
