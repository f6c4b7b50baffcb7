#include "cbp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cbp {

GridAxis GridAxis::linspace(double lo, double hi, int n) {
  if (n < 2 || !(lo < hi)) throw Error("GridAxis::linspace: need n >= 2 and lo < hi");
  GridAxis ax;
  ax.nodes.resize(n);
  const double step = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) ax.nodes[i] = lo + step * i;
  ax.nodes.back() = hi;
  return ax;
}

PosteriorGrid::PosteriorGrid(std::vector<GridAxis> axes, std::vector<double> log_unnorm,
                             double log_norm_const)
    : axes_(std::move(axes)), log_density_(std::move(log_unnorm)),
      log_norm_const_(log_norm_const) {
  strides_.resize(axes_.size());
  std::size_t s = 1;
  for (int d = static_cast<int>(axes_.size()) - 1; d >= 0; --d) {
    strides_[d] = s;
    s *= static_cast<std::size_t>(axes_[d].size());
  }
  if (s != log_density_.size()) throw Error("PosteriorGrid: value count does not match axes");
  for (double& v : log_density_) v -= log_norm_const_;
}

std::vector<int> PosteriorGrid::unflatten(std::size_t flat) const {
  std::vector<int> idx(axes_.size());
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    idx[d] = static_cast<int>(flat / strides_[d]);
    flat %= strides_[d];
  }
  return idx;
}

std::size_t PosteriorGrid::flatten(const std::vector<int>& idx) const {
  std::size_t flat = 0;
  for (std::size_t d = 0; d < axes_.size(); ++d) flat += strides_[d] * idx[d];
  return flat;
}

double PosteriorGrid::node_weight(std::size_t flat) const {
  double w = 1.0;
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    const int i = static_cast<int>(flat / strides_[d]);
    flat %= strides_[d];
    w *= axes_[d].weight(i);
  }
  return w;
}

Vector PosteriorGrid::node(std::size_t flat) const {
  Vector x(dim());
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    const int i = static_cast<int>(flat / strides_[d]);
    flat %= strides_[d];
    x[d] = axes_[d].nodes[i];
  }
  return x;
}

std::size_t PosteriorGrid::mode_index() const {
  return static_cast<std::size_t>(
      std::max_element(log_density_.begin(), log_density_.end()) - log_density_.begin());
}

double PosteriorGrid::integral() const {
  double s = 0.0;
  for (std::size_t i = 0; i < log_density_.size(); ++i) s += node_weight(i) * density(i);
  return s;
}

std::vector<double> PosteriorGrid::marginal(int axis) const {
  const int m = axes_[axis].size();
  std::vector<double> out(m, 0.0);
  for (std::size_t flat = 0; flat < log_density_.size(); ++flat) {
    double w = 1.0;
    std::size_t rest = flat;
    int node_on_axis = 0;
    for (std::size_t d = 0; d < axes_.size(); ++d) {
      const int i = static_cast<int>(rest / strides_[d]);
      rest %= strides_[d];
      if (static_cast<int>(d) == axis)
        node_on_axis = i;
      else
        w *= axes_[d].weight(i);
    }
    out[node_on_axis] += w * density(flat);
  }
  return out;
}

std::pair<double, double> PosteriorGrid::marginal_interval(int axis, double level) const {
  if (!(level > 0.0 && level < 1.0)) throw Error("marginal_interval: level must lie in (0,1)");
  const auto& ax = axes_[axis];
  const std::vector<double> dens = marginal(axis);
  const int m = ax.size();
  // CDF at the nodes by trapezoid accumulation.
  std::vector<double> cdf(m, 0.0);
  for (int i = 1; i < m; ++i)
    cdf[i] = cdf[i - 1] + 0.5 * (dens[i] + dens[i - 1]) * (ax.nodes[i] - ax.nodes[i - 1]);
  const double total = cdf.back();
  if (!(total > 0.0)) throw Error("marginal_interval: marginal has no mass");
  auto invert = [&](double q) {
    const double target = q * total;
    for (int i = 1; i < m; ++i) {
      if (cdf[i] >= target) {
        const double span = cdf[i] - cdf[i - 1];
        const double f = span > 0.0 ? (target - cdf[i - 1]) / span : 0.0;
        return ax.nodes[i - 1] + f * (ax.nodes[i] - ax.nodes[i - 1]);
      }
    }
    return ax.nodes[m - 1];
  };
  const double tail = 0.5 * (1.0 - level);
  return {invert(tail), invert(1.0 - tail)};
}

PosteriorGrid evaluate_cb_posterior(const ContrastProblem& problem, const Prior& prior,
                                    const std::vector<GridAxis>& axes) {
  if (axes.empty()) throw Error("evaluate_cb_posterior: no axes");
  if (static_cast<int>(axes.size()) != prior.support.dim())
    throw Error("evaluate_cb_posterior: grid dimension does not match the prior support");
  std::size_t total = 1;
  for (std::size_t d = 0; d < axes.size(); ++d) {
    const auto& ax = axes[d];
    if (ax.size() < 3) throw Error("evaluate_cb_posterior: every axis needs >= 3 nodes");
    for (int i = 1; i < ax.size(); ++i)
      if (!(ax.nodes[i] > ax.nodes[i - 1]))
        throw Error("evaluate_cb_posterior: axis nodes must be strictly increasing");
    if (ax.nodes.front() < prior.support.lower[d] || ax.nodes.back() > prior.support.upper[d])
      throw Error("evaluate_cb_posterior: grid extends outside the prior support");
    total *= static_cast<std::size_t>(ax.size());
  }

  const int p = static_cast<int>(axes.size());
  std::vector<double> logv(total);
  std::vector<double> weights(total);
  Vector x(p);
  std::vector<int> idx(p, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    double w = 1.0;
    for (int d = 0; d < p; ++d) {
      x[d] = axes[d].nodes[idx[d]];
      w *= axes[d].weight(idx[d]);
    }
    const double u = problem.value(x);
    if (std::isnan(u) || u == -std::numeric_limits<double>::infinity()) {
      std::ostringstream os;
      os << "evaluate_cb_posterior: contrast returned " << u << " at (";
      for (int d = 0; d < p; ++d) os << (d ? ", " : "") << x[d];
      os << ")";
      throw Error(os.str());
    }
    logv[flat] = std::isinf(u) ? -std::numeric_limits<double>::infinity()
                               : -problem.t * u + prior.log_density(x);
    weights[flat] = w;
    for (int d = p - 1; d >= 0; --d) {
      if (++idx[d] < axes[d].size()) break;
      idx[d] = 0;
    }
  }

  const double mx = *std::max_element(logv.begin(), logv.end());
  if (std::isinf(mx))
    throw Error("evaluate_cb_posterior: empty posterior (contrast is +inf on the whole grid)");
  double z = 0.0;
  for (std::size_t i = 0; i < total; ++i) z += weights[i] * std::exp(logv[i] - mx);
  return PosteriorGrid(axes, std::move(logv), mx + std::log(z));
}

}  // namespace cbp
