#pragma once

#include "cbp/types.hpp"

#include <vector>

namespace cbp {

/// Sorted node coordinates along one grid dimension.
struct GridAxis {
  std::vector<double> nodes;

  static GridAxis linspace(double lo, double hi, int n);

  int size() const { return static_cast<int>(nodes.size()); }
  /// Trapezoid quadrature weight of node i.
  double weight(int i) const {
    const int m = size();
    if (i == 0) return 0.5 * (nodes[1] - nodes[0]);
    if (i == m - 1) return 0.5 * (nodes[m - 1] - nodes[m - 2]);
    return 0.5 * (nodes[i + 1] - nodes[i - 1]);
  }
};

/// Tabulated CB-posterior over a rectangular grid, kept in log domain.
/// After construction exp(log_density) integrates to 1 under the product
/// trapezoid rule.
class PosteriorGrid {
 public:
  PosteriorGrid(std::vector<GridAxis> axes, std::vector<double> log_unnorm,
                double log_norm_const);

  int dim() const { return static_cast<int>(axes_.size()); }
  std::size_t size() const { return log_density_.size(); }
  const std::vector<GridAxis>& axes() const { return axes_; }
  double log_norm_const() const { return log_norm_const_; }

  double log_density(std::size_t flat) const { return log_density_[flat]; }
  double density(std::size_t flat) const { return std::exp(log_density_[flat]); }

  /// Product of the per-axis trapezoid weights at a node.
  double node_weight(std::size_t flat) const;
  Vector node(std::size_t flat) const;
  std::vector<int> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::vector<int>& idx) const;

  std::size_t mode_index() const;
  /// Quadrature of the normalized density; 1 up to rounding by construction.
  double integral() const;

  /// Marginal density along one axis (the other axes integrated out).
  std::vector<double> marginal(int axis) const;
  /// Equal-tail interval of the axis-`axis` marginal at the given level,
  /// by linear interpolation of the marginal CDF.
  std::pair<double, double> marginal_interval(int axis, double level) const;

 private:
  std::vector<GridAxis> axes_;
  std::vector<double> log_density_;  // normalized: log p at each node
  std::vector<std::size_t> strides_;
  double log_norm_const_ = 0.0;
};

/// Tabulate the posterior density proportional to exp(-t U(x)) c(x) on the
/// grid. All evaluation happens in log space; the maximum is subtracted
/// before exponentiation; normalization uses the product trapezoid rule.
PosteriorGrid evaluate_cb_posterior(const ContrastProblem& problem, const Prior& prior,
                                    const std::vector<GridAxis>& axes);

}  // namespace cbp
