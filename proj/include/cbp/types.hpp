#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cbp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base error for all failures raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A point in the parameter space (p >= 1, finite coordinates).
struct ParamPoint {
  Vector coords;

  ParamPoint() = default;
  explicit ParamPoint(Vector c) : coords(std::move(c)) { validate(); }
  ParamPoint(std::initializer_list<double> c)
      : coords(Eigen::Map<const Vector>(c.begin(), static_cast<Eigen::Index>(c.size()))) {
    validate();
  }

  int dim() const { return static_cast<int>(coords.size()); }
  double operator[](int i) const { return coords[i]; }
  double& operator[](int i) { return coords[i]; }

  void validate() const {
    if (coords.size() < 1) throw Error("ParamPoint: dimension must be >= 1");
    if (!coords.allFinite()) throw Error("ParamPoint: non-finite coordinate");
  }
};

/// Hyper-rectangle {x : lower <= x <= upper}, lower < upper componentwise.
struct ParamBox {
  Vector lower;
  Vector upper;

  ParamBox() = default;
  ParamBox(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size() || lower.size() < 1)
      throw Error("ParamBox: bounds must have the same dimension >= 1");
    for (int i = 0; i < lower.size(); ++i)
      if (!(lower[i] < upper[i])) throw Error("ParamBox: lower[i] < upper[i] required");
  }
  ParamBox(std::initializer_list<double> lo, std::initializer_list<double> hi)
      : ParamBox(Eigen::Map<const Vector>(lo.begin(), static_cast<Eigen::Index>(lo.size())),
                 Eigen::Map<const Vector>(hi.begin(), static_cast<Eigen::Index>(hi.size()))) {}

  int dim() const { return static_cast<int>(lower.size()); }
  double width(int i) const { return upper[i] - lower[i]; }
  double volume() const { return (upper - lower).prod(); }

  bool contains(const Vector& x) const {
    if (x.size() != lower.size()) return false;
    for (int i = 0; i < x.size(); ++i)
      if (x[i] < lower[i] || x[i] > upper[i]) return false;
    return true;
  }
  bool strictly_contains(const Vector& x) const {
    if (x.size() != lower.size()) return false;
    for (int i = 0; i < x.size(); ++i)
      if (x[i] <= lower[i] || x[i] >= upper[i]) return false;
    return true;
  }
  /// Clamp a point into the interior, `margin` is a fraction of each width.
  Vector clamp_interior(Vector x, double margin = 1e-12) const {
    for (int i = 0; i < x.size(); ++i) {
      const double m = margin * width(i);
      x[i] = std::min(std::max(x[i], lower[i] + m), upper[i] - m);
    }
    return x;
  }
};

/// Prior over the parameter space: unnormalized log density plus its support.
struct Prior {
  std::function<double(const Vector&)> log_density;
  ParamBox support;

  /// Uniform prior; log density is -log(volume) so densities stay comparable.
  static Prior uniform(ParamBox box) {
    const double logv = std::log(box.volume());
    return Prior{[logv](const Vector&) { return -logv; }, std::move(box)};
  }

  /// Independent Gaussian prior restricted to `box` (unnormalized on the box).
  static Prior gaussian(Vector mean, Vector sigma, ParamBox box) {
    return Prior{[mean = std::move(mean), sigma = std::move(sigma)](const Vector& x) {
                   double s = 0.0;
                   for (int i = 0; i < x.size(); ++i) {
                     const double z = (x[i] - mean[i]) / sigma[i];
                     s -= 0.5 * z * z + std::log(sigma[i]);
                   }
                   return s;
                 },
                 std::move(box)};
  }
};

/// A contrast U_t with its normalization t, optional analytic derivatives,
/// and an optional hook that rebuilds the contrast from fresh synthetic data.
/// `value` must be safe to call concurrently; +infinity marks excluded points.
struct ContrastProblem {
  double t = 0.0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;  // may be empty
  std::function<Matrix(const Vector&)> hessian;   // may be empty
  std::function<ContrastProblem(const Vector&, std::uint64_t)> resimulate;  // may be empty
};

/// Gaussian approximation N(mean, covariance) of the estimator's law.
struct LimitDistribution {
  Vector mean;
  Matrix covariance;
};

}  // namespace cbp
