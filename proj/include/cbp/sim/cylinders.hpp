#pragma once

#include "cbp/rng.hpp"
#include "cbp/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace cbp::sim {

/// Observation window [0,width] x [0,height] in mm.
struct Rect {
  double width = 0.0;
  double height = 0.0;
  double area() const { return width * height; }
};

/// Marked Poisson cylinder process: centers in the buffered window, radii
/// exponential with rate beta. The buffer absorbs cylinders outside the
/// window that still reach into it.
struct CylinderProcess {
  std::vector<double> cx, cy, radius;
  Rect window;
  double buffer = 0.0;

  std::size_t size() const { return radius.size(); }
};

/// Buffer width: the 99.99% quantile of the radius law.
inline double cylinder_buffer(double beta) { return -std::log(1e-4) / beta; }

/// Expected cylinder count on the buffered window.
inline double expected_cylinder_count(const Rect& window, double alpha, double beta) {
  const double b = cylinder_buffer(beta);
  return alpha / beta * (window.width + 2.0 * b) * (window.height + 2.0 * b);
}

/// Stream the cylinders of one realization to `emit(cx, cy, r)` without
/// materializing them; the draw order is fixed so materialized and streamed
/// realizations of the same seed coincide.
template <class Emit>
void generate_cylinders(const Rect& window, double alpha, double beta, std::uint64_t seed,
                        Emit&& emit) {
  if (!(beta > 0.0)) throw Error("generate_cylinders: beta must be positive");
  if (alpha < 0.0) throw Error("generate_cylinders: alpha must be nonnegative");
  const double mean = expected_cylinder_count(window, alpha, beta);
  if (mean > 1e7) throw Error("generate_cylinders: expected count exceeds 1e7, refusing");
  const double b = cylinder_buffer(beta);
  std::mt19937_64 eng(seed);
  const std::uint64_t count = poisson_sample(eng, mean);
  for (std::uint64_t k = 0; k < count; ++k) {
    const double x = -b + (window.width + 2.0 * b) * uniform01(eng);
    const double y = -b + (window.height + 2.0 * b) * uniform01(eng);
    const double r = exponential_sample(eng, beta);
    emit(x, y, r);
  }
}

CylinderProcess simulate_cylinder_surface(const Rect& window, double alpha, double beta,
                                          std::uint64_t seed);

/// Y at each query point: sum of the radii of the cylinders covering it.
std::vector<double> evaluate_surface(const CylinderProcess& process,
                                     const std::vector<std::pair<double, double>>& points);

/// Heights sampled along horizontal transects.
struct SurfaceSample {
  std::vector<std::vector<double>> transects;  // heights in mm
  double spacing = 0.0;                        // mm between samples
  double nu_a = 0.0;                           // total sampled length, mm
};

struct TransectDesign {
  int count = 12;
  double length_mm = 1180.0;
  double spacing_mm = 2.0;
};

/// Horizontal transects at independent uniform placements inside the window.
SurfaceSample sample_transects(const CylinderProcess& process, int count, double length_mm,
                               double spacing_mm, std::uint64_t seed);

/// Fresh surface + transect sample in one streaming pass; equals
/// simulate_cylinder_surface(derive_seed(seed,0)) followed by
/// sample_transects(derive_seed(seed,1)).
SurfaceSample simulate_transect_sample(const Rect& window, double alpha, double beta,
                                       const TransectDesign& design, std::uint64_t seed);

}  // namespace cbp::sim
