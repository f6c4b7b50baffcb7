#include "cbp/sim/cylinders.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cbp::sim {

namespace {

struct TransectLayout {
  std::vector<double> x0;  // left end of each transect
  std::vector<double> y;
  int points_per_transect = 0;
  double spacing = 0.0;
};

TransectLayout place_transects(const Rect& window, int count, double length_mm,
                               double spacing_mm, std::uint64_t seed) {
  if (count < 1) throw Error("sample_transects: count must be >= 1");
  if (!(spacing_mm > 0.0) || !(length_mm >= spacing_mm))
    throw Error("sample_transects: invalid length/spacing");
  if (length_mm > window.width)
    throw Error("sample_transects: window too small for the transect length");
  TransectLayout layout;
  layout.spacing = spacing_mm;
  layout.points_per_transect = static_cast<int>(std::floor(length_mm / spacing_mm)) + 1;
  std::mt19937_64 eng(seed);
  layout.x0.resize(count);
  layout.y.resize(count);
  for (int k = 0; k < count; ++k) {
    layout.x0[k] = (window.width - length_mm) * uniform01(eng);
    layout.y[k] = window.height * uniform01(eng);
  }
  return layout;
}

// Add cylinder (cx, cy, r) onto every covered sample point.
void rasterize_cylinder(const TransectLayout& layout, std::vector<std::vector<double>>& heights,
                        double cx, double cy, double r) {
  const int np = layout.points_per_transect;
  for (std::size_t k = 0; k < layout.y.size(); ++k) {
    const double dy = layout.y[k] - cy;
    if (std::abs(dy) >= r) continue;
    const double half = std::sqrt(r * r - dy * dy);
    const double sp = layout.spacing;
    int ilo = static_cast<int>(std::ceil((cx - half - layout.x0[k]) / sp));
    int ihi = static_cast<int>(std::floor((cx + half - layout.x0[k]) / sp));
    ilo = std::max(ilo, 0);
    ihi = std::min(ihi, np - 1);
    const double r2 = r * r;
    for (int i = ilo; i <= ihi; ++i) {
      const double dx = layout.x0[k] + sp * i - cx;
      if (dx * dx + dy * dy < r2) heights[k][i] += r;
    }
  }
}

SurfaceSample finish_sample(const TransectLayout& layout,
                            std::vector<std::vector<double>>&& heights) {
  SurfaceSample s;
  s.transects = std::move(heights);
  s.spacing = layout.spacing;
  s.nu_a = 0.0;
  for (const auto& t : s.transects) s.nu_a += (static_cast<double>(t.size()) - 1.0) * layout.spacing;
  return s;
}

}  // namespace

CylinderProcess simulate_cylinder_surface(const Rect& window, double alpha, double beta,
                                          std::uint64_t seed) {
  if (!(beta > 0.0)) throw Error("simulate_cylinder_surface: beta must be positive");
  if (alpha < 0.0) throw Error("simulate_cylinder_surface: alpha must be nonnegative");
  CylinderProcess p;
  p.window = window;
  p.buffer = cylinder_buffer(beta);
  const double mean = expected_cylinder_count(window, alpha, beta);
  p.cx.reserve(static_cast<std::size_t>(mean * 1.05) + 16);
  p.cy.reserve(p.cx.capacity());
  p.radius.reserve(p.cx.capacity());
  generate_cylinders(window, alpha, beta, seed, [&](double x, double y, double r) {
    p.cx.push_back(x);
    p.cy.push_back(y);
    p.radius.push_back(r);
  });
  return p;
}

std::vector<double> evaluate_surface(const CylinderProcess& process,
                                     const std::vector<std::pair<double, double>>& points) {
  for (const auto& [px, py] : points)
    if (px < 0.0 || px > process.window.width || py < 0.0 || py > process.window.height)
      throw Error("evaluate_surface: query point outside the window");

  // Sweep cylinders sorted by center x so each query only scans a band.
  std::vector<std::size_t> order(process.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return process.cx[a] < process.cx[b]; });
  double rmax = 0.0;
  for (double r : process.radius) rmax = std::max(rmax, r);

  std::vector<double> out(points.size(), 0.0);
  for (std::size_t q = 0; q < points.size(); ++q) {
    const double px = points[q].first, py = points[q].second;
    auto lo = std::lower_bound(order.begin(), order.end(), px - rmax,
                               [&](std::size_t i, double v) { return process.cx[i] < v; });
    for (auto it = lo; it != order.end(); ++it) {
      const std::size_t i = *it;
      if (process.cx[i] > px + rmax) break;
      const double dx = process.cx[i] - px;
      const double dy = process.cy[i] - py;
      const double r = process.radius[i];
      if (dx * dx + dy * dy < r * r) out[q] += r;
    }
  }
  return out;
}

SurfaceSample sample_transects(const CylinderProcess& process, int count, double length_mm,
                               double spacing_mm, std::uint64_t seed) {
  const TransectLayout layout = place_transects(process.window, count, length_mm, spacing_mm, seed);
  std::vector<std::vector<double>> heights(
      count, std::vector<double>(layout.points_per_transect, 0.0));
  for (std::size_t i = 0; i < process.size(); ++i)
    rasterize_cylinder(layout, heights, process.cx[i], process.cy[i], process.radius[i]);
  return finish_sample(layout, std::move(heights));
}

SurfaceSample simulate_transect_sample(const Rect& window, double alpha, double beta,
                                       const TransectDesign& design, std::uint64_t seed) {
  const TransectLayout layout = place_transects(window, design.count, design.length_mm,
                                                design.spacing_mm, derive_seed(seed, 1));
  std::vector<std::vector<double>> heights(
      design.count, std::vector<double>(layout.points_per_transect, 0.0));
  generate_cylinders(window, alpha, beta, derive_seed(seed, 0),
                     [&](double x, double y, double r) { rasterize_cylinder(layout, heights, x, y, r); });
  return finish_sample(layout, std::move(heights));
}

}  // namespace cbp::sim
