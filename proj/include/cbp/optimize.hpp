#pragma once

#include "cbp/types.hpp"

namespace cbp {

struct MapOptions {
  int grid_nodes = 51;      // coarse scan nodes per axis
  double coord_tol = 1e-6;  // refinement tolerance on parameter coordinates
  int max_iter = 1000;
};

/// Maximum a posteriori point for exp(-t U) c, i.e. the minimizer of
/// U(x) - (1/t) log c(x) over the box.
struct MapEstimate {
  Vector point;
  double objective = 0.0;  // U - (1/t) log c at the point
  bool refined = false;
  bool boundary_warning = false;  // minimum sits on (or hugs) the box edge
};

/// Coarse grid scan followed by derivative-free refinement (Brent for p = 1,
/// Nelder-Mead for p >= 2). The result is clamped to the box interior; if the
/// unclamped minimizer sits on the boundary a warning flag is raised.
MapEstimate map_estimate(const ContrastProblem& problem, const Prior& prior,
                         const ParamBox& box, const MapOptions& opts = {});

/// Same search applied to the bare contrast (no prior penalty).
MapEstimate minimize_contrast(const ContrastProblem& problem, const ParamBox& box,
                              const MapOptions& opts = {});

}  // namespace cbp
