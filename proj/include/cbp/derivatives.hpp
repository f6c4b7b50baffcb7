#pragma once

#include "cbp/types.hpp"

namespace cbp {

struct FdOptions {
  double rel = 1e-5;    // relative step per coordinate
  double floor = 1e-7;  // absolute step floor
};

/// Central-difference gradient of the contrast at `at`.
Vector finite_difference_gradient(const ContrastProblem& problem, const Vector& at,
                                  const FdOptions& opts = {});

/// Central-difference Hessian, symmetrized.
Matrix finite_difference_hessian(const ContrastProblem& problem, const Vector& at,
                                 const FdOptions& opts = {});

/// Analytic gradient/Hessian when the problem ships one, finite differences
/// otherwise.
Vector gradient_of(const ContrastProblem& problem, const Vector& at, const FdOptions& opts = {});
Matrix hessian_of(const ContrastProblem& problem, const Vector& at, const FdOptions& opts = {});

}  // namespace cbp
