#include "cbp/sim/gibbs.hpp"

#include "cbp/rng.hpp"

#include <cmath>

namespace cbp::sim {

LatticeField simulate_markov_field(int n, double theta1, double theta2, int sweeps,
                                   std::uint64_t seed) {
  if (n < 1) throw Error("simulate_markov_field: n must be >= 1");
  if (std::abs(theta2) > 1.0)
    throw Error("simulate_markov_field: |theta2| <= 1 required for the mixing regime");
  if (sweeps < 1) throw Error("simulate_markov_field: sweeps must be >= 1");

  std::mt19937_64 eng(seed);
  LatticeField field;
  field.n = n;
  field.spacing = 1.0;
  field.values.resize(static_cast<std::size_t>(n) * n);
  for (auto& v : field.values) v = uniform01(eng) < 0.5 ? 0.0 : 1.0;

  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        if (i > 0) s += field.at(i - 1, j);
        if (i + 1 < n) s += field.at(i + 1, j);
        if (j > 0) s += field.at(i, j - 1);
        if (j + 1 < n) s += field.at(i, j + 1);
        const double z = theta1 + theta2 * s;
        // p = logistic(z), evaluated without overflow
        const double p = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                                  : std::exp(z) / (1.0 + std::exp(z));
        field.at(i, j) = uniform01(eng) < p ? 1.0 : 0.0;
      }
    }
  }
  return field;
}

}  // namespace cbp::sim
