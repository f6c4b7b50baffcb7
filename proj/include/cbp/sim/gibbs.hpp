#pragma once

#include "cbp/sim/grf.hpp"

#include <cstdint>

namespace cbp::sim {

/// Two-state nearest-neighbor field sampled by a systematic-scan Gibbs
/// sweep with free boundary (edge sites see their existing neighbors only).
/// `sweeps` is the burn-in; one field is returned per chain.
LatticeField simulate_markov_field(int n, double theta1, double theta2, int sweeps,
                                   std::uint64_t seed);

constexpr int kDefaultGibbsSweeps = 500;

}  // namespace cbp::sim
