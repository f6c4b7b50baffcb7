#pragma once

#include "cbp/grid.hpp"
#include "cbp/sim/cylinders.hpp"
#include "cbp/sim/grf.hpp"
#include "cbp/types.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cbp::io {

inline constexpr const char* kVersion = "0.1.0";

/// What every output embeds: version, the (execution-flag-free) command,
/// its canonical parameter list, and the master seed.
struct Provenance {
  std::string command;                                      // e.g. "simulate grf"
  std::vector<std::pair<std::string, std::string>> params;  // canonical order
  std::uint64_t seed = 0;

  std::string canonical() const;
  std::uint64_t config_hash() const;  // FNV-1a of the canonical form
};

/// Write via a temp file in the same directory, then rename.
void atomic_write_text(const std::string& path, const std::string& content);

std::string format_double(double v);  // round-trip precision

// Square fields: headerless CSV, n rows by n columns.
void write_field_csv(const std::string& path, const sim::LatticeField& field, bool binary);
sim::LatticeField read_field_csv(const std::string& path);

/// Sidecar metadata file (field CSVs themselves stay headerless).
void write_meta(const std::string& path, const Provenance& prov);

/// Transect sample: one height column per file plus a JSON manifest naming
/// the files and the sampling step.
void write_transect_sample(const std::string& dir, const sim::SurfaceSample& sample,
                           const Provenance& prov);

/// Posterior grid as CSV: one coordinate column per axis plus the density.
void write_posterior_csv(const std::string& path, const PosteriorGrid& grid,
                         const std::vector<std::string>& axis_names);

/// Marginal density of one axis as CSV.
void write_marginal_csv(const std::string& path, const PosteriorGrid& grid, int axis,
                        const std::string& axis_name);

}  // namespace cbp::io
