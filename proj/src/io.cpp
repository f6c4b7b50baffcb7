#include "cbp/io.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cbp::io {

namespace fs = std::filesystem;

std::string Provenance::canonical() const {
  std::ostringstream os;
  os << command;
  for (const auto& [k, v] : params) os << " --" << k << "=" << v;
  os << " --seed=" << seed;
  return os.str();
}

std::uint64_t Provenance::config_hash() const {
  const std::string s = canonical();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

void atomic_write_text(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("atomic_write_text: cannot open " + tmp.string());
    out << content;
    if (!out) throw Error("atomic_write_text: write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_field_csv(const std::string& path, const sim::LatticeField& field, bool binary) {
  std::ostringstream os;
  for (int i = 0; i < field.n; ++i) {
    for (int j = 0; j < field.n; ++j) {
      if (j) os << ',';
      if (binary)
        os << static_cast<int>(field.at(i, j));
      else
        os << format_double(field.at(i, j));
    }
    os << '\n';
  }
  atomic_write_text(path, os.str());
}

sim::LatticeField read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("read_field_csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0) {
        std::ostringstream os;
        os << "read_field_csv: bad cell '" << cell << "' at " << path << ":" << lineno;
        throw Error(os.str());
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error("read_field_csv: empty file " + path);
  const std::size_t n = rows.size();
  for (const auto& r : rows)
    if (r.size() != n) throw Error("read_field_csv: field is not square in " + path);
  sim::LatticeField field;
  field.n = static_cast<int>(n);
  field.spacing = 1.0;
  field.values.reserve(n * n);
  for (const auto& r : rows) field.values.insert(field.values.end(), r.begin(), r.end());
  return field;
}

void write_meta(const std::string& path, const Provenance& prov) {
  nlohmann::ordered_json j;
  j["version"] = kVersion;
  j["command"] = prov.canonical();
  j["master_seed"] = prov.seed;
  j["config_hash"] = prov.config_hash();
  atomic_write_text(path, j.dump(2) + "\n");
}

void write_transect_sample(const std::string& dir, const sim::SurfaceSample& sample,
                           const Provenance& prov) {
  fs::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["version"] = kVersion;
  manifest["command"] = prov.canonical();
  manifest["master_seed"] = prov.seed;
  manifest["config_hash"] = prov.config_hash();
  manifest["spacing_mm"] = sample.spacing;
  std::vector<std::string> names;
  for (std::size_t k = 0; k < sample.transects.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "transect_%02zu.txt", k);
    names.emplace_back(name);
    std::ostringstream os;
    for (double h : sample.transects[k]) os << format_double(h) << '\n';
    atomic_write_text((fs::path(dir) / name).string(), os.str());
  }
  manifest["files"] = names;
  atomic_write_text((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

void write_posterior_csv(const std::string& path, const PosteriorGrid& grid,
                         const std::vector<std::string>& axis_names) {
  std::ostringstream os;
  for (const auto& name : axis_names) os << name << ',';
  os << "density\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vector x = grid.node(i);
    for (int d = 0; d < grid.dim(); ++d) os << format_double(x[d]) << ',';
    os << format_double(grid.density(i)) << '\n';
  }
  atomic_write_text(path, os.str());
}

void write_marginal_csv(const std::string& path, const PosteriorGrid& grid, int axis,
                        const std::string& axis_name) {
  const std::vector<double> dens = grid.marginal(axis);
  std::ostringstream os;
  os << axis_name << ",density\n";
  for (int i = 0; i < grid.axes()[axis].size(); ++i)
    os << format_double(grid.axes()[axis].nodes[i]) << ',' << format_double(dens[i]) << '\n';
  atomic_write_text(path, os.str());
}

}  // namespace cbp::io
