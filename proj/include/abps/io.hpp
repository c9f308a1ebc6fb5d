#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "abps/particles.hpp"

namespace abps {

// CSV with a versioned header comment. Numbers are written with 17 significant
// digits so re-runs with the same seed are byte-identical.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns);

  void row(const std::vector<double>& values);
  void row(const std::string& label, const std::vector<double>& values);

  static std::string format(double v);

 private:
  std::ofstream out_;
  size_t columns_;
};

// Flat key=value config files. Recognized keys: N, T, dt, lambda,
// cutoff_radius, seed, annihilation, record_times (comma list),
// u0 (uniform:c | cosine:base,amp | linear:a,b), u0_resolution.
SimConfig read_config(const std::string& path);
void apply_config_line(SimConfig& config, const std::string& key, const std::string& value);
GridFunction parse_u0(const std::string& spec, int resolution);

}  // namespace abps
