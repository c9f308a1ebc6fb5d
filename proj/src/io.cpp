#include "abps/io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace abps {

namespace {

constexpr double kPi = 3.141592653589793238462643;

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : out_(path), columns_(columns.size()) {
  if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
  out_ << "# schema=1\n";
  for (size_t i = 0; i < columns.size(); ++i)
    out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
}

std::string CsvWriter::format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) throw std::invalid_argument("CsvWriter: column count mismatch");
  for (size_t i = 0; i < values.size(); ++i)
    out_ << format(values[i]) << (i + 1 < values.size() ? "," : "\n");
}

void CsvWriter::row(const std::string& label, const std::vector<double>& values) {
  if (values.size() + 1 != columns_)
    throw std::invalid_argument("CsvWriter: column count mismatch");
  out_ << label;
  for (const double v : values) out_ << "," << format(v);
  out_ << "\n";
}

GridFunction parse_u0(const std::string& spec, int resolution) {
  size_t colon = spec.find(':');
  std::string kind = colon == std::string::npos ? spec : spec.substr(0, colon);
  std::vector<double> args =
      colon == std::string::npos ? std::vector<double>{} : parse_list(spec.substr(colon + 1));
  if (kind == "uniform") {
    double c = args.empty() ? 1.0 : args[0];
    return GridFunction::constant(c, resolution);
  }
  if (kind == "cosine") {
    double base = args.size() > 0 ? args[0] : 1.0;
    double amp = args.size() > 1 ? args[1] : 0.5;
    return GridFunction::sample(resolution,
                                [=](double x) { return base + amp * std::cos(kPi * x); });
  }
  if (kind == "linear") {
    double a = args.size() > 0 ? args[0] : 0.0;
    double b = args.size() > 1 ? args[1] : 2.0;
    return GridFunction::sample(resolution, [=](double x) { return a + b * x; });
  }
  throw std::invalid_argument("parse_u0: unknown profile '" + spec + "'");
}

void apply_config_line(SimConfig& config, const std::string& key, const std::string& value) {
  if (key == "N") config.N = std::stoi(value);
  else if (key == "T") config.T = std::stod(value);
  else if (key == "dt") config.dt = std::stod(value);
  else if (key == "lambda") config.lambda = std::stod(value);
  else if (key == "cutoff_radius") config.cutoff_radius = std::stod(value);
  else if (key == "seed") config.seed = std::stoull(value);
  else if (key == "annihilation") config.annihilation = (value == "1" || value == "true");
  else if (key == "record_times") config.record_times = parse_list(value);
  else if (key == "u0") config.u0 = parse_u0(value, config.u0.resolution);
  else if (key == "u0_resolution") {
    int res = std::stoi(value);
    config.u0 = GridFunction::constant(1.0, res);
  } else throw std::invalid_argument("config: unknown key '" + key + "'");
}

SimConfig read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_config: cannot open " + path);
  SimConfig config;
  std::string u0_spec;
  int u0_res = config.u0.resolution;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config: expected key=value: " + line);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "u0") u0_spec = value;
    else if (key == "u0_resolution") u0_res = std::stoi(value);
    else apply_config_line(config, key, value);
  }
  if (!u0_spec.empty()) config.u0 = parse_u0(u0_spec, u0_res);
  else if (u0_res != config.u0.resolution) config.u0 = GridFunction::constant(1.0, u0_res);
  return config;
}

}  // namespace abps
