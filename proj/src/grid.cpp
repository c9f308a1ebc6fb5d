#include "abps/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace abps {

GridFunction GridFunction::constant(double c, int resolution, int dim) {
  GridFunction g;
  g.dim = dim;
  g.resolution = resolution;
  size_t n = static_cast<size_t>(resolution);
  g.values.assign(dim == 2 ? n * n : n, c);
  g.validate();
  return g;
}

GridFunction GridFunction::sample(int resolution, const std::function<double(double)>& f) {
  GridFunction g;
  g.resolution = resolution;
  g.values.resize(static_cast<size_t>(resolution));
  for (int i = 0; i < resolution; ++i) g.values[i] = f(g.node(i));
  g.validate();
  return g;
}

GridFunction GridFunction::sample2(int resolution,
                                   const std::function<double(double, double)>& f) {
  GridFunction g;
  g.dim = 2;
  g.resolution = resolution;
  g.values.resize(static_cast<size_t>(resolution) * resolution);
  for (int i = 0; i < resolution; ++i)
    for (int j = 0; j < resolution; ++j) g.at(i, j) = f(g.node(i), g.node(j));
  g.validate();
  return g;
}

double GridFunction::interpolate(double x) const {
  if (dim != 1) throw std::invalid_argument("interpolate: dim-1 only");
  x = std::clamp(x, 0.0, 1.0);
  double s = x * (resolution - 1);
  int i = std::min(static_cast<int>(s), resolution - 2);
  double w = s - i;
  return (1.0 - w) * values[i] + w * values[i + 1];
}

double GridFunction::integral() const {
  const auto w = trapezoid_weights(resolution);
  if (dim == 1) {
    double s = 0;
    for (int i = 0; i < resolution; ++i) s += w[i] * values[i];
    return s;
  }
  double s = 0;
  for (int i = 0; i < resolution; ++i)
    for (int j = 0; j < resolution; ++j) s += w[i] * w[j] * at(i, j);
  return s;
}

double GridFunction::max_abs() const {
  double m = 0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double GridFunction::min_value() const {
  double m = values.empty() ? 0.0 : values[0];
  for (double v : values) m = std::min(m, v);
  return m;
}

void GridFunction::validate() const {
  if (dim != 1 && dim != 2) throw std::invalid_argument("GridFunction: dim must be 1 or 2");
  if (resolution < 2) throw std::invalid_argument("GridFunction: resolution must be >= 2");
  size_t expect = static_cast<size_t>(resolution);
  if (dim == 2) expect *= resolution;
  if (values.size() != expect) throw std::invalid_argument("GridFunction: value count mismatch");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("GridFunction: non-finite value");
}

std::vector<double> trapezoid_weights(int resolution) {
  double h = 1.0 / (resolution - 1);
  std::vector<double> w(resolution, h);
  w.front() = w.back() = 0.5 * h;
  return w;
}

}  // namespace abps
