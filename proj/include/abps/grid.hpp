#pragma once

#include <functional>
#include <vector>

namespace abps {

// Real-valued function sampled on the uniform grid {i/(res-1) : 0 <= i < res}
// of [0,1], or on the tensor grid of [0,1]^2 for dim == 2.
struct GridFunction {
  int dim = 1;
  int resolution = 2;
  std::vector<double> values;

  static GridFunction constant(double c, int resolution, int dim = 1);
  static GridFunction sample(int resolution, const std::function<double(double)>& f);
  static GridFunction sample2(int resolution, const std::function<double(double, double)>& f);

  double spacing() const { return 1.0 / (resolution - 1); }
  double node(int i) const { return static_cast<double>(i) / (resolution - 1); }

  double& at(int i) { return values[static_cast<size_t>(i)]; }
  double at(int i) const { return values[static_cast<size_t>(i)]; }
  double& at(int i, int j) { return values[static_cast<size_t>(i) * resolution + j]; }
  double at(int i, int j) const { return values[static_cast<size_t>(i) * resolution + j]; }

  // Piecewise-linear evaluation, dim-1 only. x is clamped to [0,1].
  double interpolate(double x) const;

  // Composite trapezoid over [0,1]^dim.
  double integral() const;

  double max_abs() const;
  double min_value() const;

  // Size consistency and finiteness. Throws std::invalid_argument.
  void validate() const;
};

// Trapezoid weights on the uniform grid: h everywhere, h/2 at the endpoints.
std::vector<double> trapezoid_weights(int resolution);

}  // namespace abps
