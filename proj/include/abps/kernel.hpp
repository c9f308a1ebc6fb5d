#pragma once

#include <vector>

#include "abps/grid.hpp"

namespace abps {

// Configuration of the Neumann heat-kernel evaluator for the generator
// (1/2)Laplacian on [0,1]. Short times use the method of images, long times
// the cosine spectral series; crossover_time selects between them.
struct KernelParams {
  int image_terms = 8;
  int spectral_terms = 400;
  double crossover_time = 0.1;

  void validate() const;
};

// Transition density p(t,x,y) of reflected Brownian motion on [0,1].
// Throws std::domain_error for t <= 0 or x,y outside [0,1].
double eval_kernel(double t, double x, double y, const KernelParams& params = {});

// Force a specific evaluation method (both converge on their overlap).
double eval_kernel_images(double t, double x, double y, int image_terms);
double eval_kernel_spectral(double t, double x, double y, int spectral_terms);

// Exact integral of p(t,x,.) over [a,b] (erf per image, or termwise for the
// spectral series). Used where the kernel is far narrower than a grid cell.
double kernel_cell_integral(double t, double x, double a, double b,
                            const KernelParams& params = {});

// Quadrature form of P_t on a fixed uniform grid: row i holds
// p(t,x_i,y_j) * w_j with trapezoid weights w. Built once, applied many times.
class SemigroupOperator {
 public:
  SemigroupOperator(double t, int resolution, const KernelParams& params = {},
                    bool force_images = false);

  // dim-1: matrix-vector product. dim-2: tensor kernel p(t,x1,y1)p(t,x2,y2)
  // applied along both axes.
  GridFunction apply(const GridFunction& f) const;
  void apply_raw(const double* in, double* out) const;  // dim-1, length = resolution

  double time() const { return t_; }
  int resolution() const { return resolution_; }

 private:
  double t_;
  int resolution_;
  std::vector<double> a_;  // row-major resolution x resolution
};

// (P_t f) by composite trapezoid on f's own grid; t = 0 returns f unchanged.
// Throws std::domain_error for t < 0.
GridFunction apply_semigroup(double t, const GridFunction& f, const KernelParams& params = {});

}  // namespace abps
