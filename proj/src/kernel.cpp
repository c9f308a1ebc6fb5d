#include "abps/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace abps {

namespace {

constexpr double kPi = 3.141592653589793238462643;

double gauss_pdf(double d, double t) {
  double q = d * d / (2.0 * t);
  if (q > 745.0) return 0.0;
  return std::exp(-q) / std::sqrt(2.0 * kPi * t);
}

// Standard normal CDF.
double Phi(double z) { return 0.5 * std::erfc(-z * 0.7071067811865475244); }

void check_domain(double t, double x, double y) {
  if (!(t > 0)) throw std::domain_error("eval_kernel: t must be positive");
  if (x < 0 || x > 1 || y < 0 || y > 1)
    throw std::domain_error("eval_kernel: x,y must lie in [0,1]");
}

}  // namespace

void KernelParams::validate() const {
  if (image_terms < 1) throw std::invalid_argument("KernelParams: image_terms >= 1");
  if (spectral_terms < 1) throw std::invalid_argument("KernelParams: spectral_terms >= 1");
  if (!(crossover_time > 0)) throw std::invalid_argument("KernelParams: crossover_time > 0");
}

double eval_kernel_images(double t, double x, double y, int image_terms) {
  double s = 0;
  for (int n = -image_terms; n <= image_terms; ++n) {
    s += gauss_pdf(x - y - 2.0 * n, t);
    s += gauss_pdf(x + y - 2.0 * n, t);
  }
  return s;
}

double eval_kernel_spectral(double t, double x, double y, int spectral_terms) {
  double s = 1.0;
  for (int n = 1; n <= spectral_terms; ++n) {
    double q = n * n * kPi * kPi * t / 2.0;
    if (q > 745.0) break;
    s += 2.0 * std::exp(-q) * std::cos(n * kPi * x) * std::cos(n * kPi * y);
  }
  return s;
}

double eval_kernel(double t, double x, double y, const KernelParams& params) {
  check_domain(t, x, y);
  params.validate();
  if (t < params.crossover_time) return eval_kernel_images(t, x, y, params.image_terms);
  return eval_kernel_spectral(t, x, y, params.spectral_terms);
}

double kernel_cell_integral(double t, double x, double a, double b,
                            const KernelParams& params) {
  check_domain(t, x, std::clamp(a, 0.0, 1.0));
  if (b < a) throw std::domain_error("kernel_cell_integral: b < a");
  double rt = std::sqrt(t);
  if (t < params.crossover_time) {
    double s = 0;
    for (int n = -params.image_terms; n <= params.image_terms; ++n) {
      // Direct image: integral of gauss_pdf(x - y - 2n) over y in [a,b].
      s += Phi((x - a - 2.0 * n) / rt) - Phi((x - b - 2.0 * n) / rt);
      // Reflected image: integral of gauss_pdf(x + y - 2n).
      s += Phi((x + b - 2.0 * n) / rt) - Phi((x + a - 2.0 * n) / rt);
    }
    return s;
  }
  double s = b - a;
  for (int n = 1; n <= params.spectral_terms; ++n) {
    double q = n * n * kPi * kPi * t / 2.0;
    if (q > 745.0) break;
    s += 2.0 * std::exp(-q) * std::cos(n * kPi * x) *
         (std::sin(n * kPi * b) - std::sin(n * kPi * a)) / (n * kPi);
  }
  return s;
}

SemigroupOperator::SemigroupOperator(double t, int resolution, const KernelParams& params,
                                     bool force_images)
    : t_(t), resolution_(resolution) {
  if (!(t > 0)) throw std::domain_error("SemigroupOperator: t must be positive");
  if (resolution < 2) throw std::invalid_argument("SemigroupOperator: resolution >= 2");
  params.validate();
  const auto w = trapezoid_weights(resolution);
  a_.resize(static_cast<size_t>(resolution) * resolution);
  const bool images = force_images || t < params.crossover_time;
  for (int i = 0; i < resolution; ++i) {
    double x = static_cast<double>(i) / (resolution - 1);
    for (int j = 0; j < resolution; ++j) {
      double y = static_cast<double>(j) / (resolution - 1);
      double p = images ? eval_kernel_images(t, x, y, params.image_terms)
                        : eval_kernel_spectral(t, x, y, params.spectral_terms);
      a_[static_cast<size_t>(i) * resolution + j] = p * w[j];
    }
  }
}

void SemigroupOperator::apply_raw(const double* in, double* out) const {
  const int n = resolution_;
  for (int i = 0; i < n; ++i) {
    const double* row = &a_[static_cast<size_t>(i) * n];
    double s = 0;
    for (int j = 0; j < n; ++j) s += row[j] * in[j];
    out[i] = s;
  }
}

GridFunction SemigroupOperator::apply(const GridFunction& f) const {
  if (f.resolution != resolution_)
    throw std::invalid_argument("SemigroupOperator: resolution mismatch");
  GridFunction out = f;
  const int n = resolution_;
  if (f.dim == 1) {
    apply_raw(f.values.data(), out.values.data());
    return out;
  }
  // Tensor kernel: contract along axis 1 (rows), then axis 0 (columns).
  GridFunction tmp = f;
  for (int i = 0; i < n; ++i)
    apply_raw(&f.values[static_cast<size_t>(i) * n], &tmp.values[static_cast<size_t>(i) * n]);
  std::vector<double> col(n), res(n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) col[i] = tmp.at(i, j);
    apply_raw(col.data(), res.data());
    for (int i = 0; i < n; ++i) out.at(i, j) = res[i];
  }
  return out;
}

GridFunction apply_semigroup(double t, const GridFunction& f, const KernelParams& params) {
  if (t < 0) throw std::domain_error("apply_semigroup: t must be nonnegative");
  f.validate();
  if (t == 0) return f;
  SemigroupOperator op(t, f.resolution, params);
  return op.apply(f);
}

}  // namespace abps
