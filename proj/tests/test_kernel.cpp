#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "abps/kernel.hpp"

using namespace abps;

namespace {

// Independent image-sum oracle with a wide fixed truncation.
double kernel_oracle(double t, double x, double y) {
  double s = 0;
  for (int n = -50; n <= 50; ++n) {
    double d1 = x - y - 2.0 * n, d2 = x + y - 2.0 * n;
    s += std::exp(-d1 * d1 / (2 * t)) / std::sqrt(2 * M_PI * t);
    s += std::exp(-d2 * d2 / (2 * t)) / std::sqrt(2 * M_PI * t);
  }
  return s;
}

double quad_integral_dy(double t, double x, int res) {
  double h = 1.0 / (res - 1), s = 0;
  for (int j = 0; j < res; ++j) {
    double w = (j == 0 || j == res - 1) ? h / 2 : h;
    s += w * eval_kernel(t, x, static_cast<double>(j) / (res - 1));
  }
  return s;
}

}  // namespace

TEST_CASE("point values") {
  CHECK(eval_kernel(0.02, 0.5, 0.5) == doctest::Approx(2.820948).epsilon(0).scale(1).epsilon(1e-5 / 2.820948));
  CHECK(std::abs(eval_kernel(0.02, 0.5, 0.5) - kernel_oracle(0.02, 0.5, 0.5)) < 1e-12);
  // stationary uniform limit
  CHECK(std::abs(eval_kernel(10.0, 0.3, 0.7) - 1.0) < 1e-8);
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(eval_kernel(0.0, 0.5, 0.5), std::domain_error);
  CHECK_THROWS_AS(eval_kernel(-1.0, 0.5, 0.5), std::domain_error);
  CHECK_THROWS_AS(eval_kernel(0.1, -0.1, 0.5), std::domain_error);
  CHECK_THROWS_AS(eval_kernel(0.1, 0.5, 1.5), std::domain_error);
}

TEST_CASE("symmetry") {
  double ts[] = {0.001, 0.02, 0.1, 0.7, 3.0};
  for (double t : ts)
    for (double x = 0.0; x <= 1.0; x += 0.21)
      for (double y = 0.0; y <= 1.0; y += 0.17)
        CHECK(std::abs(eval_kernel(t, x, y) - eval_kernel(t, y, x)) <= 1e-12);
}

TEST_CASE("mass conservation under quadrature") {
  for (double t : {1e-4, 1e-3, 0.05, 0.5, 2.0})
    for (double x : {0.0, 0.013, 0.5, 0.992, 1.0})
      CHECK(std::abs(quad_integral_dy(t, x, 2001) - 1.0) <= 1e-8);
}

TEST_CASE("image and spectral methods agree where both converge") {
  for (double t = 0.01; t <= 1.0; t += 0.09)
    for (double x : {0.0, 0.3, 0.77})
      for (double y : {0.1, 0.5, 1.0}) {
        double a = eval_kernel_images(t, x, y, 8);
        double b = eval_kernel_spectral(t, x, y, 400);
        CHECK(std::abs(a - b) <= 1e-8);
      }
}

TEST_CASE("Chapman-Kolmogorov") {
  const int res = 2001;
  const double h = 1.0 / (res - 1);
  for (auto [s, t, x, y] : {std::array<double, 4>{0.01, 0.04, 0.3, 0.8},
                            std::array<double, 4>{0.05, 0.05, 0.0, 0.5},
                            std::array<double, 4>{0.2, 0.3, 0.9, 0.95}}) {
    double conv = 0;
    for (int j = 0; j < res; ++j) {
      double w = (j == 0 || j == res - 1) ? h / 2 : h;
      double z = static_cast<double>(j) / (res - 1);
      conv += w * eval_kernel(s, x, z) * eval_kernel(t, z, y);
    }
    CHECK(std::abs(conv - eval_kernel(s + t, x, y)) <= 1e-6);
  }
}

TEST_CASE("cell integrals sum to one and match quadrature") {
  for (double t : {1e-4, 0.03, 0.6}) {
    for (double x : {0.0, 0.41, 1.0}) {
      double total = 0;
      for (int c = 0; c < 50; ++c) total += kernel_cell_integral(t, x, c / 50.0, (c + 1) / 50.0);
      CHECK(std::abs(total - 1.0) <= 1e-10);
    }
  }
  // agreement with dense trapezoid on a single cell at moderate t
  double ref = 0;
  int n = 4001;
  for (int j = 0; j < n; ++j) {
    double z = 0.2 + 0.1 * j / (n - 1);
    double w = (j == 0 || j == n - 1) ? 0.5 : 1.0;
    ref += w * eval_kernel(0.05, 0.37, z) * 0.1 / (n - 1);
  }
  CHECK(kernel_cell_integral(0.05, 0.37, 0.2, 0.3) == doctest::Approx(ref).epsilon(1e-8));
}

TEST_CASE("semigroup: constants, identity, eigenfunction") {
  auto c = GridFunction::constant(3.25, 401);
  auto pc = apply_semigroup(0.5, c);
  for (double v : pc.values) CHECK(std::abs(v - 3.25) <= 1e-8);

  auto f = GridFunction::sample(401, [](double x) { return std::cos(3 * M_PI * x) + 0.2 * x; });
  auto id = apply_semigroup(0.0, f);
  for (int i = 0; i < f.resolution; ++i) CHECK(id.values[i] == f.values[i]);

  auto mode = GridFunction::sample(401, [](double x) { return std::cos(M_PI * x); });
  auto evolved = apply_semigroup(0.1, mode);
  double lam = std::exp(-M_PI * M_PI * 0.1 / 2);
  for (int i = 0; i < mode.resolution; ++i)
    CHECK(std::abs(evolved.values[i] - lam * mode.values[i]) <= 1e-6);

  CHECK_THROWS_AS(apply_semigroup(-0.1, f), std::domain_error);
}

TEST_CASE("semigroup positivity") {
  auto f = GridFunction::sample(301, [](double x) { return std::max(0.0, std::sin(7 * x)); });
  for (double t : {1e-3, 0.05, 1.0}) {
    auto g = apply_semigroup(t, f);
    for (double v : g.values) CHECK(v >= -1e-12);
  }
}

TEST_CASE("tensor semigroup matches per-axis application") {
  auto f2 = GridFunction::sample2(101, [](double x, double y) {
    return (1 + 0.5 * std::cos(M_PI * x)) * (1 - 0.3 * std::cos(2 * M_PI * y));
  });
  auto g = apply_semigroup(0.07, f2);
  // product inputs evolve as products of 1-d evolutions
  auto fx = GridFunction::sample(101, [](double x) { return 1 + 0.5 * std::cos(M_PI * x); });
  auto fy = GridFunction::sample(101, [](double y) { return 1 - 0.3 * std::cos(2 * M_PI * y); });
  auto gx = apply_semigroup(0.07, fx);
  auto gy = apply_semigroup(0.07, fy);
  for (int i = 0; i < 101; i += 13)
    for (int j = 0; j < 101; j += 17)
      CHECK(g.at(i, j) == doctest::Approx(gx.values[i] * gy.values[j]).epsilon(1e-10));
}
