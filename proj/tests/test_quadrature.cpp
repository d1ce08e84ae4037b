#include <doctest.h>

#include "oseenctrl/quadrature.hpp"

using namespace oseenctrl;

TEST_CASE("gauss-legendre nodes integrate polynomials exactly") {
  for (int n = 1; n <= 8; ++n) {
    std::vector<double> x, w;
    gauss_legendre_01(n, x, w);
    double wsum = 0;
    for (double wi : w) {
      CHECK(wi > 0);
      wsum += wi;
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0;
      for (int i = 0; i < n; ++i) s += w[i] * std::pow(x[i], k);
      CHECK(s == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("triangle rule is exact up to its declared degree") {
  for (int degree : {1, 2, 4, 7, 10}) {
    const QuadratureRule& rule = triangle_rule(degree);
    double wsum = 0;
    for (const auto& p : rule.points) {
      CHECK(p.weight > 0);
      CHECK(p.ref.x >= 0);
      CHECK(p.ref.y >= 0);
      CHECK(p.ref.x + p.ref.y <= 1.0 + 1e-14);
      wsum += p.weight;
    }
    CHECK(wsum == doctest::Approx(0.5).epsilon(1e-14));
    for (int a = 0; a <= degree; ++a) {
      for (int b = 0; a + b <= degree; ++b) {
        double s = 0;
        for (const auto& p : rule.points)
          s += p.weight * std::pow(p.ref.x, a) * std::pow(p.ref.y, b);
        double exact = reference_monomial_integral(a, b);
        CHECK(s == doctest::Approx(exact).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("reference monomial integrals match the factorial formula") {
  CHECK(reference_monomial_integral(0, 0) == doctest::Approx(0.5));
  CHECK(reference_monomial_integral(1, 0) == doctest::Approx(1.0 / 6.0));
  CHECK(reference_monomial_integral(2, 0) == doctest::Approx(1.0 / 12.0));
  CHECK(reference_monomial_integral(1, 1) == doctest::Approx(1.0 / 24.0));
}
