#include "oseenctrl/quadrature.hpp"

#include <map>
#include <mutex>

namespace oseenctrl {

void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw InvalidParameterError("gauss_legendre_01: n must be >= 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  // Newton iteration on Legendre polynomials over [-1,1], then map to [0,1].
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = 0.5 * (1.0 + x);
    weights[i] = 1.0 / ((1.0 - x * x) * pp * pp);
  }
}

static QuadratureRule build_rule(int degree) {
  QuadratureRule rule;
  rule.degree = degree;
  // Collapsed product: x = xi, y = eta (1 - xi) with Jacobian (1 - xi).
  // The xi-integrand picks up one extra degree, hence 2n-2 >= degree+1.
  int n = (degree + 3 + 1) / 2;  // ceil((degree+3)/2)
  std::vector<double> gx, gw;
  gauss_legendre_01(n, gx, gw);
  rule.points.reserve(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double xi = gx[i], eta = gx[j];
      QuadratureRule::Point p;
      p.ref = {xi, eta * (1.0 - xi)};
      p.weight = gw[i] * gw[j] * (1.0 - xi);
      rule.points.push_back(p);
    }
  }
  return rule;
}

const QuadratureRule& triangle_rule(int degree) {
  static std::mutex mtx;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, build_rule(degree)).first;
  return it->second;
}

double reference_monomial_integral(int a, int b) {
  // a! b! / (a+b+2)! computed as a stable product.
  double v = 1.0;
  for (int k = 1; k <= a + b + 2; ++k) v *= k;
  double fa = 1.0, fb = 1.0;
  for (int k = 1; k <= a; ++k) fa *= k;
  for (int k = 1; k <= b; ++k) fb *= k;
  return fa * fb / v;
}

}  // namespace oseenctrl
