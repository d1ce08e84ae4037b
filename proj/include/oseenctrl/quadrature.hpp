#pragma once

#include <vector>

#include "oseenctrl/common.hpp"

namespace oseenctrl {

/// Quadrature rule on the reference triangle (0,0),(1,0),(0,1).
/// Built as a collapsed Gauss-Legendre product rule, so all weights are
/// positive and polynomials up to `degree` total degree integrate exactly.
struct QuadratureRule {
  struct Point {
    Vec2 ref;       // reference coordinates (xi, eta)
    double weight;  // reference weight; weights sum to 1/2
  };
  int degree = 0;
  std::vector<Point> points;
};

/// Rule exact for all bivariate polynomials of total degree <= degree.
const QuadratureRule& triangle_rule(int degree);

/// Gauss-Legendre nodes/weights on [0,1]; exact for degree <= 2n-1.
void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Exact integral of x^a y^b over the reference triangle: a! b! / (a+b+2)!.
double reference_monomial_integral(int a, int b);

}  // namespace oseenctrl
