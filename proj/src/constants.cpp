#include "oseenctrl/constants.hpp"

#include <algorithm>

namespace oseenctrl {

double poincare_global(const std::vector<double>& box_sides) {
  if (box_sides.empty()) throw InvalidDomainError("poincare_global: no box sides given");
  double s = 0.0;
  for (double l : box_sides) {
    if (!(l > 0)) throw InvalidDomainError("poincare_global: box side must be positive");
    s += 1.0 / (l * l);
  }
  return 1.0 / (M_PI * std::sqrt(s));
}

double c_omega(double eps, double kappa, double poincare) {
  if (!(eps > 0)) throw InvalidParameterError("c_omega: eps must be positive");
  if (kappa < 0) throw InvalidParameterError("c_omega: kappa must be nonnegative");
  double diffusive = poincare / std::sqrt(eps);
  return kappa == 0.0 ? diffusive : std::min(diffusive, 1.0 / std::sqrt(kappa));
}

double c_element(double h, double eps, double kappa) {
  if (!(eps > 0)) throw InvalidParameterError("c_element: eps must be positive");
  if (!(h > 0)) throw InvalidParameterError("c_element: h must be positive");
  double diffusive = h / (M_PI * std::sqrt(eps));
  return kappa == 0.0 ? diffusive : std::min(diffusive, 1.0 / std::sqrt(kappa));
}

double c_ct(double eps, double c_omega_value, double convection_inf_norm) {
  if (!(eps > 0)) throw InvalidParameterError("c_ct: eps must be positive");
  return 1.0 + c_omega_value / std::sqrt(eps) * convection_inf_norm;
}

double c_is(double eps, double kappa, double poincare, double beta) {
  if (!(beta > 0)) throw MissingInfSupError("c_is: inf-sup constant beta must be positive");
  return std::sqrt(eps + kappa * poincare * poincare) / beta;
}

ReliabilityWeights reliability_weights(double mu, double omega, double rho,
                                       double c_omega_value) {
  const double c2 = c_omega_value * c_omega_value;
  const double c4 = c2 * c2;
  const double c6 = c4 * c2;
  const double c8 = c4 * c4;
  const double c10 = c8 * c2;
  const double c12 = c8 * c4;
  const double c14 = c8 * c6;
  ReliabilityWeights d;
  d.y = 2.0 + 2.0 * mu * c6 + 4.0 * (1.0 + rho * omega) * (c4 + mu * c8 + 2.0 * mu * c12);
  d.w = 2.0 + mu * c2 + 2.0 * mu * (1.0 + rho * omega) * (c4 + 2.0 * c8);
  d.u = 2.0 + 2.0 * mu * c8 +
        4.0 * (1.0 + rho * omega) * (c2 + 2.0 * c6 + mu * c10 + 2.0 * mu * c14);
  return d;
}

ReliabilityConstants compute_constants(double eps, double kappa, double theta, double rho,
                                       double convection_inf_norm, double beta,
                                       const std::vector<double>& box_sides) {
  if (!(theta > 0)) throw InvalidParameterError("compute_constants: theta must be positive");
  ReliabilityConstants c;
  c.poincare = poincare_global(box_sides);
  c.c_omega = c_omega(eps, kappa, c.poincare);
  c.c_ct = c_ct(eps, c.c_omega, convection_inf_norm);
  c.c_is = c_is(eps, kappa, c.poincare, beta);
  c.beta = beta;
  c.mu = 4.0 / (theta * theta);
  c.omega = c.c_is * c.c_is * (1.0 + c.c_ct) * (1.0 + c.c_ct);
  c.rho = rho;
  ReliabilityWeights d = reliability_weights(c.mu, c.omega, rho, c.c_omega);
  c.weight_y = d.y;
  c.weight_w = d.w;
  c.weight_u = d.u;
  return c;
}

}  // namespace oseenctrl
