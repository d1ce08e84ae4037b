#pragma once

#include <vector>

#include "oseenctrl/common.hpp"

namespace oseenctrl {

/// Every explicit constant entering the computable estimators and the
/// reliability weights of the guaranteed bound.
struct ReliabilityConstants {
  double poincare = 0.0;   // global Poincare constant of the bounding box
  double c_omega = 0.0;    // L2 -> energy-norm embedding constant
  double c_ct = 0.0;       // continuity constant of the convective form
  double c_is = 0.0;       // inf-sup derived constant
  double beta = 0.0;       // user-supplied inf-sup constant
  double mu = 0.0;         // 4 / theta^2
  double omega = 0.0;      // c_is^2 (1 + c_ct)^2
  double weight_y = 0.0;
  double weight_w = 0.0;
  double weight_u = 0.0;
  double rho = 0.0;        // pressure weight in the error norm
};

/// Poincare constant of a d-dimensional box with the given side lengths:
/// (1/pi) (sum 1/l_i^2)^(-1/2).
double poincare_global(const std::vector<double>& box_sides);

double c_omega(double eps, double kappa, double poincare);

/// Local variant with h_K in place of the box Poincare constant.
double c_element(double h, double eps, double kappa);

double c_ct(double eps, double c_omega_value, double convection_inf_norm);

double c_is(double eps, double kappa, double poincare, double beta);

struct ReliabilityWeights {
  double y = 0.0, w = 0.0, u = 0.0;
};

/// Weights multiplying the component estimators in the guaranteed bound.
ReliabilityWeights reliability_weights(double mu, double omega, double rho, double c_omega_value);

/// Assembles the full constant set for a problem with the given parameters.
/// `box_sides` are the sides of an axis-aligned box containing the domain.
ReliabilityConstants compute_constants(double eps, double kappa, double theta, double rho,
                                       double convection_inf_norm, double beta,
                                       const std::vector<double>& box_sides);

}  // namespace oseenctrl
