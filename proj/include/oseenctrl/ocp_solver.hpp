#pragma once

#include "oseenctrl/fem_assembly.hpp"

namespace oseenctrl {

/// Componentwise projection onto the box [a, b]; nonexpansive.
Vec2 clamp_project(Vec2 v, Vec2 a, Vec2 b);

/// Solution operator of the discrete variational inequality for fixed
/// adjoint velocity: with piecewise-constant controls and an elementwise box,
/// the inequality decouples and the minimizer is the clamped element mean of
/// -w/theta.
ControlField discrete_vi_solution(const Mesh& mesh, const VelocityField& w,
                                  const ProblemSpec& spec);

struct OcpConfig {
  double tol = 1e-11;
  int max_iter = 200;
  double damping = 1.0;  // in (0, 1]; halved automatically on residual increase
  bool verbose = false;
};

struct OcpSolution {
  VelocityField y;
  PressureField p;
  VelocityField w;
  PressureField q;
  ControlField u;
  int iterations = 0;
  double fixed_point_residual = 0.0;
  std::vector<double> residual_history;
};

/// Damped fixed-point iteration on the control through the projection
/// formula. The state/adjoint matrices do not depend on the iterate, so both
/// factorizations are computed once and reused.
OcpSolution solve_ocp(const Mesh& mesh, const ProblemSpec& spec, const OcpConfig& config = {});

double control_l2_norm(const Mesh& mesh, const ControlField& u);
double control_l2_distance(const Mesh& mesh, const ControlField& a, const ControlField& b);

}  // namespace oseenctrl
