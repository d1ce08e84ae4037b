#pragma once

#include "oseenctrl/adaptivity.hpp"

namespace oseenctrl {

/// Closed-form fields of a manufactured solution with the derivatives needed
/// by the data derivation and the error norms.
struct ExactVelocity {
  VectorFn value;
  std::function<Mat2(Vec2)> grad;  // grad[i][j] = d_j (component i)
  VectorFn laplacian;
};

struct ExactPressure {
  ScalarFn value;
  VectorFn grad;
};

struct ManufacturedCase {
  std::string name;
  Domain domain = Domain::unit_square;
  ProblemSpec spec;
  bool has_exact = false;
  ExactVelocity state_velocity, adjoint_velocity;  // valid when has_exact
  ExactPressure state_pressure, adjoint_pressure;
  VectorFn exact_control;                          // clamp(-w/theta)
};

/// The four 2D benchmark cases: bubble2d, layer2d, lshape2d, tshape2d.
ManufacturedCase case_library(const std::string& name);
std::vector<std::string> case_names();

struct DerivedData {
  VectorFn f;
  VectorFn y_target;
  VectorFn u_exact;
};

/// Source, desired state and optimal control consistent with the strong
/// optimality system for the given exact fields.
DerivedData derive_data(const ManufacturedCase& c);

/// Weighted error norms of a discrete solution against the exact fields.
ErrorBreakdown compute_errors(const Mesh& mesh, const OcpSolution& sol,
                              const ManufacturedCase& c, double rho, int quad_degree = 7);

/// Ndof = 2 d Nv + (d+2) Ne with d = 2.
long ndof(const Mesh& mesh);

/// Error evaluator suitable for afem_run; empty for cases without exact
/// solutions.
ErrorEvaluator error_evaluator(const ManufacturedCase& c);

}  // namespace oseenctrl
