#include "oseenctrl/ocp_solver.hpp"

#include <iostream>

namespace oseenctrl {

Vec2 clamp_project(Vec2 v, Vec2 a, Vec2 b) {
  if (!(a.x < b.x) || !(a.y < b.y))
    throw InvalidBoundsError("clamp_project: bounds must satisfy a < b componentwise");
  return {std::min(b.x, std::max(a.x, v.x)), std::min(b.y, std::max(a.y, v.y))};
}

ControlField discrete_vi_solution(const Mesh& mesh, const VelocityField& w,
                                  const ProblemSpec& spec) {
  if (!(spec.theta > 0))
    throw InvalidParameterError("discrete_vi_solution: theta must be positive");
  ControlField u(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    Vec2 mean = w.mean(mesh, t) * (-1.0 / spec.theta);
    u.on_triangle[t] = clamp_project(mean, spec.lower, spec.upper);
  }
  return u;
}

double control_l2_norm(const Mesh& mesh, const ControlField& u) {
  double s = 0;
  for (int t = 0; t < mesh.num_triangles(); ++t)
    s += mesh.triangle_area(t) * u.on_triangle[t].squared_norm();
  return std::sqrt(s);
}

double control_l2_distance(const Mesh& mesh, const ControlField& a, const ControlField& b) {
  double s = 0;
  for (int t = 0; t < mesh.num_triangles(); ++t)
    s += mesh.triangle_area(t) * (a.on_triangle[t] - b.on_triangle[t]).squared_norm();
  return std::sqrt(s);
}

OcpSolution solve_ocp(const Mesh& mesh, const ProblemSpec& spec, const OcpConfig& config) {
  if (!(spec.theta > 0)) throw InvalidParameterError("solve_ocp: theta must be positive");
  if (!(config.damping > 0) || config.damping > 1.0)
    throw InvalidParameterError("solve_ocp: damping must lie in (0, 1]");

  ControlField u(mesh.num_triangles());
  for (auto& v : u.on_triangle) v = clamp_project({0, 0}, spec.lower, spec.upper);

  SaddleSystem state_sys = assemble_state(mesh, spec, u);
  SaddleFactorization state_fact(mesh, state_sys);
  SaddleSystem adjoint_sys = assemble_adjoint(mesh, spec, VelocityField(mesh.num_vertices()));
  SaddleFactorization adjoint_fact(mesh, adjoint_sys);

  OcpSolution sol;
  double damping = config.damping;
  double prev_residual = -1.0;
  for (int it = 0; it < config.max_iter; ++it) {
    auto [y, p] = state_fact.solve(state_rhs(mesh, spec, state_fact.dofs(), u));
    auto [w, q] = adjoint_fact.solve(adjoint_rhs(mesh, spec, adjoint_fact.dofs(), y));
    ControlField next = discrete_vi_solution(mesh, w, spec);
    for (int t = 0; t < mesh.num_triangles(); ++t)
      next.on_triangle[t] =
          u.on_triangle[t] * (1.0 - damping) + next.on_triangle[t] * damping;
    double residual = control_l2_distance(mesh, next, u);
    bool converged = residual <= config.tol * (1.0 + control_l2_norm(mesh, u));
    sol.residual_history.push_back(residual);
    if (config.verbose)
      std::cerr << "ocp iter " << it << " residual " << residual << "\n";
    if (prev_residual >= 0 && residual > prev_residual && damping > 1.0 / 64.0)
      damping *= 0.5;
    prev_residual = residual;
    u = std::move(next);
    sol.iterations = it + 1;
    sol.fixed_point_residual = residual;
    if (converged) {
      sol.u = std::move(u);
      // Final state/adjoint re-solve so the returned quintuple is mutually
      // consistent with the returned control.
      auto [yf, pf] = state_fact.solve(state_rhs(mesh, spec, state_fact.dofs(), sol.u));
      sol.y = std::move(yf);
      sol.p = std::move(pf);
      auto [wf, qf] = adjoint_fact.solve(adjoint_rhs(mesh, spec, adjoint_fact.dofs(), sol.y));
      sol.w = std::move(wf);
      sol.q = std::move(qf);
      return sol;
    }
  }
  throw NonConvergenceError("solve_ocp: fixed-point iteration did not converge in " +
                                std::to_string(config.max_iter) + " iterations",
                            sol.residual_history);
}

}  // namespace oseenctrl
