#pragma once

#include "oseenctrl/ocp_solver.hpp"

namespace oseenctrl {

enum class Equation { state, adjoint };

/// Interior residual, oscillation and divergence data of one element.
/// For P1 velocities with P0 pressures the interior residuals are linear
/// polynomials and invariant under the elementwise L2 projection.
struct ElementResidualData {
  LocalPolyVec interior_st;  // projected strong residual of the state system
  LocalPolyVec interior_ad;
  double norm_st = 0.0;      // L2(K) norms of the projected residuals
  double norm_ad = 0.0;
  double osc_st = 0.0;       // L2(K) norms of the data oscillation remainders
  double osc_ad = 0.0;
  double div_y = 0.0;        // L2(K) norms of the discrete divergences
  double div_w = 0.0;
};

/// Jump of the diffusive flux across one interior edge; constant for the
/// P1/P0 pair. Stored as the orientation-free sum of one-sided traces.
struct EdgeJumpData {
  Vec2 jump_st{0, 0};
  Vec2 jump_ad{0, 0};
};

struct ResidualWorkspace {
  std::vector<ElementResidualData> element;  // per triangle
  std::vector<EdgeJumpData> edge;            // per mesh edge; zero on boundary edges
};

LocalPolyVec element_residual(const Mesh& mesh, int t, const OcpSolution& sol,
                              const ProblemSpec& spec, Equation which);

double oscillation_norm(const Mesh& mesh, int t, const OcpSolution& sol,
                        const ProblemSpec& spec, Equation which);

/// One-sided trace -eps (n.grad) field +/- pressure n, seen from triangle t.
Vec2 edge_trace(const Mesh& mesh, int edge_id, int t, const OcpSolution& sol,
                const ProblemSpec& spec, Equation which);

/// Sum of the two one-sided traces; throws on boundary edges.
Vec2 edge_jump(const Mesh& mesh, int edge_id, const OcpSolution& sol, const ProblemSpec& spec,
               Equation which);

/// eta_u,K = || clamp(-w/theta) - u ||_{L2(K)}.
double control_indicator(const Mesh& mesh, int t, const VelocityField& w, const ControlField& u,
                         const ProblemSpec& spec);

ResidualWorkspace compute_residual_data(const Mesh& mesh, const OcpSolution& sol,
                                        const ProblemSpec& spec);

struct ResidualIndicators {
  double eta_y = 0.0, eta_p = 0.0, eta_w = 0.0, eta_q = 0.0;
};

/// Residual-based indicators; the state and adjoint pairs coincide by
/// construction (eta_y = eta_p, eta_w = eta_q).
ResidualIndicators residual_indicators(const Mesh& mesh, int t, const ResidualWorkspace& data);

/// Degree m of the projection space, max(l_V, l_Q - 1, l_U).
int residual_projection_degree(int velocity_degree = 1, int pressure_degree = 0,
                               int control_degree = 0);

}  // namespace oseenctrl
