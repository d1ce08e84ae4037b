#pragma once

#include "oseenctrl/constants.hpp"
#include "oseenctrl/residual_estimators.hpp"

namespace oseenctrl {

/// Equilibrated edge fluxes in P1(edge)^2. One flux per mesh edge, stored as
/// endpoint values seen from edges[e].tri[0]; the trace seen from the other
/// incident element is its negative (antisymmetry holds by construction).
struct EdgeFluxSet {
  struct Flux {
    Vec2 at_a{0, 0};  // value at the lower-indexed endpoint
    Vec2 at_b{0, 0};
  };
  std::vector<Flux> flux;  // per mesh edge

  /// Endpoint values of g_{edge,K} ordered to match element t's local edge:
  /// first the value at vertex (e+1)%3, then at (e+2)%3.
  std::array<Vec2, 2> seen_from(const Mesh& mesh, int t, int local_edge) const;
};

/// Element moments of the discrete equation against the P1 basis fields.
/// moment(n, i) is the residual of the stabilized equation on K tested with
/// hat(n) e_i; the flux moments must cancel it.
struct ElementMoments {
  // target[n][i]: required value of sum_edges (g, hat_n e_i)_edge
  double target[3][2] = {};
  // magnitude scale for relative residuals
  double scale = 0.0;
};

ElementMoments element_moments(const Mesh& mesh, int t, const OcpSolution& sol,
                               const ProblemSpec& spec, Equation which);

struct FluxCertification {
  double max_moment_residual = 0.0;  // relative to the element data scale
};

/// Vertex-patch moment equilibration. Throws EquilibrationError when a patch
/// system is inconsistent beyond tolerance (non-converged discrete solution
/// or broken topology).
EdgeFluxSet equilibrate(const Mesh& mesh, const OcpSolution& sol, const ProblemSpec& spec,
                        Equation which, FluxCertification* cert = nullptr);

/// Matrix-valued quadratic minimizer of the local problem
///   -div sigma = R in K,  sigma n = edge data on each edge,
/// with the quadratic edge mode of sigma n constrained to zero.
struct ElementTensor {
  Vec2 center;
  double scale = 1.0;
  // coef[i][j][k]: scalar modes 1, X, Y, X^2, XY, Y^2 with X=(x-center)/scale
  double coef[2][2][6] = {};
  double l2_norm = 0.0;
  double constraint_residual = 0.0;  // relative

  Mat2 eval(Vec2 x) const;
  /// Divergence (a linear vector field) evaluated at x.
  Vec2 divergence(Vec2 x) const;
};

/// edge_data[e] holds the endpoint values of g + trace on local edge e,
/// ordered like EdgeFluxSet::seen_from.
ElementTensor local_tensor(const Mesh& mesh, int t, const LocalPolyVec& interior_residual,
                           const std::array<std::array<Vec2, 2>, 3>& edge_data);

double psi(double sigma_norm, double osc_norm, double c_element_value, double eps);

struct ComputableIndicators {
  double eta_y = 0.0, eta_p = 0.0, eta_w = 0.0, eta_q = 0.0;
};

ComputableIndicators computable_indicators(double psi_st, double psi_ad, double div_y,
                                           double div_w, const ReliabilityConstants& c);

/// Per-element data of the guaranteed estimator pipeline.
struct EquilibratedField {
  std::vector<ComputableIndicators> element;
  std::vector<double> psi_st, psi_ad;          // per element
  std::vector<double> sigma_norm_st, sigma_norm_ad;
  double max_moment_residual = 0.0;
  double max_sigma_residual = 0.0;
};

EquilibratedField compute_equilibrated(const Mesh& mesh, const OcpSolution& sol,
                                       const ProblemSpec& spec,
                                       const ReliabilityConstants& constants,
                                       const ResidualWorkspace& residuals);

/// Assembles the edge data (flux + one-sided trace) for local_tensor.
std::array<std::array<Vec2, 2>, 3> tensor_edge_data(const Mesh& mesh, int t,
                                                    const EdgeFluxSet& fluxes,
                                                    const OcpSolution& sol,
                                                    const ProblemSpec& spec, Equation which);

}  // namespace oseenctrl
