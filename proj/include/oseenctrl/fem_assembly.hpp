#pragma once

#include <Eigen/Sparse>
#include <memory>

#include "oseenctrl/fields.hpp"
#include "oseenctrl/quadrature.hpp"

namespace oseenctrl {

/// Map from mesh entities to unknowns of the saddle-point systems.
/// Velocity: two unknowns per interior vertex; pressure: one per triangle;
/// one extra Lagrange multiplier enforces the zero pressure mean.
struct DofMap {
  std::vector<int> vertex_slot;  // interior vertex -> slot, -1 on the boundary
  int n_velocity = 0;            // 2 * number of interior vertices
  int n_pressure = 0;

  explicit DofMap(const Mesh& mesh);
  int velocity_dof(int vertex, int comp) const {
    int s = vertex_slot[vertex];
    return s < 0 ? -1 : 2 * s + comp;
  }
  int pressure_dof(int t) const { return n_velocity + t; }
  int multiplier_dof() const { return n_velocity + n_pressure; }
  int size() const { return n_velocity + n_pressure + 1; }
};

struct SaddleSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  std::shared_ptr<DofMap> dofs;
};

/// Scalar polynomial on one element in scaled monomials
/// 1, X, Y, X^2, XY, Y^2, ... with X = (x-center)/scale.
struct LocalPoly {
  Vec2 center;
  double scale = 1.0;
  int degree = 0;
  std::vector<double> coef;

  static int basis_size(int degree) { return (degree + 1) * (degree + 2) / 2; }
  double eval(Vec2 x) const;
  Vec2 grad(Vec2 x) const;
};

struct LocalPolyVec {
  LocalPoly comp[2];
  Vec2 eval(Vec2 x) const { return {comp[0].eval(x), comp[1].eval(x)}; }
};

/// Geometry, hat gradients and mapped quadrature data of one element.
struct ElementContext {
  std::array<Vec2, 3> corner;
  double area = 0.0;
  double h = 0.0;
  std::array<Vec2, 3> grad_hat;   // constant P1 basis gradients
  const QuadratureRule* rule = nullptr;

  ElementContext(const Mesh& mesh, int t, int quad_degree);
  Vec2 map(Vec2 ref) const {
    return corner[0] + (corner[1] - corner[0]) * ref.x + (corner[2] - corner[0]) * ref.y;
  }
  double weight(int q) const { return rule->points[q].weight * 2.0 * area; }
  Vec2 point(int q) const { return map(rule->points[q].ref); }
  std::array<double, 3> hat(int q) const {
    Vec2 r = rule->points[q].ref;
    return {1.0 - r.x - r.y, r.x, r.y};
  }
  int num_points() const { return static_cast<int>(rule->points.size()); }
};

/// L2-orthogonal projection of a vector field onto polynomials of total
/// degree <= l on element t, computed with the element quadrature rule.
LocalPolyVec l2_project(const VectorFn& field, const Mesh& mesh, int t, int l,
                        int quad_degree = 7);

/// Matrices of the three bilinear forms over the discrete spaces, for
/// diagnostics and tests. Velocity matrices act on interior-vertex dofs,
/// the divergence matrix maps velocity dofs to element values.
struct FormMatrices {
  Eigen::SparseMatrix<double> a;    // convective form, trial x test
  Eigen::SparseMatrix<double> c;    // adjoint convective form
  Eigen::SparseMatrix<double> b;    // divergence pairing, rows = triangles
  std::shared_ptr<DofMap> dofs;
};

FormMatrices assemble_forms(const Mesh& mesh, const ProblemSpec& spec);

/// 3x3 scalar element matrix of the convective form (the P1 vector basis is
/// component-diagonal, so one scalar block serves both components).
/// sign_conv = +1 gives the state form, -1 the adjoint form.
Eigen::Matrix3d element_galerkin_block(const Mesh& mesh, int t, const ProblemSpec& spec,
                                       double sign_conv);

SaddleSystem assemble_state(const Mesh& mesh, const ProblemSpec& spec, const ControlField& u);
SaddleSystem assemble_adjoint(const Mesh& mesh, const ProblemSpec& spec,
                              const VelocityField& y);

/// Right-hand sides alone, for re-solves with a cached factorization.
Eigen::VectorXd state_rhs(const Mesh& mesh, const ProblemSpec& spec, const DofMap& dofs,
                          const ControlField& u);
Eigen::VectorXd adjoint_rhs(const Mesh& mesh, const ProblemSpec& spec, const DofMap& dofs,
                            const VelocityField& y);

std::pair<VelocityField, PressureField> solve_saddle(const Mesh& mesh,
                                                     const SaddleSystem& system);

/// Sparse LU factorization reused across right-hand sides.
class SaddleFactorization {
 public:
  SaddleFactorization(const Mesh& mesh, const SaddleSystem& system);
  ~SaddleFactorization();
  SaddleFactorization(SaddleFactorization&&) noexcept;
  std::pair<VelocityField, PressureField> solve(const Eigen::VectorXd& rhs) const;
  const DofMap& dofs() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace oseenctrl
