#pragma once

#include <optional>

#include "oseenctrl/mesh.hpp"

namespace oseenctrl {

/// Continuous piecewise-linear vector field with homogeneous Dirichlet
/// boundary values. Stores one 2-vector per mesh vertex; entries at
/// boundary-flagged vertices are exactly zero.
struct VelocityField {
  std::vector<Vec2> at_vertex;

  explicit VelocityField(int num_vertices = 0) : at_vertex(num_vertices) {}

  /// Value at reference coordinates (xi, eta) inside triangle t.
  Vec2 eval(const Mesh& mesh, int t, Vec2 ref) const {
    const auto& v = mesh.triangles[t].v;
    double l0 = 1.0 - ref.x - ref.y;
    return at_vertex[v[0]] * l0 + at_vertex[v[1]] * ref.x + at_vertex[v[2]] * ref.y;
  }
  /// Constant gradient on triangle t; grad[i][j] = d_j (component i).
  Mat2 gradient(const Mesh& mesh, int t) const;
  double divergence(const Mesh& mesh, int t) const {
    Mat2 g = gradient(mesh, t);
    return g.trace();
  }
  /// Exact mean over triangle t (vertex average for a linear field).
  Vec2 mean(const Mesh& mesh, int t) const {
    const auto& v = mesh.triangles[t].v;
    return (at_vertex[v[0]] + at_vertex[v[1]] + at_vertex[v[2]]) / 3.0;
  }
};

/// Piecewise-constant pressure, one value per triangle; represents an
/// element of the zero-mean space once the area-weighted mean is removed.
struct PressureField {
  std::vector<double> on_triangle;

  explicit PressureField(int num_triangles = 0) : on_triangle(num_triangles) {}

  double mean(const Mesh& mesh) const {
    double s = 0, a = 0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      double at = mesh.triangle_area(t);
      s += at * on_triangle[t];
      a += at;
    }
    return s / a;
  }
};

/// Piecewise-constant vector control, one 2-vector per triangle; kept inside
/// the admissible box by construction.
struct ControlField {
  std::vector<Vec2> on_triangle;

  explicit ControlField(int num_triangles = 0) : on_triangle(num_triangles) {}
};

/// Parameters of one optimal control problem instance.
struct ProblemSpec {
  double eps = 1.0;
  double kappa = 0.0;
  double theta = 1.0;
  double rho = 1.0;
  Vec2 lower{-1.0, -1.0};
  Vec2 upper{1.0, 1.0};
  VectorFn convection;             // null means zero convection
  double convection_inf_norm = 0.0;
  VectorFn source;                 // f; null means zero
  VectorFn y_target;               // desired state; null means zero
  double tau_k_scale = 1.0;        // tau_K = tau_k_scale * h_K^2
  double tau_gamma = 1.0;
  std::optional<double> beta;      // inf-sup lower bound, when known
  int quad_degree = 7;

  Vec2 conv_at(Vec2 x) const { return convection ? convection(x) : Vec2{0, 0}; }
  Vec2 f_at(Vec2 x) const { return source ? source(x) : Vec2{0, 0}; }
  Vec2 target_at(Vec2 x) const { return y_target ? y_target(x) : Vec2{0, 0}; }
  bool has_convection() const { return static_cast<bool>(convection); }
};

}  // namespace oseenctrl
