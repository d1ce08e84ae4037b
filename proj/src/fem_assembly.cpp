#include "oseenctrl/fem_assembly.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

namespace oseenctrl {

DofMap::DofMap(const Mesh& mesh) {
  vertex_slot.assign(mesh.num_vertices(), -1);
  int slot = 0;
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (!mesh.vertex_on_boundary[v]) vertex_slot[v] = slot++;
  n_velocity = 2 * slot;
  n_pressure = mesh.num_triangles();
}

double LocalPoly::eval(Vec2 x) const {
  double X = (x.x - center.x) / scale;
  double Y = (x.y - center.y) / scale;
  double v = 0.0;
  int k = 0;
  for (int d = 0; d <= degree; ++d) {
    for (int ay = 0; ay <= d; ++ay) {
      int ax = d - ay;
      v += coef[k++] * std::pow(X, ax) * std::pow(Y, ay);
    }
  }
  return v;
}

Vec2 LocalPoly::grad(Vec2 x) const {
  double X = (x.x - center.x) / scale;
  double Y = (x.y - center.y) / scale;
  Vec2 g{0, 0};
  int k = 0;
  for (int d = 0; d <= degree; ++d) {
    for (int ay = 0; ay <= d; ++ay) {
      int ax = d - ay;
      if (ax > 0) g.x += coef[k] * ax * std::pow(X, ax - 1) * std::pow(Y, ay);
      if (ay > 0) g.y += coef[k] * ay * std::pow(X, ax) * std::pow(Y, ay - 1);
      ++k;
    }
  }
  return g / scale;
}

ElementContext::ElementContext(const Mesh& mesh, int t, int quad_degree) {
  for (int i = 0; i < 3; ++i) corner[i] = mesh.vertex_of(t, i);
  area = mesh.triangle_area(t);
  for (int e = 0; e < 3; ++e) {
    Vec2 d = corner[(e + 2) % 3] - corner[(e + 1) % 3];
    h = std::max(h, d.norm());
    grad_hat[e] = Vec2{-d.y, d.x} / (2.0 * area);
  }
  rule = &triangle_rule(quad_degree);
}

namespace {

std::vector<double> monomials(const LocalPoly& shape, Vec2 x) {
  double X = (x.x - shape.center.x) / shape.scale;
  double Y = (x.y - shape.center.y) / shape.scale;
  std::vector<double> m(LocalPoly::basis_size(shape.degree));
  int k = 0;
  for (int d = 0; d <= shape.degree; ++d)
    for (int ay = 0; ay <= d; ++ay) m[k++] = std::pow(X, d - ay) * std::pow(Y, ay);
  return m;
}

}  // namespace

LocalPolyVec l2_project(const VectorFn& field, const Mesh& mesh, int t, int l,
                        int quad_degree) {
  ElementContext ctx(mesh, t, quad_degree);
  LocalPoly shape;
  shape.center = (ctx.corner[0] + ctx.corner[1] + ctx.corner[2]) / 3.0;
  shape.scale = ctx.h;
  shape.degree = l;
  const int n = LocalPoly::basis_size(l);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs0 = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd rhs1 = Eigen::VectorXd::Zero(n);
  for (int q = 0; q < ctx.num_points(); ++q) {
    double w = ctx.weight(q);
    Vec2 x = ctx.point(q);
    std::vector<double> m = monomials(shape, x);
    Vec2 fx = field(x);
    for (int i = 0; i < n; ++i) {
      rhs0(i) += w * fx.x * m[i];
      rhs1(i) += w * fx.y * m[i];
      for (int j = 0; j < n; ++j) gram(i, j) += w * m[i] * m[j];
    }
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success)
    throw SolverError("l2_project: singular local mass matrix (degenerate element)");
  Eigen::VectorXd c0 = ldlt.solve(rhs0);
  Eigen::VectorXd c1 = ldlt.solve(rhs1);
  LocalPolyVec out;
  for (int c = 0; c < 2; ++c) {
    out.comp[c] = shape;
    out.comp[c].coef.assign(n, 0.0);
  }
  for (int i = 0; i < n; ++i) {
    out.comp[0].coef[i] = c0(i);
    out.comp[1].coef[i] = c1(i);
  }
  return out;
}

Mat2 VelocityField::gradient(const Mesh& mesh, int t) const {
  ElementContext ctx(mesh, t, 1);
  Mat2 g;
  const auto& v = mesh.triangles[t].v;
  for (int a = 0; a < 3; ++a) {
    Vec2 val = at_vertex[v[a]];
    for (int j = 0; j < 2; ++j) {
      g[0][j] += val.x * ctx.grad_hat[a][j];
      g[1][j] += val.y * ctx.grad_hat[a][j];
    }
  }
  return g;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

/// Element contributions for the velocity-velocity blocks. The P1 vector
/// basis is component-diagonal, so a single scalar 3x3 block serves both
/// components. `sign_conv` = +1 for the state form, -1 for the adjoint.
struct VelocityBlock {
  // [test a][trial b]
  double galerkin[3][3] = {};  // eps grad:grad + kappa mass + sign*(c.grad) term
  double stab[3][3] = {};      // tau_K ((c.grad)trial + sign*kappa*trial, (c.grad)test)
};

VelocityBlock velocity_block(const ElementContext& ctx, const ProblemSpec& spec,
                             double sign_conv) {
  VelocityBlock blk;
  const double tau_k = spec.tau_k_scale * ctx.h * ctx.h;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      blk.galerkin[a][b] = spec.eps * ctx.grad_hat[a].dot(ctx.grad_hat[b]) * ctx.area;
  for (int q = 0; q < ctx.num_points(); ++q) {
    double w = ctx.weight(q);
    auto hat = ctx.hat(q);
    Vec2 c = spec.conv_at(ctx.point(q));
    double cg[3];
    for (int a = 0; a < 3; ++a) cg[a] = c.dot(ctx.grad_hat[a]);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        blk.galerkin[a][b] += w * (spec.kappa * hat[b] + sign_conv * cg[b]) * hat[a];
        blk.stab[a][b] += w * tau_k * (cg[b] + sign_conv * spec.kappa * hat[b]) * cg[a];
      }
    }
  }
  return blk;
}

void scatter_velocity_block(const Mesh& mesh, const DofMap& dofs, int t, const double blk[3][3],
                            Triplets& out) {
  const auto& v = mesh.triangles[t].v;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      if (blk[a][b] == 0.0) continue;
      for (int comp = 0; comp < 2; ++comp) {
        int row = dofs.velocity_dof(v[a], comp);
        int col = dofs.velocity_dof(v[b], comp);
        if (row >= 0 && col >= 0) out.emplace_back(row, col, blk[a][b]);
      }
    }
  }
}

void scatter_divergence(const Mesh& mesh, const DofMap& dofs, int t, double sign_vel_row,
                        Triplets& out) {
  // B(trial velocity, test pressure) = integral of pressure * div(velocity);
  // for P0 pressures the element integral is area * d_i(hat_a).
  ElementContext ctx(mesh, t, 1);
  const auto& v = mesh.triangles[t].v;
  int prow = dofs.pressure_dof(t);
  for (int a = 0; a < 3; ++a) {
    for (int comp = 0; comp < 2; ++comp) {
      int vd = dofs.velocity_dof(v[a], comp);
      if (vd < 0) continue;
      double entry = ctx.area * ctx.grad_hat[a][comp];
      out.emplace_back(prow, vd, entry);                 // pressure row: B y
      out.emplace_back(vd, prow, sign_vel_row * entry);  // velocity row: -+ B^T p
    }
  }
}

void scatter_pressure_jump(const Mesh& mesh, const DofMap& dofs, const ProblemSpec& spec,
                           double sign, Triplets& out) {
  for (const auto& ed : mesh.edges) {
    if (ed.boundary) continue;
    double hg = (mesh.vertices[ed.b] - mesh.vertices[ed.a]).norm();
    double w = sign * spec.tau_gamma * hg * hg;
    int p0 = dofs.pressure_dof(ed.tri[0]);
    int p1 = dofs.pressure_dof(ed.tri[1]);
    out.emplace_back(p0, p0, w);
    out.emplace_back(p1, p1, w);
    out.emplace_back(p0, p1, -w);
    out.emplace_back(p1, p0, -w);
  }
}

void scatter_mean_constraint(const Mesh& mesh, const DofMap& dofs, Triplets& out) {
  int mrow = dofs.multiplier_dof();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    double a = mesh.triangle_area(t);
    out.emplace_back(mrow, dofs.pressure_dof(t), a);
    out.emplace_back(dofs.pressure_dof(t), mrow, a);
  }
}

Eigen::SparseMatrix<double> build(int n, Triplets& trip) {
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

}  // namespace

Eigen::Matrix3d element_galerkin_block(const Mesh& mesh, int t, const ProblemSpec& spec,
                                       double sign_conv) {
  ElementContext ctx(mesh, t, spec.quad_degree);
  VelocityBlock blk = velocity_block(ctx, spec, sign_conv);
  Eigen::Matrix3d m;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) m(a, b) = blk.galerkin[a][b];
  return m;
}

FormMatrices assemble_forms(const Mesh& mesh, const ProblemSpec& spec) {
  FormMatrices fm;
  fm.dofs = std::make_shared<DofMap>(mesh);
  Triplets ta, tc, tb;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    ElementContext ctx(mesh, t, spec.quad_degree);
    VelocityBlock ba = velocity_block(ctx, spec, +1.0);
    VelocityBlock bc = velocity_block(ctx, spec, -1.0);
    const auto& v = mesh.triangles[t].v;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        for (int comp = 0; comp < 2; ++comp) {
          int row = fm.dofs->velocity_dof(v[a], comp);
          int col = fm.dofs->velocity_dof(v[b], comp);
          if (row < 0 || col < 0) continue;
          ta.emplace_back(row, col, ba.galerkin[a][b]);
          tc.emplace_back(row, col, bc.galerkin[a][b]);
        }
      }
      for (int comp = 0; comp < 2; ++comp) {
        int vd = fm.dofs->velocity_dof(v[a], comp);
        if (vd >= 0) tb.emplace_back(t, vd, ctx.area * ctx.grad_hat[a][comp]);
      }
    }
  }
  int nv = fm.dofs->n_velocity;
  fm.a.resize(nv, nv);
  fm.a.setFromTriplets(ta.begin(), ta.end());
  fm.c.resize(nv, nv);
  fm.c.setFromTriplets(tc.begin(), tc.end());
  fm.b.resize(mesh.num_triangles(), nv);
  fm.b.setFromTriplets(tb.begin(), tb.end());
  return fm;
}

Eigen::VectorXd state_rhs(const Mesh& mesh, const ProblemSpec& spec, const DofMap& dofs,
                          const ControlField& u) {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dofs.size());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    ElementContext ctx(mesh, t, spec.quad_degree);
    const double tau_k = spec.tau_k_scale * ctx.h * ctx.h;
    const auto& v = mesh.triangles[t].v;
    for (int q = 0; q < ctx.num_points(); ++q) {
      double w = ctx.weight(q);
      Vec2 x = ctx.point(q);
      Vec2 data = spec.f_at(x) + u.on_triangle[t];
      auto hat = ctx.hat(q);
      Vec2 c = spec.conv_at(x);
      for (int a = 0; a < 3; ++a) {
        double test = hat[a];
        double stab_test = tau_k * c.dot(ctx.grad_hat[a]);
        for (int comp = 0; comp < 2; ++comp) {
          int vd = dofs.velocity_dof(v[a], comp);
          if (vd >= 0) rhs(vd) += w * data[comp] * (test + stab_test);
        }
      }
    }
  }
  return rhs;
}

Eigen::VectorXd adjoint_rhs(const Mesh& mesh, const ProblemSpec& spec, const DofMap& dofs,
                            const VelocityField& y) {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dofs.size());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    ElementContext ctx(mesh, t, spec.quad_degree);
    const double tau_k = spec.tau_k_scale * ctx.h * ctx.h;
    const auto& v = mesh.triangles[t].v;
    for (int q = 0; q < ctx.num_points(); ++q) {
      double w = ctx.weight(q);
      Vec2 x = ctx.point(q);
      Vec2 data = y.eval(mesh, t, ctx.rule->points[q].ref) - spec.target_at(x);
      auto hat = ctx.hat(q);
      Vec2 c = spec.conv_at(x);
      for (int a = 0; a < 3; ++a) {
        double test = hat[a];
        double stab_test = tau_k * c.dot(ctx.grad_hat[a]);
        for (int comp = 0; comp < 2; ++comp) {
          int vd = dofs.velocity_dof(v[a], comp);
          if (vd >= 0) rhs(vd) += w * data[comp] * (test - stab_test);
        }
      }
    }
  }
  return rhs;
}

namespace {

SaddleSystem assemble_system(const Mesh& mesh, const ProblemSpec& spec, double sign_conv) {
  SaddleSystem sys;
  sys.dofs = std::make_shared<DofMap>(mesh);
  Triplets trip;
  // sign conventions: state has -B^T in the velocity rows and +H in the
  // pressure rows; the adjoint flips both.
  const double sign_bt = sign_conv > 0 ? -1.0 : +1.0;
  const double sign_jump = sign_conv > 0 ? +1.0 : -1.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    ElementContext ctx(mesh, t, spec.quad_degree);
    VelocityBlock blk = velocity_block(ctx, spec, sign_conv);
    double combined[3][3];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) combined[a][b] = blk.galerkin[a][b] + blk.stab[a][b];
    scatter_velocity_block(mesh, *sys.dofs, t, combined, trip);
    scatter_divergence(mesh, *sys.dofs, t, sign_bt, trip);
  }
  scatter_pressure_jump(mesh, *sys.dofs, spec, sign_jump, trip);
  scatter_mean_constraint(mesh, *sys.dofs, trip);
  sys.matrix = build(sys.dofs->size(), trip);
  return sys;
}

}  // namespace

SaddleSystem assemble_state(const Mesh& mesh, const ProblemSpec& spec, const ControlField& u) {
  SaddleSystem sys = assemble_system(mesh, spec, +1.0);
  sys.rhs = state_rhs(mesh, spec, *sys.dofs, u);
  return sys;
}

SaddleSystem assemble_adjoint(const Mesh& mesh, const ProblemSpec& spec,
                              const VelocityField& y) {
  SaddleSystem sys = assemble_system(mesh, spec, -1.0);
  sys.rhs = adjoint_rhs(mesh, spec, *sys.dofs, y);
  return sys;
}

struct SaddleFactorization::Impl {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  Eigen::SparseMatrix<double> matrix;
  std::shared_ptr<DofMap> dofs;
  const Mesh* mesh = nullptr;
};

SaddleFactorization::SaddleFactorization(const Mesh& mesh, const SaddleSystem& system)
    : impl_(std::make_unique<Impl>()) {
  impl_->matrix = system.matrix;
  impl_->dofs = system.dofs;
  impl_->mesh = &mesh;
  impl_->lu.compute(impl_->matrix);
  if (impl_->lu.info() != Eigen::Success)
    throw SolverError("solve_saddle: singular factorization (missing mean constraint or "
                      "degenerate mesh?)");
}

SaddleFactorization::~SaddleFactorization() = default;
SaddleFactorization::SaddleFactorization(SaddleFactorization&&) noexcept = default;

const DofMap& SaddleFactorization::dofs() const { return *impl_->dofs; }

std::pair<VelocityField, PressureField> SaddleFactorization::solve(
    const Eigen::VectorXd& rhs) const {
  const Mesh& mesh = *impl_->mesh;
  const DofMap& dofs = *impl_->dofs;
  Eigen::VectorXd x = impl_->lu.solve(rhs);
  // One step of iterative refinement; keeps the algebraic residual near
  // machine precision on large meshes.
  Eigen::VectorXd r = rhs - impl_->matrix * x;
  x += impl_->lu.solve(r);
  double resid = (rhs - impl_->matrix * x).norm();
  if (!(resid <= 1e-10 * (1.0 + rhs.norm())))
    throw SolverError("solve_saddle: algebraic residual too large: " + std::to_string(resid));

  VelocityField vel(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    for (int comp = 0; comp < 2; ++comp) {
      int vd = dofs.velocity_dof(v, comp);
      if (vd >= 0) vel.at_vertex[v][comp] = x(vd);
    }
  }
  PressureField pres(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) pres.on_triangle[t] = x(dofs.pressure_dof(t));
  double mean = pres.mean(mesh);
  for (double& p : pres.on_triangle) p -= mean;
  return {std::move(vel), std::move(pres)};
}

std::pair<VelocityField, PressureField> solve_saddle(const Mesh& mesh,
                                                     const SaddleSystem& system) {
  SaddleFactorization fact(mesh, system);
  return fact.solve(system.rhs);
}

}  // namespace oseenctrl
