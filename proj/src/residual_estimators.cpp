#include "oseenctrl/residual_estimators.hpp"

namespace oseenctrl {

int residual_projection_degree(int velocity_degree, int pressure_degree, int control_degree) {
  return std::max({velocity_degree, pressure_degree - 1, control_degree});
}

namespace {

/// P1 polynomial for a linear field given by value-at-centroid and gradient,
/// in the shared scaled-monomial layout (center = centroid, scale = h).
LocalPoly linear_poly(Vec2 center, double scale, double value, Vec2 gradient) {
  LocalPoly p;
  p.center = center;
  p.scale = scale;
  p.degree = 1;
  p.coef = {value, gradient.x * scale, gradient.y * scale};
  return p;
}

struct ResidualParts {
  LocalPolyVec projected;  // Pi_{K,m} of the data part
  double osc = 0.0;
};

/// Projects the data part of the strong residual and measures the remainder.
/// For the state this is f - (c.grad) y_T; for the adjoint -y_Omega + (c.grad) w_T.
ResidualParts project_data_part(const Mesh& mesh, int t, const OcpSolution& sol,
                                const ProblemSpec& spec, Equation which, int m) {
  const VelocityField& vel = which == Equation::state ? sol.y : sol.w;
  Mat2 g = vel.gradient(mesh, t);
  VectorFn data;
  if (which == Equation::state) {
    data = [&](Vec2 x) { return spec.f_at(x) - g.apply(spec.conv_at(x)); };
  } else {
    data = [&](Vec2 x) { return g.apply(spec.conv_at(x)) - spec.target_at(x); };
  }
  ResidualParts parts;
  parts.projected = l2_project(data, mesh, t, m, spec.quad_degree);
  ElementContext ctx(mesh, t, spec.quad_degree);
  double s = 0;
  for (int q = 0; q < ctx.num_points(); ++q) {
    Vec2 x = ctx.point(q);
    Vec2 r = data(x) - parts.projected.eval(x);
    s += ctx.weight(q) * r.squared_norm();
  }
  parts.osc = std::sqrt(std::max(0.0, s));
  return parts;
}

LocalPolyVec combine_residual(const Mesh& mesh, int t, const OcpSolution& sol,
                              const ProblemSpec& spec, Equation which,
                              const LocalPolyVec& projected_data) {
  LocalPolyVec r = projected_data;
  if (which == Equation::state) {
    // + u_K - kappa y_T; the P1 Laplacian and P0 pressure gradient vanish.
    Vec2 u = sol.u.on_triangle[t];
    Mat2 gy = sol.y.gradient(mesh, t);
    Vec2 yc = sol.y.eval(mesh, t, {1.0 / 3.0, 1.0 / 3.0});
    for (int c = 0; c < 2; ++c) {
      LocalPoly lin = linear_poly(r.comp[c].center, r.comp[c].scale, u[c] - spec.kappa * yc[c],
                                  Vec2{-spec.kappa * gy[c][0], -spec.kappa * gy[c][1]});
      for (size_t k = 0; k < r.comp[c].coef.size() && k < 3; ++k)
        r.comp[c].coef[k] += lin.coef[k];
    }
  } else {
    // + y_T - kappa w_T.
    Mat2 gy = sol.y.gradient(mesh, t);
    Mat2 gw = sol.w.gradient(mesh, t);
    Vec2 yc = sol.y.eval(mesh, t, {1.0 / 3.0, 1.0 / 3.0});
    Vec2 wc = sol.w.eval(mesh, t, {1.0 / 3.0, 1.0 / 3.0});
    for (int c = 0; c < 2; ++c) {
      Vec2 grad{gy[c][0] - spec.kappa * gw[c][0], gy[c][1] - spec.kappa * gw[c][1]};
      LocalPoly lin =
          linear_poly(r.comp[c].center, r.comp[c].scale, yc[c] - spec.kappa * wc[c], grad);
      for (size_t k = 0; k < r.comp[c].coef.size() && k < 3; ++k)
        r.comp[c].coef[k] += lin.coef[k];
    }
  }
  return r;
}

double poly_l2_norm(const Mesh& mesh, int t, const LocalPolyVec& p, int quad_degree) {
  ElementContext ctx(mesh, t, quad_degree);
  double s = 0;
  for (int q = 0; q < ctx.num_points(); ++q) {
    Vec2 v = p.eval(ctx.point(q));
    s += ctx.weight(q) * v.squared_norm();
  }
  return std::sqrt(std::max(0.0, s));
}

}  // namespace

LocalPolyVec element_residual(const Mesh& mesh, int t, const OcpSolution& sol,
                              const ProblemSpec& spec, Equation which) {
  int m = residual_projection_degree();
  ResidualParts parts = project_data_part(mesh, t, sol, spec, which, m);
  return combine_residual(mesh, t, sol, spec, which, parts.projected);
}

double oscillation_norm(const Mesh& mesh, int t, const OcpSolution& sol,
                        const ProblemSpec& spec, Equation which) {
  int m = residual_projection_degree();
  return project_data_part(mesh, t, sol, spec, which, m).osc;
}

Vec2 edge_trace(const Mesh& mesh, int edge_id, int t, const OcpSolution& sol,
                const ProblemSpec& spec, Equation which) {
  const auto& te = mesh.triangle_edges[t];
  int local = -1;
  for (int e = 0; e < 3; ++e)
    if (te[e] == edge_id) local = e;
  if (local < 0) throw InvalidParameterError("edge_trace: edge does not belong to triangle");
  ElementGeometry g = geometry(mesh, t);
  Vec2 n = g.normal[local];
  if (which == Equation::state) {
    Mat2 gy = sol.y.gradient(mesh, t);
    return -spec.eps * gy.apply(n) + sol.p.on_triangle[t] * n;
  }
  Mat2 gw = sol.w.gradient(mesh, t);
  return -spec.eps * gw.apply(n) - sol.q.on_triangle[t] * n;
}

Vec2 edge_jump(const Mesh& mesh, int edge_id, const OcpSolution& sol, const ProblemSpec& spec,
               Equation which) {
  const Mesh::Edge& ed = mesh.edges[edge_id];
  if (ed.boundary) throw InvalidParameterError("edge_jump: not an interior edge");
  return edge_trace(mesh, edge_id, ed.tri[0], sol, spec, which) +
         edge_trace(mesh, edge_id, ed.tri[1], sol, spec, which);
}

double control_indicator(const Mesh& mesh, int t, const VelocityField& w, const ControlField& u,
                         const ProblemSpec& spec) {
  if (!(spec.theta > 0))
    throw InvalidParameterError("control_indicator: theta must be positive");
  ElementContext ctx(mesh, t, spec.quad_degree);
  double s = 0;
  for (int q = 0; q < ctx.num_points(); ++q) {
    Vec2 wq = w.eval(mesh, t, ctx.rule->points[q].ref);
    Vec2 tilde = clamp_project(wq * (-1.0 / spec.theta), spec.lower, spec.upper);
    s += ctx.weight(q) * (tilde - u.on_triangle[t]).squared_norm();
  }
  return std::sqrt(std::max(0.0, s));
}

ResidualWorkspace compute_residual_data(const Mesh& mesh, const OcpSolution& sol,
                                        const ProblemSpec& spec) {
  ResidualWorkspace ws;
  ws.element.resize(mesh.num_triangles());
  ws.edge.resize(mesh.num_edges());
  int m = residual_projection_degree();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    ElementResidualData& d = ws.element[t];
    ResidualParts st = project_data_part(mesh, t, sol, spec, Equation::state, m);
    ResidualParts ad = project_data_part(mesh, t, sol, spec, Equation::adjoint, m);
    d.interior_st = combine_residual(mesh, t, sol, spec, Equation::state, st.projected);
    d.interior_ad = combine_residual(mesh, t, sol, spec, Equation::adjoint, ad.projected);
    d.osc_st = st.osc;
    d.osc_ad = ad.osc;
    d.norm_st = poly_l2_norm(mesh, t, d.interior_st, spec.quad_degree);
    d.norm_ad = poly_l2_norm(mesh, t, d.interior_ad, spec.quad_degree);
    double area = mesh.triangle_area(t);
    d.div_y = std::abs(sol.y.divergence(mesh, t)) * std::sqrt(area);
    d.div_w = std::abs(sol.w.divergence(mesh, t)) * std::sqrt(area);
  }
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.edges[e].boundary) continue;
    ws.edge[e].jump_st = edge_jump(mesh, e, sol, spec, Equation::state);
    ws.edge[e].jump_ad = edge_jump(mesh, e, sol, spec, Equation::adjoint);
  }
  return ws;
}

ResidualIndicators residual_indicators(const Mesh& mesh, int t, const ResidualWorkspace& data) {
  const ElementResidualData& d = data.element[t];
  ElementGeometry g = geometry(mesh, t);
  double jump_st = 0, jump_ad = 0;
  for (int e = 0; e < 3; ++e) {
    int id = mesh.triangle_edges[t][e];
    if (mesh.edges[id].boundary) continue;
    double hg = g.edge_length[e];
    jump_st += g.h * data.edge[id].jump_st.squared_norm() * hg;
    jump_ad += g.h * data.edge[id].jump_ad.squared_norm() * hg;
  }
  double h2 = g.h * g.h;
  ResidualIndicators out;
  out.eta_y =
      std::sqrt(d.div_y * d.div_y + jump_st + h2 * (d.norm_st * d.norm_st + d.osc_st * d.osc_st));
  out.eta_p = out.eta_y;
  out.eta_w =
      std::sqrt(d.div_w * d.div_w + jump_ad + h2 * (d.norm_ad * d.norm_ad + d.osc_ad * d.osc_ad));
  out.eta_q = out.eta_w;
  return out;
}

}  // namespace oseenctrl
