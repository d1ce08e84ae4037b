#include "oseenctrl/equilibrated_estimators.hpp"

#include <Eigen/Dense>
#include <algorithm>

#include "oseenctrl/parallel.hpp"

namespace oseenctrl {

ElementMoments element_moments(const Mesh& mesh, int t, const OcpSolution& sol,
                               const ProblemSpec& spec, Equation which) {
  ElementContext ctx(mesh, t, spec.quad_degree);
  const double tau_k = spec.tau_k_scale * ctx.h * ctx.h;
  const bool st = which == Equation::state;

  Mat2 grad = st ? sol.y.gradient(mesh, t) : sol.w.gradient(mesh, t);
  double pressure = st ? sol.p.on_triangle[t] : sol.q.on_triangle[t];
  double pressure_sign = st ? +1.0 : -1.0;
  double conv_sign = st ? +1.0 : -1.0;  // sign of the (c.grad) term in the zero-order part

  ElementMoments out;
  double scale = 0.0;

  // Diffusion and pressure terms are exact (constant integrands).
  double diff_term[3][2], pres_term[3][2];
  for (int n = 0; n < 3; ++n) {
    for (int i = 0; i < 2; ++i) {
      Vec2 grad_row{grad[i][0], grad[i][1]};
      diff_term[n][i] = -spec.eps * ctx.area * grad_row.dot(ctx.grad_hat[n]);
      pres_term[n][i] = pressure_sign * pressure * ctx.area * ctx.grad_hat[n][i];
      scale += std::abs(diff_term[n][i]) + std::abs(pres_term[n][i]);
    }
  }

  double data_term[3][2] = {}, zero_term[3][2] = {}, stab_term[3][2] = {};
  for (int q = 0; q < ctx.num_points(); ++q) {
    double w = ctx.weight(q);
    Vec2 x = ctx.point(q);
    auto hat = ctx.hat(q);
    Vec2 c = spec.conv_at(x);
    Vec2 field = st ? sol.y.eval(mesh, t, ctx.rule->points[q].ref)
                    : sol.w.eval(mesh, t, ctx.rule->points[q].ref);
    Vec2 data = st ? spec.f_at(x) + sol.u.on_triangle[t]
                   : sol.y.eval(mesh, t, ctx.rule->points[q].ref) - spec.target_at(x);
    Vec2 conv = grad.apply(c);
    // zero-order part of the operator: kappa field +/- (c.grad) field
    Vec2 zero = spec.kappa * field + conv_sign * conv;
    // streamline stabilization residual:
    // state (c.grad)y + kappa y - data, adjoint (c.grad)w - kappa w + data
    Vec2 stab = conv + conv_sign * (spec.kappa * field - data);
    for (int n = 0; n < 3; ++n) {
      double cg = c.dot(ctx.grad_hat[n]);
      for (int i = 0; i < 2; ++i) {
        data_term[n][i] += w * data[i] * hat[n];
        zero_term[n][i] += -w * zero[i] * hat[n];
        stab_term[n][i] += -w * tau_k * stab[i] * cg;
      }
    }
  }

  for (int n = 0; n < 3; ++n) {
    for (int i = 0; i < 2; ++i) {
      double rhs = data_term[n][i] + diff_term[n][i] + zero_term[n][i] + pres_term[n][i] +
                   stab_term[n][i];
      out.target[n][i] = -rhs;
      scale +=
          std::abs(data_term[n][i]) + std::abs(zero_term[n][i]) + std::abs(stab_term[n][i]);
    }
  }
  out.scale = scale;
  return out;
}

namespace {

struct VertexIncidence {
  std::vector<std::vector<int>> triangles_at;  // per vertex
  std::vector<std::vector<int>> edges_at;

  explicit VertexIncidence(const Mesh& mesh) {
    triangles_at.resize(mesh.num_vertices());
    edges_at.resize(mesh.num_vertices());
    for (int t = 0; t < mesh.num_triangles(); ++t)
      for (int k = 0; k < 3; ++k) triangles_at[mesh.triangles[t].v[k]].push_back(t);
    for (int e = 0; e < mesh.num_edges(); ++e) {
      edges_at[mesh.edges[e].a].push_back(e);
      edges_at[mesh.edges[e].b].push_back(e);
    }
  }
};

int local_vertex(const Mesh& mesh, int t, int vertex) {
  for (int k = 0; k < 3; ++k)
    if (mesh.triangles[t].v[k] == vertex) return k;
  throw InvalidParameterError("vertex not in triangle");
}

bool edge_has_vertex(const Mesh::Edge& e, int v) { return e.a == v || e.b == v; }

}  // namespace

std::array<Vec2, 2> EdgeFluxSet::seen_from(const Mesh& mesh, int t, int local_edge) const {
  int id = mesh.triangle_edges[t][local_edge];
  const Mesh::Edge& ed = mesh.edges[id];
  double sign = (ed.tri[0] == t) ? 1.0 : -1.0;
  int first = mesh.triangles[t].v[(local_edge + 1) % 3];
  const Flux& f = flux[id];
  Vec2 va = f.at_a * sign, vb = f.at_b * sign;
  if (first == ed.a) return {va, vb};
  return {vb, va};
}

EdgeFluxSet equilibrate(const Mesh& mesh, const OcpSolution& sol, const ProblemSpec& spec,
                        Equation which, FluxCertification* cert) {
  VertexIncidence inc(mesh);
  std::vector<ElementMoments> moments(mesh.num_triangles());
  parallel_for(mesh.num_triangles(),
               [&](int t) { moments[t] = element_moments(mesh, t, sol, spec, which); });

  // Baseline flux per edge, seen from edges[e].tri[0]: the averaged one-sided
  // trace. It already carries the dominant flux content, so the patch solves
  // below only distribute the small equilibration defect; this keeps the
  // flux data of size O(jump) on locally graded meshes.
  std::vector<Vec2> baseline(mesh.num_edges(), Vec2{0, 0});
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Mesh::Edge& ed = mesh.edges[e];
    Vec2 trace0 = edge_trace(mesh, e, ed.tri[0], sol, spec, which);
    if (ed.boundary) {
      baseline[e] = -trace0;
    } else {
      Vec2 trace1 = edge_trace(mesh, e, ed.tri[1], sol, spec, which);
      baseline[e] = (trace1 - trace0) * 0.5;
    }
  }

  // First-order moments of the flux correction against the endpoint hats,
  // seen from edges[e].tri[0]. moment[e][0] pairs with vertex a.
  std::vector<std::array<Vec2, 2>> moment(mesh.num_edges(), {Vec2{0, 0}, Vec2{0, 0}});

  for (int vert = 0; vert < mesh.num_vertices(); ++vert) {
    const auto& tris = inc.triangles_at[vert];
    const auto& eds = inc.edges_at[vert];
    if (tris.empty()) continue;
    const int m = static_cast<int>(tris.size());
    const int ne = static_cast<int>(eds.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, ne);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m, 2);
    double patch_scale = 1.0;
    for (int r = 0; r < m; ++r) {
      int t = tris[r];
      int ln = local_vertex(mesh, t, vert);
      d(r, 0) = moments[t].target[ln][0];
      d(r, 1) = moments[t].target[ln][1];
      for (int le = 0; le < 3; ++le) {
        int id = mesh.triangle_edges[t][le];
        if (!edge_has_vertex(mesh.edges[id], vert)) continue;
        int col = static_cast<int>(std::find(eds.begin(), eds.end(), id) - eds.begin());
        double sign = (mesh.edges[id].tri[0] == t) ? 1.0 : -1.0;
        a(r, col) += sign;
        // subtract the baseline's moment: (g_hat, hat_n)_edge = g_hat h / 2
        double hg = (mesh.vertices[mesh.edges[id].b] - mesh.vertices[mesh.edges[id].a]).norm();
        d(r, 0) -= sign * baseline[id].x * hg / 2.0;
        d(r, 1) -= sign * baseline[id].y * hg / 2.0;
      }
      patch_scale += moments[t].scale;
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    Eigen::MatrixXd x = cod.solve(d);
    double resid = (a * x - d).norm();
    if (!(resid <= 1e-9 * patch_scale))
      throw EquilibrationError("equilibrate: vertex patch system inconsistent at vertex " +
                               std::to_string(vert) + " (residual " + std::to_string(resid) +
                               ")");
    for (int col = 0; col < ne; ++col) {
      int id = eds[col];
      int side = (mesh.edges[id].a == vert) ? 0 : 1;
      moment[id][side] = {x(col, 0), x(col, 1)};
    }
  }

  // Recover the linear edge flux: baseline plus the correction determined by
  // its two endpoint-hat moments.
  EdgeFluxSet out;
  out.flux.resize(mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Mesh::Edge& ed = mesh.edges[e];
    double h = (mesh.vertices[ed.b] - mesh.vertices[ed.a]).norm();
    Vec2 ma = moment[e][0], mb = moment[e][1];
    out.flux[e].at_a = baseline[e] + (ma * 2.0 - mb) * (2.0 / h);
    out.flux[e].at_b = baseline[e] + (mb * 2.0 - ma) * (2.0 / h);
  }

  // Certify the elementwise equilibration identities with the recovered flux.
  double max_rel = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    ElementGeometry g = geometry(mesh, t);
    double sums[3][2] = {};
    for (int le = 0; le < 3; ++le) {
      auto vals = out.seen_from(mesh, t, le);
      double h = g.edge_length[le];
      int first = (le + 1) % 3, second = (le + 2) % 3;
      for (int i = 0; i < 2; ++i) {
        // (g, hat_first)_edge and (g, hat_second)_edge for linear g.
        sums[first][i] += h / 6.0 * (2.0 * vals[0][i] + vals[1][i]);
        sums[second][i] += h / 6.0 * (vals[0][i] + 2.0 * vals[1][i]);
      }
    }
    const ElementMoments& mom = moments[t];
    for (int n = 0; n < 3; ++n)
      for (int i = 0; i < 2; ++i)
        max_rel =
            std::max(max_rel, std::abs(sums[n][i] - mom.target[n][i]) / (1.0 + mom.scale));
  }
  if (cert) cert->max_moment_residual = max_rel;
  if (!(max_rel <= 1e-9))
    throw EquilibrationError("equilibrate: moment certification failed, relative residual " +
                             std::to_string(max_rel));
  return out;
}

Mat2 ElementTensor::eval(Vec2 x) const {
  double X = (x.x - center.x) / scale;
  double Y = (x.y - center.y) / scale;
  double modes[6] = {1.0, X, Y, X * X, X * Y, Y * Y};
  Mat2 s;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 6; ++k) s[i][j] += coef[i][j][k] * modes[k];
  return s;
}

Vec2 ElementTensor::divergence(Vec2 x) const {
  double X = (x.x - center.x) / scale;
  double Y = (x.y - center.y) / scale;
  Vec2 d{0, 0};
  for (int i = 0; i < 2; ++i) {
    double dx = coef[i][0][1] + 2.0 * coef[i][0][3] * X + coef[i][0][4] * Y;
    double dy = coef[i][1][2] + coef[i][1][4] * X + 2.0 * coef[i][1][5] * Y;
    d[i] = (dx + dy) / scale;
  }
  return d;
}

ElementTensor local_tensor(const Mesh& mesh, int t, const LocalPolyVec& interior_residual,
                           const std::array<std::array<Vec2, 2>, 3>& edge_data) {
  ElementContext ctx(mesh, t, 7);
  ElementGeometry geom = geometry(mesh, t);
  ElementTensor tensor;
  tensor.center = interior_residual.comp[0].center;
  tensor.scale = interior_residual.comp[0].scale;
  const double h = tensor.scale;

  auto col = [](int i, int j, int k) { return (i * 2 + j) * 6 + k; };
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(24, 24);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(24);

  // Divergence constraints: -div sigma = R as linear polynomials.
  for (int i = 0; i < 2; ++i) {
    const auto& rc = interior_residual.comp[i].coef;
    double r0 = rc.empty() ? 0.0 : rc[0];
    double r1 = rc.size() > 1 ? rc[1] : 0.0;
    double r2 = rc.size() > 2 ? rc[2] : 0.0;
    int row = 3 * i;
    c(row, col(i, 0, 1)) = 1.0 / h;
    c(row, col(i, 1, 2)) = 1.0 / h;
    d(row) = -r0;
    c(row + 1, col(i, 0, 3)) = 2.0 / h;
    c(row + 1, col(i, 1, 4)) = 1.0 / h;
    d(row + 1) = -r1;
    c(row + 2, col(i, 0, 4)) = 1.0 / h;
    c(row + 2, col(i, 1, 5)) = 2.0 / h;
    d(row + 2) = -r2;
  }

  // Edge trace constraints: sigma n equals the linear edge data; the
  // quadratic mode of the trace is pinned to zero.
  for (int le = 0; le < 3; ++le) {
    Vec2 pa = ctx.corner[(le + 1) % 3];
    Vec2 pb = ctx.corner[(le + 2) % 3];
    Vec2 bigA = (pa - tensor.center) / h;
    Vec2 bigB = (pb - pa) / h;
    Vec2 n = geom.normal[le];
    // Trace of each scalar mode along x(s) = pa + s (pb - pa), in {1, s, s^2}.
    double tr[6][3] = {
        {1.0, 0.0, 0.0},
        {bigA.x, bigB.x, 0.0},
        {bigA.y, bigB.y, 0.0},
        {bigA.x * bigA.x, 2.0 * bigA.x * bigB.x, bigB.x * bigB.x},
        {bigA.x * bigA.y, bigA.x * bigB.y + bigA.y * bigB.x, bigB.x * bigB.y},
        {bigA.y * bigA.y, 2.0 * bigA.y * bigB.y, bigB.y * bigB.y},
    };
    for (int i = 0; i < 2; ++i) {
      Vec2 da = edge_data[le][0], db = edge_data[le][1];
      double data_coef[3] = {da[i], db[i] - da[i], 0.0};
      for (int mpow = 0; mpow < 3; ++mpow) {
        int row = 6 + le * 6 + i * 3 + mpow;
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < 6; ++k) c(row, col(i, j, k)) += n[j] * tr[k][mpow];
        d(row) = data_coef[mpow];
      }
    }
  }

  // Scalar P2 Gram matrix on the element.
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(6, 6);
  for (int q = 0; q < ctx.num_points(); ++q) {
    Vec2 x = ctx.point(q);
    double X = (x.x - tensor.center.x) / h;
    double Y = (x.y - tensor.center.y) / h;
    double modes[6] = {1.0, X, Y, X * X, X * Y, Y * Y};
    double w = ctx.weight(q);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) gram(i, j) += w * modes[i] * modes[j];
  }
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success)
    throw SolverError("local_tensor: singular scalar Gram matrix");

  // Minimum-L2-norm solution of the (redundant) constraints via the dual
  // system C M^{-1} C^T lambda = d.
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(24, 24);  // M^{-1} C^T
  Eigen::MatrixXd ct = c.transpose();
  for (int blk = 0; blk < 4; ++blk)
    y.block(6 * blk, 0, 6, 24) = llt.solve(ct.block(6 * blk, 0, 6, 24));
  Eigen::MatrixXd s = c * y;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(s);
  Eigen::VectorXd lambda = cod.solve(d);
  Eigen::VectorXd sigma = y * lambda;

  double resid = (c * sigma - d).norm();
  tensor.constraint_residual = resid / (1.0 + d.norm());
  if (!(tensor.constraint_residual <= 1e-9))
    throw CompatibilityError("local_tensor: incompatible data on element " + std::to_string(t) +
                             " (relative residual " +
                             std::to_string(tensor.constraint_residual) + ")");

  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 6; ++k) tensor.coef[i][j][k] = sigma(col(i, j, k));
  double norm2 = 0.0;
  for (int blk = 0; blk < 4; ++blk) {
    Eigen::VectorXd part = sigma.segment(6 * blk, 6);
    norm2 += part.dot(gram * part);
  }
  tensor.l2_norm = std::sqrt(std::max(0.0, norm2));
  return tensor;
}

double psi(double sigma_norm, double osc_norm, double c_element_value, double eps) {
  return sigma_norm / std::sqrt(eps) + c_element_value * osc_norm;
}

ComputableIndicators computable_indicators(double psi_st, double psi_ad, double div_y,
                                           double div_w, const ReliabilityConstants& c) {
  if (!(c.beta > 0))
    throw ModeError("computable_indicators: guaranteed mode requires an inf-sup constant");
  const double cis2 = c.c_is * c.c_is;
  const double cct2 = c.c_ct * c.c_ct;
  ComputableIndicators out;
  out.eta_y = std::sqrt(3.0 * psi_st * psi_st + cis2 * (1.0 + 2.0 * cct2) * div_y * div_y);
  out.eta_p = std::sqrt(2.0 * cis2 * ((1.0 + 3.0 * cct2) * psi_st * psi_st +
                                      cis2 * cct2 * (1.0 + 2.0 * cct2) * div_y * div_y));
  out.eta_w = std::sqrt(3.0 * psi_ad * psi_ad + cis2 * (1.0 + 2.0 * cct2) * div_w * div_w);
  out.eta_q = std::sqrt(2.0 * cis2 * ((1.0 + 3.0 * cct2) * psi_ad * psi_ad +
                                      cis2 * cct2 * (1.0 + 2.0 * cct2) * div_w * div_w));
  return out;
}

std::array<std::array<Vec2, 2>, 3> tensor_edge_data(const Mesh& mesh, int t,
                                                    const EdgeFluxSet& fluxes,
                                                    const OcpSolution& sol,
                                                    const ProblemSpec& spec, Equation which) {
  std::array<std::array<Vec2, 2>, 3> data;
  for (int le = 0; le < 3; ++le) {
    int id = mesh.triangle_edges[t][le];
    Vec2 trace = edge_trace(mesh, id, t, sol, spec, which);
    auto g = fluxes.seen_from(mesh, t, le);
    data[le][0] = g[0] + trace;
    data[le][1] = g[1] + trace;
  }
  return data;
}

EquilibratedField compute_equilibrated(const Mesh& mesh, const OcpSolution& sol,
                                       const ProblemSpec& spec,
                                       const ReliabilityConstants& constants,
                                       const ResidualWorkspace& residuals) {
  EquilibratedField field;
  const int n = mesh.num_triangles();
  field.element.resize(n);
  field.psi_st.resize(n);
  field.psi_ad.resize(n);
  field.sigma_norm_st.resize(n);
  field.sigma_norm_ad.resize(n);

  FluxCertification cert_st, cert_ad;
  EdgeFluxSet flux_st = equilibrate(mesh, sol, spec, Equation::state, &cert_st);
  EdgeFluxSet flux_ad = equilibrate(mesh, sol, spec, Equation::adjoint, &cert_ad);
  field.max_moment_residual =
      std::max(cert_st.max_moment_residual, cert_ad.max_moment_residual);

  std::vector<double> sigma_resid(n, 0.0);
  parallel_for(n, [&](int t) {
    const ElementResidualData& rd = residuals.element[t];
    ElementTensor sig_st = local_tensor(
        mesh, t, rd.interior_st, tensor_edge_data(mesh, t, flux_st, sol, spec, Equation::state));
    ElementTensor sig_ad =
        local_tensor(mesh, t, rd.interior_ad,
                     tensor_edge_data(mesh, t, flux_ad, sol, spec, Equation::adjoint));
    double ck = c_element(geometry(mesh, t).h, spec.eps, spec.kappa);
    field.sigma_norm_st[t] = sig_st.l2_norm;
    field.sigma_norm_ad[t] = sig_ad.l2_norm;
    field.psi_st[t] = psi(sig_st.l2_norm, rd.osc_st, ck, spec.eps);
    field.psi_ad[t] = psi(sig_ad.l2_norm, rd.osc_ad, ck, spec.eps);
    field.element[t] = computable_indicators(field.psi_st[t], field.psi_ad[t], rd.div_y,
                                             rd.div_w, constants);
    sigma_resid[t] = std::max(sig_st.constraint_residual, sig_ad.constraint_residual);
  });
  for (double r : sigma_resid) field.max_sigma_residual = std::max(field.max_sigma_residual, r);
  return field;
}

}  // namespace oseenctrl
