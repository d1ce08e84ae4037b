#include "oseenctrl/benchmarks.hpp"

#include "oseenctrl/ocp_solver.hpp"

namespace oseenctrl {

namespace {

/// Value and first three derivatives of a univariate factor.
struct Uni {
  double v = 0, d1 = 0, d2 = 0, d3 = 0;
};
using UniFn = std::function<Uni(double)>;

/// Scalar potential of the separable form F(x1) G(x2) T(x1+x2) with all
/// partial derivatives up to third order. T may be absent (constant one).
/// Velocities are built as curl phi = (d2 phi, -d1 phi), which makes them
/// exactly solenoidal and zero wherever phi has a double root.
struct SeparablePotential {
  UniFn f, g, t;

  struct Partials {
    double p1, p2;          // gradient
    double p11, p12, p22;   // second order
    double p111, p112, p122, p222;
  };

  Partials partials(Vec2 x) const {
    Uni F = f(x.x);
    Uni G = g(x.y);
    Uni T = t ? t(x.x + x.y) : Uni{1, 0, 0, 0};
    Partials r;
    r.p1 = F.d1 * G.v * T.v + F.v * G.v * T.d1;
    r.p2 = F.v * G.d1 * T.v + F.v * G.v * T.d1;
    r.p11 = F.d2 * G.v * T.v + 2 * F.d1 * G.v * T.d1 + F.v * G.v * T.d2;
    r.p12 = F.d1 * G.d1 * T.v + F.d1 * G.v * T.d1 + F.v * G.d1 * T.d1 + F.v * G.v * T.d2;
    r.p22 = F.v * G.d2 * T.v + 2 * F.v * G.d1 * T.d1 + F.v * G.v * T.d2;
    r.p111 = F.d3 * G.v * T.v + 3 * F.d2 * G.v * T.d1 + 3 * F.d1 * G.v * T.d2 +
             F.v * G.v * T.d3;
    r.p112 = F.d2 * G.d1 * T.v + F.d2 * G.v * T.d1 + 2 * F.d1 * G.d1 * T.d1 +
             2 * F.d1 * G.v * T.d2 + F.v * G.d1 * T.d2 + F.v * G.v * T.d3;
    r.p122 = F.d1 * G.d2 * T.v + 2 * F.d1 * G.d1 * T.d1 + F.d1 * G.v * T.d2 +
             F.v * G.d2 * T.d1 + 2 * F.v * G.d1 * T.d2 + F.v * G.v * T.d3;
    r.p222 = F.v * G.d3 * T.v + 3 * F.v * G.d2 * T.d1 + 3 * F.v * G.d1 * T.d2 +
             F.v * G.v * T.d3;
    return r;
  }
};

ExactVelocity curl_of(SeparablePotential phi) {
  ExactVelocity v;
  v.value = [phi](Vec2 x) {
    auto p = phi.partials(x);
    return Vec2{p.p2, -p.p1};
  };
  v.grad = [phi](Vec2 x) {
    auto p = phi.partials(x);
    Mat2 g;
    g[0][0] = p.p12;
    g[0][1] = p.p22;
    g[1][0] = -p.p11;
    g[1][1] = -p.p12;
    return g;
  };
  v.laplacian = [phi](Vec2 x) {
    auto p = phi.partials(x);
    return Vec2{p.p112 + p.p222, -(p.p111 + p.p122)};
  };
  return v;
}

// t^2 (1-t)^2 and derivatives.
Uni quartic_bump(double t) {
  Uni u;
  u.v = t * t * (1 - t) * (1 - t);
  u.d1 = 2 * t - 6 * t * t + 4 * t * t * t;
  u.d2 = 2 - 12 * t + 12 * t * t;
  u.d3 = -12 + 24 * t;
  return u;
}

// sin^2(2 pi t) and derivatives.
Uni sine_squared(double t) {
  const double w = 2 * M_PI;
  Uni u;
  u.v = std::sin(w * t) * std::sin(w * t);
  u.d1 = w * std::sin(2 * w * t);
  u.d2 = 2 * w * w * std::cos(2 * w * t);
  u.d3 = -4 * w * w * w * std::sin(2 * w * t);
  return u;
}

// The boundary-layer factor E(t) = (exp(-100 t) - exp(-100)) / (1 - exp(-100)).
Uni layer_term(double t) {
  const double denom = 1.0 - std::exp(-100.0);
  double e = std::exp(-100.0 * t);
  Uni u;
  u.v = (e - std::exp(-100.0)) / denom;
  u.d1 = -100.0 * e / denom;
  u.d2 = 1.0e4 * e / denom;
  u.d3 = -1.0e6 * e / denom;
  return u;
}

// t (1 - t - E(t)) and derivatives.
Uni layer_factor(double t) {
  Uni E = layer_term(t);
  Uni u;
  u.v = t * (1 - t - E.v);
  u.d1 = 1 - 2 * t - E.v - t * E.d1;
  u.d2 = -2 - 2 * E.d1 - t * E.d2;
  u.d3 = -3 * E.d2 - t * E.d3;
  return u;
}

Uni square_factor(double t) { return Uni{t * t, 2 * t, 2.0, 0.0}; }

Uni one_minus_sq(double s) { return Uni{(1 - s) * (1 - s), -2 * (1 - s), 2.0, 0.0}; }

/// Area-weighted mean of a scalar function, computed on a refined mesh so
/// that the zero-mean shift of the exact pressures is accurate.
double domain_mean(Domain domain, const ScalarFn& f) {
  Mesh mesh = build_initial_mesh(domain);
  for (int i = 0; i < 6; ++i) mesh = uniform_refine(mesh);
  double integral = 0, area = 0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    ElementContext ctx(mesh, t, 7);
    for (int q = 0; q < ctx.num_points(); ++q) {
      integral += ctx.weight(q) * f(ctx.point(q));
      area += ctx.weight(q);
    }
  }
  return integral / area;
}

ExactPressure shifted_pressure(Domain domain, ScalarFn value, VectorFn grad) {
  double mean = domain_mean(domain, value);
  ExactPressure p;
  p.value = [value, mean](Vec2 x) { return value(x) - mean; };
  p.grad = std::move(grad);
  return p;
}

ManufacturedCase bubble2d_case() {
  ManufacturedCase c;
  c.name = "bubble2d";
  c.domain = Domain::unit_square;
  c.has_exact = true;
  c.spec.eps = 1.0;
  c.spec.kappa = 1.0;
  c.spec.theta = 1.0;
  c.spec.rho = 1.0;
  c.spec.lower = {-0.5, -0.5};
  c.spec.upper = {0.5, 0.5};
  c.spec.convection = [](Vec2 x) { return Vec2{x.y, -x.x}; };
  c.spec.convection_inf_norm = std::sqrt(2.0);  // |(x2,-x1)| peaks at the corner (1,1)
  c.spec.beta = std::sin(M_PI / 8.0);

  SeparablePotential phi_y{quartic_bump, quartic_bump, nullptr};
  SeparablePotential phi_w{sine_squared, sine_squared, nullptr};
  c.state_velocity = curl_of(phi_y);
  c.adjoint_velocity = curl_of(phi_w);

  const double w = 2 * M_PI;
  c.state_pressure = shifted_pressure(
      c.domain, [w](Vec2 x) { return std::cos(w * x.x) * std::cos(w * x.y); },
      [w](Vec2 x) {
        return Vec2{-w * std::sin(w * x.x) * std::cos(w * x.y),
                    -w * std::cos(w * x.x) * std::sin(w * x.y)};
      });
  c.adjoint_pressure = shifted_pressure(
      c.domain, [w](Vec2 x) { return std::sin(w * x.x) * std::sin(w * x.y); },
      [w](Vec2 x) {
        return Vec2{w * std::cos(w * x.x) * std::sin(w * x.y),
                    w * std::sin(w * x.x) * std::cos(w * x.y)};
      });
  return c;
}

ManufacturedCase layer2d_case() {
  ManufacturedCase c;
  c.name = "layer2d";
  c.domain = Domain::unit_triangle;
  c.has_exact = true;
  c.spec.eps = 0.01;
  c.spec.kappa = 1.0;
  c.spec.theta = 1.0;
  c.spec.rho = 1.0;
  c.spec.lower = {0.0, 0.0};
  c.spec.upper = {0.1, 0.1};
  c.spec.convection = nullptr;
  c.spec.convection_inf_norm = 0.0;
  c.spec.beta = std::sin(M_PI / 16.0);

  // phi_y = x1 (1 - x1 - E(x1)) * x2^2 * (1 - x1 - x2)^2
  SeparablePotential phi_y{layer_factor, square_factor, one_minus_sq};
  // phi_w mirrors the roles of x1 and x2.
  SeparablePotential phi_w{square_factor, layer_factor, one_minus_sq};
  c.state_velocity = curl_of(phi_y);
  c.adjoint_velocity = curl_of(phi_w);

  const double w = 2 * M_PI;
  c.state_pressure = shifted_pressure(
      c.domain, [w](Vec2 x) { return std::cos(w * x.y) / 1024.0; },
      [w](Vec2 x) { return Vec2{0.0, -w * std::sin(w * x.y) / 1024.0}; });
  c.adjoint_pressure = shifted_pressure(
      c.domain, [w](Vec2 x) { return std::cos(w * x.x) / 1024.0; },
      [w](Vec2 x) { return Vec2{-w * std::sin(w * x.x) / 1024.0, 0.0}; });
  return c;
}

ManufacturedCase corner_case(const std::string& name, Domain domain, double beta) {
  ManufacturedCase c;
  c.name = name;
  c.domain = domain;
  c.has_exact = false;
  c.spec.eps = 1.0;
  c.spec.kappa = 0.0;
  c.spec.theta = 1.0;
  c.spec.rho = 1.0;
  c.spec.lower = {0.0, 0.0};
  c.spec.upper = {1.0, 1.0};
  c.spec.convection = nullptr;
  c.spec.convection_inf_norm = 0.0;
  c.spec.beta = beta;
  c.spec.source = [](Vec2) { return Vec2{1.0, 1.0}; };
  c.spec.y_target = [](Vec2 x) { return Vec2{x.y, -x.x}; };
  return c;
}

}  // namespace

DerivedData derive_data(const ManufacturedCase& c) {
  if (!c.has_exact) {
    DerivedData d;
    d.f = c.spec.source;
    d.y_target = c.spec.y_target;
    d.u_exact = nullptr;
    return d;
  }
  const ProblemSpec spec = c.spec;
  const ExactVelocity ybar = c.state_velocity;
  const ExactVelocity wbar = c.adjoint_velocity;
  const ExactPressure pbar = c.state_pressure;
  const ExactPressure qbar = c.adjoint_pressure;

  DerivedData d;
  d.u_exact = [spec, wbar](Vec2 x) {
    return clamp_project(wbar.value(x) * (-1.0 / spec.theta), spec.lower, spec.upper);
  };
  VectorFn u = d.u_exact;
  d.f = [spec, ybar, pbar, u](Vec2 x) {
    Vec2 conv = ybar.grad(x).apply(spec.conv_at(x));
    return ybar.laplacian(x) * (-spec.eps) + conv + ybar.value(x) * spec.kappa + pbar.grad(x) -
           u(x);
  };
  d.y_target = [spec, ybar, wbar, qbar](Vec2 x) {
    Vec2 conv = wbar.grad(x).apply(spec.conv_at(x));
    return ybar.value(x) + wbar.laplacian(x) * spec.eps + conv - wbar.value(x) * spec.kappa +
           qbar.grad(x);
  };
  return d;
}

ManufacturedCase case_library(const std::string& name) {
  ManufacturedCase c;
  if (name == "bubble2d")
    c = bubble2d_case();
  else if (name == "layer2d")
    c = layer2d_case();
  else if (name == "lshape2d")
    c = corner_case(name, Domain::l_shape, 0.1601);
  else if (name == "tshape2d")
    c = corner_case(name, Domain::t_shape, 0.1076);
  else
    throw InvalidParameterError("case_library: unknown example '" + name + "'");
  DerivedData d = derive_data(c);
  c.spec.source = d.f;
  c.spec.y_target = d.y_target;
  c.exact_control = d.u_exact;
  return c;
}

std::vector<std::string> case_names() {
  return {"bubble2d", "layer2d", "lshape2d", "tshape2d"};
}

long ndof(const Mesh& mesh) {
  return 4L * mesh.num_vertices() + 4L * mesh.num_triangles();
}

ErrorBreakdown compute_errors(const Mesh& mesh, const OcpSolution& sol,
                              const ManufacturedCase& c, double rho, int quad_degree) {
  if (!c.has_exact)
    throw InvalidParameterError("compute_errors: case '" + c.name + "' has no exact solution");
  double ey2 = 0, ep2 = 0, ew2 = 0, eq2 = 0, eu2 = 0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    ElementContext ctx(mesh, t, quad_degree);
    Mat2 gy = sol.y.gradient(mesh, t);
    Mat2 gw = sol.w.gradient(mesh, t);
    double pt = sol.p.on_triangle[t];
    double qt = sol.q.on_triangle[t];
    Vec2 ut = sol.u.on_triangle[t];
    for (int q = 0; q < ctx.num_points(); ++q) {
      double w = ctx.weight(q);
      Vec2 x = ctx.point(q);
      Vec2 ref = ctx.rule->points[q].ref;
      Vec2 dy = c.state_velocity.value(x) - sol.y.eval(mesh, t, ref);
      Vec2 dw = c.adjoint_velocity.value(x) - sol.w.eval(mesh, t, ref);
      Mat2 dgy = c.state_velocity.grad(x) - gy;
      Mat2 dgw = c.adjoint_velocity.grad(x) - gw;
      ey2 += w * (c.spec.eps * dgy.frobenius_squared() + c.spec.kappa * dy.squared_norm());
      ew2 += w * (c.spec.eps * dgw.frobenius_squared() + c.spec.kappa * dw.squared_norm());
      double dp = c.state_pressure.value(x) - pt;
      double dq = c.adjoint_pressure.value(x) - qt;
      ep2 += w * dp * dp;
      eq2 += w * dq * dq;
      Vec2 du = c.exact_control(x) - ut;
      eu2 += w * du.squared_norm();
    }
  }
  ErrorBreakdown e;
  e.err_y = std::sqrt(ey2);
  e.err_p = std::sqrt(ep2);
  e.err_w = std::sqrt(ew2);
  e.err_q = std::sqrt(eq2);
  e.err_u = std::sqrt(eu2);
  e.total = std::sqrt(ey2 + rho * ep2 + ew2 + rho * eq2 + eu2);
  return e;
}

ErrorEvaluator error_evaluator(const ManufacturedCase& c) {
  if (!c.has_exact) return {};
  double rho = c.spec.rho;
  return [c, rho](const Mesh& mesh, const OcpSolution& sol) {
    return compute_errors(mesh, sol, c, rho);
  };
}

}  // namespace oseenctrl
