#include "oseenctrl/adaptivity.hpp"

#include "oseenctrl/benchmarks.hpp"

namespace oseenctrl {

double total_indicator(const IndicatorParts& parts, const ReliabilityConstants* weights,
                       EstimatorMode mode) {
  if (mode == EstimatorMode::guaranteed) {
    if (!weights)
      throw ModeError("total_indicator: guaranteed mode requires reliability constants");
    return std::sqrt(weights->weight_y * parts.eta_y * parts.eta_y +
                     2.0 * weights->rho * parts.eta_p * parts.eta_p +
                     weights->weight_w * parts.eta_w * parts.eta_w +
                     2.0 * weights->rho * parts.eta_q * parts.eta_q +
                     weights->weight_u * parts.eta_u * parts.eta_u);
  }
  return std::sqrt(parts.eta_y * parts.eta_y + parts.eta_p * parts.eta_p +
                   parts.eta_w * parts.eta_w + parts.eta_q * parts.eta_q +
                   parts.eta_u * parts.eta_u);
}

std::set<int> mark(const IndicatorField& indicators, int n_elements) {
  if (n_elements != indicators.size())
    throw InvalidParameterError("mark: element count does not match the indicator field");
  double mean = 0.0;
  for (double u : indicators.upsilon) mean += u * u;
  mean /= std::max(1, n_elements);
  std::set<int> marked;
  for (int t = 0; t < n_elements; ++t)
    if (indicators.upsilon[t] * indicators.upsilon[t] >= mean) marked.insert(t);
  return marked;
}

ReliabilityConstants constants_for(const ProblemSpec& spec, const Mesh& mesh) {
  if (!spec.beta || !(*spec.beta > 0))
    throw MissingInfSupError("constants_for: the guaranteed estimator needs a positive beta");
  auto sides = bounding_box_sides(mesh);
  return compute_constants(spec.eps, spec.kappa, spec.theta, spec.rho,
                           spec.convection_inf_norm, *spec.beta, {sides[0], sides[1]});
}

IndicatorField estimate(const Mesh& mesh, const OcpSolution& sol, const ProblemSpec& spec,
                        const ReliabilityConstants* constants, EstimatorMode mode) {
  if (mode == EstimatorMode::guaranteed && !constants)
    throw ModeError("estimate: guaranteed mode requires reliability constants");
  const int n = mesh.num_triangles();
  IndicatorField field;
  field.mode = mode;
  field.eta_y.resize(n);
  field.eta_p.resize(n);
  field.eta_w.resize(n);
  field.eta_q.resize(n);
  field.eta_u.resize(n);
  field.upsilon.resize(n);

  ResidualWorkspace ws = compute_residual_data(mesh, sol, spec);
  for (int t = 0; t < n; ++t)
    field.eta_u[t] = control_indicator(mesh, t, sol.w, sol.u, spec);

  if (mode == EstimatorMode::guaranteed) {
    EquilibratedField eq = compute_equilibrated(mesh, sol, spec, *constants, ws);
    for (int t = 0; t < n; ++t) {
      field.eta_y[t] = eq.element[t].eta_y;
      field.eta_p[t] = eq.element[t].eta_p;
      field.eta_w[t] = eq.element[t].eta_w;
      field.eta_q[t] = eq.element[t].eta_q;
    }
    field.max_moment_residual = eq.max_moment_residual;
    field.max_sigma_residual = eq.max_sigma_residual;
  } else {
    for (int t = 0; t < n; ++t) {
      ResidualIndicators ri = residual_indicators(mesh, t, ws);
      field.eta_y[t] = ri.eta_y;
      field.eta_p[t] = ri.eta_p;
      field.eta_w[t] = ri.eta_w;
      field.eta_q[t] = ri.eta_q;
    }
  }

  double sy = 0, sp = 0, sw = 0, sq = 0, su = 0, st = 0;
  for (int t = 0; t < n; ++t) {
    IndicatorParts parts{field.eta_y[t], field.eta_p[t], field.eta_w[t], field.eta_q[t],
                         field.eta_u[t]};
    field.upsilon[t] = total_indicator(parts, constants, mode);
    sy += parts.eta_y * parts.eta_y;
    sp += parts.eta_p * parts.eta_p;
    sw += parts.eta_w * parts.eta_w;
    sq += parts.eta_q * parts.eta_q;
    su += parts.eta_u * parts.eta_u;
    st += field.upsilon[t] * field.upsilon[t];
  }
  field.total_eta_y = std::sqrt(sy);
  field.total_eta_p = std::sqrt(sp);
  field.total_eta_w = std::sqrt(sw);
  field.total_eta_q = std::sqrt(sq);
  field.total_eta_u = std::sqrt(su);
  field.total_upsilon = std::sqrt(st);
  return field;
}

AfemHistory afem_run(const ProblemSpec& spec, Domain domain, const AfemConfig& config,
                     const ErrorEvaluator& errors, const IterationObserver& observer) {
  AfemHistory history;
  Mesh mesh = build_initial_mesh(domain);
  history.initial_mesh = mesh;

  for (int it = 0; it <= config.max_iterations; ++it) {
    auto t0 = std::chrono::steady_clock::now();
    OcpSolution sol;
    try {
      sol = solve_ocp(mesh, spec, config.ocp);
    } catch (const std::exception& e) {
      throw SolverError("afem iteration " + std::to_string(it) + ": " + e.what());
    }

    std::optional<ReliabilityConstants> constants;
    if (config.mode == EstimatorMode::guaranteed || config.compute_both_estimators)
      constants = constants_for(spec, mesh);

    IndicatorField primary;
    try {
      primary = estimate(mesh, sol, spec, constants ? &*constants : nullptr, config.mode);
    } catch (const EquilibrationError& e) {
      throw EquilibrationError("afem iteration " + std::to_string(it) + ": " + e.what());
    } catch (const CompatibilityError& e) {
      throw CompatibilityError("afem iteration " + std::to_string(it) + ": " + e.what());
    }

    ConvergenceRecord rec;
    rec.iteration = it;
    rec.nv = mesh.num_vertices();
    rec.ne = mesh.num_triangles();
    rec.ndof = ndof(mesh);
    rec.eta_y = primary.total_eta_y;
    rec.eta_p = primary.total_eta_p;
    rec.eta_w = primary.total_eta_w;
    rec.eta_q = primary.total_eta_q;
    rec.eta_u = primary.total_eta_u;
    rec.upsilon = primary.total_upsilon;
    rec.max_moment_residual = primary.max_moment_residual;
    rec.max_sigma_residual = primary.max_sigma_residual;
    if (config.mode == EstimatorMode::guaranteed)
      rec.upsilon_guaranteed = primary.total_upsilon;
    else
      rec.upsilon_residual = primary.total_upsilon;

    if (config.compute_both_estimators) {
      EstimatorMode other = config.mode == EstimatorMode::guaranteed
                                ? EstimatorMode::residual
                                : EstimatorMode::guaranteed;
      IndicatorField secondary =
          estimate(mesh, sol, spec, constants ? &*constants : nullptr, other);
      if (other == EstimatorMode::guaranteed)
        rec.upsilon_guaranteed = secondary.total_upsilon;
      else
        rec.upsilon_residual = secondary.total_upsilon;
      rec.max_moment_residual =
          std::max(rec.max_moment_residual, secondary.max_moment_residual);
      rec.max_sigma_residual = std::max(rec.max_sigma_residual, secondary.max_sigma_residual);
    }

    if (errors) {
      rec.errors = errors(mesh, sol);
      if (rec.errors->total > 0) rec.effectivity = rec.upsilon / rec.errors->total;
    }
    auto t1 = std::chrono::steady_clock::now();
    rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    history.records.push_back(rec);

    if (observer) observer(it, mesh, sol, primary);
    if (it == config.max_iterations) break;
    std::set<int> marked = mark(primary, mesh.num_triangles());
    mesh = refine_conforming(mesh, marked);
  }
  history.final_mesh = mesh;
  return history;
}

}  // namespace oseenctrl
