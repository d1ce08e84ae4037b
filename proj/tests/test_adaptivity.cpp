#include <doctest.h>

#include <random>

#include "oseenctrl/adaptivity.hpp"
#include "oseenctrl/benchmarks.hpp"

using namespace oseenctrl;

TEST_CASE("total indicator combination") {
  ReliabilityConstants c;
  c.weight_y = 2.0;
  c.weight_w = 3.0;
  c.weight_u = 5.0;
  c.rho = 1.0;
  c.beta = 1.0;

  IndicatorParts zero;
  CHECK(total_indicator(zero, &c, EstimatorMode::guaranteed) == doctest::Approx(0.0));

  IndicatorParts only_y;
  only_y.eta_y = 1.0;
  CHECK(total_indicator(only_y, &c, EstimatorMode::guaranteed) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

  IndicatorParts ones{1, 1, 1, 1, 1};
  CHECK(total_indicator(ones, nullptr, EstimatorMode::residual) ==
        doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
  CHECK_THROWS_AS(total_indicator(ones, nullptr, EstimatorMode::guaranteed), ModeError);
}

TEST_CASE("mean-value marking") {
  IndicatorField f;
  f.upsilon = {2.0, 1.0, 1.0};
  std::set<int> m = mark(f, 3);
  CHECK(m == std::set<int>{0});

  f.upsilon = {1.0, 1.0, 1.0, 1.0};
  CHECK(mark(f, 4).size() == 4);

  f.upsilon = {0.0, 0.0};
  CHECK(mark(f, 2).size() == 2);  // all marked in the degenerate all-zero case

  // the argmax element always satisfies the threshold
  std::mt19937 rng(71);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    IndicatorField g;
    int n = 1 + trial % 17;
    for (int i = 0; i < n; ++i) g.upsilon.push_back(unif(rng));
    std::set<int> marked = mark(g, n);
    CHECK_FALSE(marked.empty());
    int argmax = 0;
    for (int i = 0; i < n; ++i)
      if (g.upsilon[i] > g.upsilon[argmax]) argmax = i;
    CHECK(marked.count(argmax) == 1);
  }

  CHECK_THROWS_AS(mark(f, 5), InvalidParameterError);
}

TEST_CASE("estimate totals are root-sum-squares of the element values") {
  ManufacturedCase c = case_library("bubble2d");
  Mesh m = build_initial_mesh(c.domain);
  m = uniform_refine(m);
  OcpConfig ocp;
  ocp.tol = 1e-11;
  OcpSolution sol = solve_ocp(m, c.spec, ocp);
  ReliabilityConstants constants = constants_for(c.spec, m);

  for (EstimatorMode mode : {EstimatorMode::guaranteed, EstimatorMode::residual}) {
    IndicatorField f = estimate(m, sol, c.spec, &constants, mode);
    REQUIRE(f.size() == m.num_triangles());
    double s = 0;
    for (double u : f.upsilon) {
      CHECK(u >= 0);
      s += u * u;
    }
    CHECK(f.total_upsilon == doctest::Approx(std::sqrt(s)).epsilon(1e-12));
    double sy = 0;
    for (double e : f.eta_y) sy += e * e;
    CHECK(f.total_eta_y == doctest::Approx(std::sqrt(sy)).epsilon(1e-12));
    // per-element recombination matches the stored upsilon
    for (int t = 0; t < f.size(); ++t) {
      IndicatorParts parts{f.eta_y[t], f.eta_p[t], f.eta_w[t], f.eta_q[t], f.eta_u[t]};
      CHECK(f.upsilon[t] ==
            doctest::Approx(total_indicator(parts, &constants, mode)).epsilon(1e-12));
    }
  }
}

TEST_CASE("estimate in guaranteed mode requires constants") {
  ManufacturedCase c = case_library("bubble2d");
  Mesh m = build_initial_mesh(c.domain);
  OcpSolution sol = solve_ocp(m, c.spec);
  CHECK_THROWS_AS(estimate(m, sol, c.spec, nullptr, EstimatorMode::guaranteed), ModeError);
}

TEST_CASE("zero-iteration run produces a single record on the initial mesh") {
  ManufacturedCase c = case_library("bubble2d");
  AfemConfig cfg;
  cfg.max_iterations = 0;
  AfemHistory h = afem_run(c.spec, c.domain, cfg, error_evaluator(c));
  REQUIRE(h.records.size() == 1);
  CHECK(h.records[0].ne == 4);
  CHECK(h.records[0].ndof == 36);
  CHECK(h.final_mesh.num_triangles() == 4);
}

TEST_CASE("short adaptive run: guaranteed bound, growth and certification") {
  ManufacturedCase c = case_library("bubble2d");
  AfemConfig cfg;
  cfg.max_iterations = 4;
  cfg.mode = EstimatorMode::guaranteed;
  cfg.compute_both_estimators = true;
  AfemHistory h = afem_run(c.spec, c.domain, cfg, error_evaluator(c));
  REQUIRE(h.records.size() == 5);
  long prev_ndof = 0;
  for (const auto& r : h.records) {
    CHECK(r.ndof > prev_ndof);  // strictly increasing
    prev_ndof = r.ndof;
    REQUIRE(r.errors.has_value());
    CHECK(r.errors->total <= r.upsilon * (1.0 + 1e-6));  // guaranteed bound
    CHECK(r.max_moment_residual <= 1e-9);
    CHECK(r.max_sigma_residual <= 1e-9);
    REQUIRE(r.upsilon_guaranteed.has_value());
    REQUIRE(r.upsilon_residual.has_value());
    CHECK(*r.upsilon_guaranteed == doctest::Approx(r.upsilon));
    CHECK(*r.upsilon_residual > 0);
    REQUIRE(r.effectivity.has_value());
    CHECK(*r.effectivity >= 1.0);
  }
  CHECK(h.final_mesh.num_triangles() > h.initial_mesh.num_triangles());
}

TEST_CASE("marking is deterministic across repeated estimation") {
  ManufacturedCase c = case_library("bubble2d");
  Mesh m = build_initial_mesh(c.domain);
  m = uniform_refine(m);
  OcpSolution sol = solve_ocp(m, c.spec);
  ReliabilityConstants constants = constants_for(c.spec, m);
  IndicatorField f1 = estimate(m, sol, c.spec, &constants, EstimatorMode::guaranteed);
  IndicatorField f2 = estimate(m, sol, c.spec, &constants, EstimatorMode::guaranteed);
  CHECK(mark(f1, m.num_triangles()) == mark(f2, m.num_triangles()));
  // the residual-mode marked set on the same solution is also deterministic
  IndicatorField r1 = estimate(m, sol, c.spec, &constants, EstimatorMode::residual);
  IndicatorField r2 = estimate(m, sol, c.spec, &constants, EstimatorMode::residual);
  CHECK(mark(r1, m.num_triangles()) == mark(r2, m.num_triangles()));
  CHECK_FALSE(mark(r1, m.num_triangles()).empty());
}

TEST_CASE("guaranteed and residual marked sets on one solution") {
  // the two indicator fields are not proportional in general; the marked
  // sets may differ and are logged for comparison
  ManufacturedCase c = case_library("lshape2d");
  Mesh m = build_initial_mesh(c.domain);
  m = uniform_refine(m);
  m = uniform_refine(m);
  OcpSolution sol = solve_ocp(m, c.spec);
  ReliabilityConstants constants = constants_for(c.spec, m);
  IndicatorField g = estimate(m, sol, c.spec, &constants, EstimatorMode::guaranteed);
  IndicatorField r = estimate(m, sol, c.spec, &constants, EstimatorMode::residual);
  std::set<int> mg = mark(g, m.num_triangles());
  std::set<int> mr = mark(r, m.num_triangles());
  CHECK_FALSE(mg.empty());
  CHECK_FALSE(mr.empty());
  int common = 0;
  for (int t : mg) common += mr.count(t);
  MESSAGE("guaranteed marks ", mg.size(), ", residual marks ", mr.size(), ", overlap ",
          common);
  // proportional fields would give identical sets; verify the equality holds
  // exactly when proportionality holds
  bool proportional = true;
  double ref = -1;
  for (int t = 0; t < m.num_triangles(); ++t) {
    if (r.upsilon[t] < 1e-300) continue;
    double ratio = g.upsilon[t] / r.upsilon[t];
    if (ref < 0)
      ref = ratio;
    else if (std::abs(ratio - ref) > 1e-9 * ref)
      proportional = false;
  }
  if (proportional) CHECK(mg == mr);
}

TEST_CASE("missing beta fails guaranteed runs with a mode error") {
  ManufacturedCase c = case_library("bubble2d");
  c.spec.beta.reset();
  Mesh m = build_initial_mesh(c.domain);
  CHECK_THROWS_AS(constants_for(c.spec, m), MissingInfSupError);
  // residual mode still runs
  AfemConfig cfg;
  cfg.max_iterations = 1;
  cfg.mode = EstimatorMode::residual;
  AfemHistory h = afem_run(c.spec, c.domain, cfg, error_evaluator(c));
  CHECK(h.records.size() == 2);
}

TEST_CASE("solver failures carry the afem iteration index") {
  ManufacturedCase c = case_library("bubble2d");
  AfemConfig cfg;
  cfg.max_iterations = 2;
  cfg.ocp.tol = 1e-30;  // unreachable within a single sweep
  cfg.ocp.max_iter = 1;
  try {
    afem_run(c.spec, c.domain, cfg, error_evaluator(c));
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("afem iteration 0") != std::string::npos);
  }
}
