#pragma once

#include <chrono>
#include <functional>
#include <optional>

#include "oseenctrl/equilibrated_estimators.hpp"

namespace oseenctrl {

enum class EstimatorMode { guaranteed, residual };

/// Per-element indicators and their combination driving the marking step.
struct IndicatorField {
  EstimatorMode mode = EstimatorMode::guaranteed;
  std::vector<double> eta_y, eta_p, eta_w, eta_q, eta_u;
  std::vector<double> upsilon;  // per-element total
  double total_eta_y = 0, total_eta_p = 0, total_eta_w = 0, total_eta_q = 0, total_eta_u = 0;
  double total_upsilon = 0;
  double max_moment_residual = 0.0;  // certification echo (guaranteed mode)
  double max_sigma_residual = 0.0;

  int size() const { return static_cast<int>(upsilon.size()); }
};

struct IndicatorParts {
  double eta_y = 0, eta_p = 0, eta_w = 0, eta_q = 0, eta_u = 0;
};

/// Combined indicator of one element: a weighted root-sum-of-squares in
/// guaranteed mode, an unweighted one in residual mode.
double total_indicator(const IndicatorParts& parts, const ReliabilityConstants* weights,
                       EstimatorMode mode);

/// Mean-value marking: all elements whose squared indicator reaches the mean.
std::set<int> mark(const IndicatorField& indicators, int n_elements);

/// Runs the chosen estimator on one solution. Guaranteed mode requires
/// constants built from a valid inf-sup bound.
IndicatorField estimate(const Mesh& mesh, const OcpSolution& sol, const ProblemSpec& spec,
                        const ReliabilityConstants* constants, EstimatorMode mode);

struct ErrorBreakdown {
  double err_y = 0, err_p = 0, err_w = 0, err_q = 0, err_u = 0;
  double total = 0;
};

struct ConvergenceRecord {
  int iteration = 0;
  int nv = 0, ne = 0;
  long ndof = 0;
  double eta_y = 0, eta_p = 0, eta_w = 0, eta_q = 0, eta_u = 0;
  double upsilon = 0;
  std::optional<double> upsilon_guaranteed;  // present when computed this iteration
  std::optional<double> upsilon_residual;
  std::optional<ErrorBreakdown> errors;
  std::optional<double> effectivity;
  double wall_ms = 0;
  double max_moment_residual = 0, max_sigma_residual = 0;
};

struct AfemHistory {
  std::vector<ConvergenceRecord> records;
  Mesh initial_mesh;
  Mesh final_mesh;
};

struct AfemConfig {
  int max_iterations = 12;
  EstimatorMode mode = EstimatorMode::guaranteed;
  bool compute_both_estimators = false;
  OcpConfig ocp;
};

using ErrorEvaluator =
    std::function<ErrorBreakdown(const Mesh&, const OcpSolution&)>;
using IterationObserver =
    std::function<void(int iteration, const Mesh&, const OcpSolution&, const IndicatorField&)>;

/// SOLVE -> ESTIMATE -> MARK -> REFINE loop from the given initial mesh.
AfemHistory afem_run(const ProblemSpec& spec, Domain domain, const AfemConfig& config,
                     const ErrorEvaluator& errors = {}, const IterationObserver& observer = {});

/// Constants for the guaranteed estimator derived from the problem data and
/// the mesh bounding box. Throws when spec.beta is missing.
ReliabilityConstants constants_for(const ProblemSpec& spec, const Mesh& mesh);

}  // namespace oseenctrl
