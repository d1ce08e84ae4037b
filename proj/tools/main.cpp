#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "oseenctrl/benchmarks.hpp"
#include "oseenctrl/io.hpp"

using namespace oseenctrl;

int main(int argc, char** argv) {
  CLI::App app{"Adaptive stabilized FEM solver for control-constrained Oseen flow"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run the adaptive loop on a benchmark example");
  std::string example = "bubble2d";
  int refinements = 12;
  std::string estimator = "computable";
  std::string out_dir = "out";
  double beta_override = 0.0;
  double rho = -1.0, theta = -1.0, tau_k_scale = -1.0;
  bool svg = false, verbose = false;
  run->add_option("--example", example, "bubble2d | layer2d | lshape2d | tshape2d")
      ->required();
  run->add_option("--refinements", refinements, "number of adaptive refinement steps");
  run->add_option("--estimator", estimator, "computable | residual")
      ->check(CLI::IsMember({"computable", "residual"}));
  run->add_option("--beta", beta_override, "override the inf-sup constant");
  run->add_option("--rho", rho, "pressure weight in the error norm");
  run->add_option("--theta", theta, "control regularization parameter");
  run->add_option("--tau-k-scale", tau_k_scale, "scale of the element stabilization tau_K");
  run->add_option("--out", out_dir, "output directory");
  run->add_flag("--svg", svg, "write per-iteration mesh SVGs");
  run->add_flag("--verbose", verbose, "log solver iterations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ManufacturedCase c = case_library(example);
    if (beta_override > 0) c.spec.beta = beta_override;
    if (rho > 0) c.spec.rho = rho;
    if (theta > 0) {
      c.spec.theta = theta;
      // Data derivation depends on theta through the projection formula.
      DerivedData d = derive_data(c);
      c.spec.source = d.f;
      c.spec.y_target = d.y_target;
      c.exact_control = d.u_exact;
    }
    if (tau_k_scale > 0) c.spec.tau_k_scale = tau_k_scale;

    AfemConfig config;
    config.max_iterations = refinements;
    config.mode =
        estimator == "computable" ? EstimatorMode::guaranteed : EstimatorMode::residual;
    config.ocp.verbose = verbose;

    std::filesystem::create_directories(out_dir);
    IndicatorField last_indicators;
    IterationObserver observer = [&](int it, const Mesh& mesh, const OcpSolution&,
                                     const IndicatorField& ind) {
      last_indicators = ind;
      if (svg) {
        char name[64];
        std::snprintf(name, sizeof(name), "/%s_iter%02d.svg", example.c_str(), it);
        emit_svg(mesh, out_dir + name, &ind);
      }
    };

    AfemHistory history = afem_run(c.spec, c.domain, config, error_evaluator(c), observer);

    std::optional<ReliabilityConstants> constants;
    if (config.mode == EstimatorMode::guaranteed)
      constants = constants_for(c.spec, history.final_mesh);
    emit_csv(history, out_dir + "/" + example + ".csv", constants ? &*constants : nullptr);
    emit_run_report(history, constants ? &*constants : nullptr,
                    out_dir + "/" + example + "_report.txt");
    dump_mesh(history.final_mesh, out_dir + "/" + example + "_final.mesh");
    if (last_indicators.size() > 0)
      emit_indicator_csv(last_indicators, out_dir + "/" + example + "_indicators.csv");

    const auto& last = history.records.back();
    std::cout << example << ": " << history.records.size() << " iterations, final ndof "
              << last.ndof << ", upsilon " << last.upsilon;
    if (last.errors) std::cout << ", error " << last.errors->total;
    std::cout << "\n";
    return 0;
  } catch (const InvalidParameterError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
