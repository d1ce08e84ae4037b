#pragma once

#include <Eigen/Sparse>
#include <string>

#include "oseenctrl/adaptivity.hpp"

namespace oseenctrl {

/// Convergence history CSV. Schema:
/// iter,nv,ne,ndof,eta_y,eta_p,eta_w,eta_q,eta_u,upsilon,err_y,err_p,err_w,err_q,err_u,err_total,effectivity,wall_ms
/// Error cells are left empty for cases without exact solutions. When
/// constants are given they are echoed as '#' comment lines above the header.
void emit_csv(const AfemHistory& history, const std::string& path,
              const ReliabilityConstants* constants = nullptr);

/// Wireframe SVG of the mesh; with indicators, elements are shaded by
/// log upsilon_K.
void emit_svg(const Mesh& mesh, const std::string& path,
              const IndicatorField* indicators = nullptr);

/// Plain-text mesh dump: 'mesh 2', then 'v x y', 't i j k r', 'b i j' lines.
void dump_mesh(const Mesh& mesh, const std::string& path);
Mesh read_mesh_dump(const std::string& path);

/// Per-element indicator CSV: K,eta_y,eta_p,eta_w,eta_q,eta_u.
void emit_indicator_csv(const IndicatorField& indicators, const std::string& path);

/// Coordinate-format matrix dump: one 'i j value' line per stored entry.
void dump_matrix(const Eigen::SparseMatrix<double>& m, const std::string& path);

/// Certification/run report with the constants and max residuals of a run.
void emit_run_report(const AfemHistory& history, const ReliabilityConstants* constants,
                     const std::string& path);

}  // namespace oseenctrl
