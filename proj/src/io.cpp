#include "oseenctrl/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace oseenctrl {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << std::setprecision(12);
  return out;
}

std::string cell(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os << std::setprecision(12) << *v;
  return os.str();
}

}  // namespace

void emit_csv(const AfemHistory& history, const std::string& path,
              const ReliabilityConstants* constants) {
  std::ofstream out = open_out(path);
  if (constants) {
    out << "# poincare=" << constants->poincare << "\n";
    out << "# c_omega=" << constants->c_omega << "\n";
    out << "# c_ct=" << constants->c_ct << "\n";
    out << "# c_is=" << constants->c_is << "\n";
    out << "# beta=" << constants->beta << "\n";
    out << "# mu=" << constants->mu << "\n";
    out << "# omega=" << constants->omega << "\n";
    out << "# rho=" << constants->rho << "\n";
    out << "# weight_y=" << constants->weight_y << "\n";
    out << "# weight_w=" << constants->weight_w << "\n";
    out << "# weight_u=" << constants->weight_u << "\n";
  }
  out << "iter,nv,ne,ndof,eta_y,eta_p,eta_w,eta_q,eta_u,upsilon,"
         "err_y,err_p,err_w,err_q,err_u,err_total,effectivity,wall_ms\n";
  for (const auto& r : history.records) {
    out << r.iteration << ',' << r.nv << ',' << r.ne << ',' << r.ndof << ',' << r.eta_y << ','
        << r.eta_p << ',' << r.eta_w << ',' << r.eta_q << ',' << r.eta_u << ',' << r.upsilon
        << ',';
    if (r.errors) {
      out << r.errors->err_y << ',' << r.errors->err_p << ',' << r.errors->err_w << ','
          << r.errors->err_q << ',' << r.errors->err_u << ',' << r.errors->total << ','
          << cell(r.effectivity) << ',';
    } else {
      out << ",,,,,,,";
    }
    out << r.wall_ms << "\n";
  }
}

void emit_svg(const Mesh& mesh, const std::string& path, const IndicatorField* indicators) {
  std::ofstream out = open_out(path);
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& v : mesh.vertices) {
    x0 = std::min(x0, v.x);
    x1 = std::max(x1, v.x);
    y0 = std::min(y0, v.y);
    y1 = std::max(y1, v.y);
  }
  double wbox = x1 - x0, hbox = y1 - y0;
  double stroke = 0.002 * std::max(wbox, hbox);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << x0 << ' ' << y0 << ' '
      << wbox << ' ' << hbox << "\">\n";

  double lmin = 0, lmax = 0;
  if (indicators) {
    lmin = 1e300;
    lmax = -1e300;
    for (double u : indicators->upsilon) {
      double l = std::log10(std::max(u, 1e-300));
      lmin = std::min(lmin, l);
      lmax = std::max(lmax, l);
    }
    if (!(lmax > lmin)) lmax = lmin + 1;
  }
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    std::string fill = "none";
    if (indicators) {
      double l = std::log10(std::max(indicators->upsilon[t], 1e-300));
      double s = (l - lmin) / (lmax - lmin);
      int r = static_cast<int>(255 * s);
      int b = static_cast<int>(255 * (1 - s));
      std::ostringstream os;
      os << "rgb(" << r << ",64," << b << ")";
      fill = os.str();
    }
    out << "<polygon points=\"";
    for (int k = 0; k < 3; ++k) {
      Vec2 p = mesh.vertex_of(t, k);
      // flip vertically: SVG y grows downward
      out << p.x << ',' << (y0 + y1 - p.y) << (k < 2 ? " " : "");
    }
    out << "\" fill=\"" << fill << "\" stroke=\"black\" stroke-width=\"" << stroke << "\"/>\n";
  }
  out << "</svg>\n";
}

void dump_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out = open_out(path);
  out << std::setprecision(17);
  out << "mesh 2\n";
  for (const auto& v : mesh.vertices) out << "v " << v.x << ' ' << v.y << "\n";
  for (const auto& t : mesh.triangles)
    out << "t " << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << ' ' << t.refine_edge << "\n";
  for (const auto& e : mesh.edges)
    if (e.boundary) out << "b " << e.a << ' ' << e.b << "\n";
}

Mesh read_mesh_dump(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string tag;
  int dim = 0;
  in >> tag >> dim;
  if (tag != "mesh" || dim != 2) throw std::runtime_error("bad mesh dump header");
  Mesh mesh;
  std::string kind;
  while (in >> kind) {
    if (kind == "v") {
      Vec2 p;
      in >> p.x >> p.y;
      mesh.vertices.push_back(p);
    } else if (kind == "t") {
      Mesh::Triangle t;
      in >> t.v[0] >> t.v[1] >> t.v[2] >> t.refine_edge;
      mesh.triangles.push_back(t);
    } else if (kind == "b") {
      int a, b;
      in >> a >> b;  // boundary flags are rebuilt by finalize()
    } else {
      throw std::runtime_error("bad mesh dump line tag: " + kind);
    }
  }
  mesh.finalize();
  return mesh;
}

void emit_indicator_csv(const IndicatorField& indicators, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "K,eta_y,eta_p,eta_w,eta_q,eta_u\n";
  for (int t = 0; t < indicators.size(); ++t)
    out << t << ',' << indicators.eta_y[t] << ',' << indicators.eta_p[t] << ','
        << indicators.eta_w[t] << ',' << indicators.eta_q[t] << ',' << indicators.eta_u[t]
        << "\n";
}

void dump_matrix(const Eigen::SparseMatrix<double>& m, const std::string& path) {
  std::ofstream out = open_out(path);
  out << std::setprecision(17);
  for (int k = 0; k < m.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << it.value() << "\n";
}

void emit_run_report(const AfemHistory& history, const ReliabilityConstants* constants,
                     const std::string& path) {
  std::ofstream out = open_out(path);
  double max_moment = 0, max_sigma = 0;
  for (const auto& r : history.records) {
    max_moment = std::max(max_moment, r.max_moment_residual);
    max_sigma = std::max(max_sigma, r.max_sigma_residual);
  }
  out << "iterations " << history.records.size() << "\n";
  out << "max_moment_residual " << max_moment << "\n";
  out << "max_sigma_residual " << max_sigma << "\n";
  if (constants) {
    out << "c_omega " << constants->c_omega << "\n";
    out << "c_ct " << constants->c_ct << "\n";
    out << "c_is " << constants->c_is << "\n";
    out << "beta " << constants->beta << "\n";
    out << "weight_y " << constants->weight_y << "\n";
    out << "weight_w " << constants->weight_w << "\n";
    out << "weight_u " << constants->weight_u << "\n";
  }
}

}  // namespace oseenctrl
