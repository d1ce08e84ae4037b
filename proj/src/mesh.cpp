#include "oseenctrl/mesh.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace oseenctrl {

namespace {

double signed_area(Vec2 a, Vec2 b, Vec2 c) { return 0.5 * (b - a).cross(c - a); }

std::pair<int, int> sorted_pair(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

}  // namespace

double Mesh::triangle_area(int t) const {
  const auto& tr = triangles[t];
  return signed_area(vertices[tr.v[0]], vertices[tr.v[1]], vertices[tr.v[2]]);
}

double Mesh::total_area() const {
  double s = 0;
  for (int t = 0; t < num_triangles(); ++t) s += triangle_area(t);
  return s;
}

int Mesh::neighbor(int t, int e) const {
  const Edge& ed = edges[triangle_edges[t][e]];
  return ed.tri[0] == t ? ed.tri[1] : ed.tri[0];
}

void Mesh::finalize() {
  edges.clear();
  triangle_edges.assign(triangles.size(), {-1, -1, -1});
  std::map<std::pair<int, int>, int> edge_id;
  for (int t = 0; t < num_triangles(); ++t) {
    for (int e = 0; e < 3; ++e) {
      int a = triangles[t].v[(e + 1) % 3];
      int b = triangles[t].v[(e + 2) % 3];
      auto key = sorted_pair(a, b);
      auto it = edge_id.find(key);
      if (it == edge_id.end()) {
        Edge ed;
        ed.a = key.first;
        ed.b = key.second;
        ed.tri[0] = t;
        edge_id.emplace(key, num_edges());
        triangle_edges[t][e] = num_edges();
        edges.push_back(ed);
      } else {
        Edge& ed = edges[it->second];
        if (ed.tri[1] != -1)
          throw InvalidDomainError("mesh edge shared by more than two triangles");
        ed.tri[1] = t;
        triangle_edges[t][e] = it->second;
      }
    }
  }
  vertex_on_boundary.assign(vertices.size(), false);
  for (auto& ed : edges) {
    ed.boundary = (ed.tri[1] == -1);
    if (ed.boundary) {
      vertex_on_boundary[ed.a] = true;
      vertex_on_boundary[ed.b] = true;
    }
  }
}

bool Mesh::is_conforming(std::string* why) const {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  for (int t = 0; t < num_triangles(); ++t) {
    if (triangle_area(t) <= 0) return fail("non-positive triangle area at " + std::to_string(t));
  }
  for (const auto& ed : edges) {
    int count = (ed.tri[0] != -1) + (ed.tri[1] != -1);
    if (count == 0 || (ed.boundary && count != 1) || (!ed.boundary && count != 2))
      return fail("edge incidence mismatch");
  }
  // No hanging vertices: a vertex lying in the interior of an edge would sit
  // on the edge segment without being one of its endpoints.
  for (const auto& ed : edges) {
    Vec2 a = vertices[ed.a], b = vertices[ed.b];
    double len2 = (b - a).squared_norm();
    for (int v = 0; v < num_vertices(); ++v) {
      if (v == ed.a || v == ed.b) continue;
      Vec2 p = vertices[v];
      double cross = (b - a).cross(p - a);
      double t = (p - a).dot(b - a) / len2;
      if (std::abs(cross) < 1e-12 * len2 && t > 1e-10 && t < 1.0 - 1e-10)
        return fail("hanging vertex " + std::to_string(v));
    }
  }
  return true;
}

namespace {

// Longest-edge tag; ties broken by the smallest local index.
int longest_edge(const std::vector<Vec2>& verts, const std::array<int, 3>& v) {
  int best = 0;
  double best_len = -1;
  for (int e = 0; e < 3; ++e) {
    double len = (verts[v[(e + 2) % 3]] - verts[v[(e + 1) % 3]]).squared_norm();
    if (len > best_len + 1e-14) {
      best_len = len;
      best = e;
    }
  }
  return best;
}

Mesh from_raw(std::vector<Vec2> verts, std::vector<std::array<int, 3>> tris) {
  Mesh m;
  m.vertices = std::move(verts);
  for (auto& t : tris) {
    Mesh::Triangle tr;
    tr.v = t;
    if (signed_area(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]) < 0)
      std::swap(tr.v[1], tr.v[2]);
    tr.refine_edge = longest_edge(m.vertices, tr.v);
    m.triangles.push_back(tr);
  }
  m.finalize();
  return m;
}

// Splits a list of axis-aligned unit squares into two triangles each, with
// the diagonal from the first corner. Vertices are deduplicated.
Mesh squares_to_mesh(const std::vector<std::array<Vec2, 4>>& squares) {
  std::vector<Vec2> verts;
  std::map<std::pair<long long, long long>, int> index;
  auto vid = [&](Vec2 p) {
    auto key = std::make_pair(static_cast<long long>(std::llround(p.x * 1024)),
                              static_cast<long long>(std::llround(p.y * 1024)));
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    index.emplace(key, static_cast<int>(verts.size()));
    verts.push_back(p);
    return static_cast<int>(verts.size()) - 1;
  };
  std::vector<std::array<int, 3>> tris;
  for (const auto& sq : squares) {
    int a = vid(sq[0]), b = vid(sq[1]), c = vid(sq[2]), d = vid(sq[3]);
    tris.push_back({a, b, c});
    tris.push_back({a, c, d});
  }
  return from_raw(std::move(verts), std::move(tris));
}

}  // namespace

Mesh build_initial_mesh(Domain domain) {
  switch (domain) {
    case Domain::unit_square: {
      // Four triangles fanned around the center vertex.
      std::vector<Vec2> verts = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
      std::vector<std::array<int, 3>> tris = {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
      return from_raw(std::move(verts), std::move(tris));
    }
    case Domain::unit_triangle: {
      // Red split of the reference triangle into four similar triangles.
      std::vector<Vec2> verts = {{0, 0}, {1, 0}, {0, 1}, {0.5, 0}, {0.5, 0.5}, {0, 0.5}};
      std::vector<std::array<int, 3>> tris = {{0, 3, 5}, {3, 1, 4}, {5, 4, 2}, {3, 4, 5}};
      return from_raw(std::move(verts), std::move(tris));
    }
    case Domain::l_shape: {
      std::vector<std::array<Vec2, 4>> squares = {
          {{{-1, -1}, {0, -1}, {0, 0}, {-1, 0}}},
          {{{-1, 0}, {0, 0}, {0, 1}, {-1, 1}}},
          {{{0, 0}, {1, 0}, {1, 1}, {0, 1}}},
      };
      return squares_to_mesh(squares);
    }
    case Domain::t_shape: {
      std::vector<std::array<Vec2, 4>> squares = {
          {{{-1.5, 0}, {-0.5, 0}, {-0.5, 1}, {-1.5, 1}}},
          {{{-0.5, 0}, {0.5, 0}, {0.5, 1}, {-0.5, 1}}},
          {{{0.5, 0}, {1.5, 0}, {1.5, 1}, {0.5, 1}}},
          {{{-0.5, -1}, {0.5, -1}, {0.5, 0}, {-0.5, 0}}},
          {{{-0.5, -2}, {0.5, -2}, {0.5, -1}, {-0.5, -1}}},
      };
      return squares_to_mesh(squares);
    }
  }
  throw InvalidDomainError("unknown domain");
}

std::vector<Vec2> reentrant_corners(Domain domain) {
  switch (domain) {
    case Domain::l_shape:
      return {{0, 0}};
    case Domain::t_shape:
      return {{-0.5, 0}, {0.5, 0}};
    default:
      return {};
  }
}

double domain_area(Domain domain) {
  switch (domain) {
    case Domain::unit_square:
      return 1.0;
    case Domain::unit_triangle:
      return 0.5;
    case Domain::l_shape:
      return 3.0;
    case Domain::t_shape:
      return 5.0;
  }
  throw InvalidDomainError("unknown domain");
}

Domain parse_domain(const std::string& name) {
  if (name == "unit_square") return Domain::unit_square;
  if (name == "unit_triangle") return Domain::unit_triangle;
  if (name == "l_shape") return Domain::l_shape;
  if (name == "t_shape") return Domain::t_shape;
  throw InvalidDomainError("unknown domain name: " + name);
}

namespace {

/// Working state for newest-vertex bisection with recursive closure.
struct Refiner {
  std::vector<Vec2> verts;
  struct Tri {
    std::array<int, 3> v;
    int refine_edge;
    int generation;
    int ancestor;  // index into the input mesh
    bool alive = true;
  };
  std::vector<Tri> tris;
  std::map<std::pair<int, int>, std::array<int, 2>> edge_tris;  // alive incidence
  std::map<std::pair<int, int>, int> midpoint;
  long long steps = 0;
  long long step_limit = 0;

  explicit Refiner(const Mesh& mesh) {
    verts = mesh.vertices;
    tris.reserve(mesh.triangles.size() * 4);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const auto& mt = mesh.triangles[t];
      tris.push_back({mt.v, mt.refine_edge, mt.generation, t, true});
    }
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) link(t);
    step_limit = 64LL * (static_cast<long long>(tris.size()) + 16);
  }

  std::pair<int, int> edge_key(int t, int e) const {
    int a = tris[t].v[(e + 1) % 3];
    int b = tris[t].v[(e + 2) % 3];
    return sorted_pair(a, b);
  }

  void link(int t) {
    for (int e = 0; e < 3; ++e) {
      auto key = edge_key(t, e);
      auto it = edge_tris.find(key);
      if (it == edge_tris.end()) it = edge_tris.emplace(key, std::array<int, 2>{-1, -1}).first;
      auto& inc = it->second;
      if (inc[0] == t || inc[1] == t) continue;
      if (inc[0] == -1)
        inc[0] = t;
      else if (inc[1] == -1)
        inc[1] = t;
      else
        throw InvalidDomainError("refine: edge shared by three triangles");
    }
  }

  void unlink(int t) {
    for (int e = 0; e < 3; ++e) {
      auto it = edge_tris.find(edge_key(t, e));
      if (it == edge_tris.end()) continue;
      if (it->second[0] == t) it->second[0] = -1;
      if (it->second[1] == t) it->second[1] = -1;
    }
  }

  int other_triangle(int t, std::pair<int, int> key) const {
    auto it = edge_tris.find(key);
    if (it == edge_tris.end()) return -1;
    if (it->second[0] == t) return it->second[1];
    if (it->second[1] == t) return it->second[0];
    return -1;
  }

  int midpoint_of(std::pair<int, int> key) {
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    Vec2 m = (verts[key.first] + verts[key.second]) * 0.5;
    verts.push_back(m);
    int id = static_cast<int>(verts.size()) - 1;
    midpoint.emplace(key, id);
    return id;
  }

  // Splits triangle t across its refinement edge, assuming the neighbor
  // across that edge (if any) is refinement-edge compatible. Returns the
  // two child ids.
  std::array<int, 2> split(int t) {
    Tri& tr = tris[t];
    int r = tr.refine_edge;
    int p = tr.v[r], a = tr.v[(r + 1) % 3], b = tr.v[(r + 2) % 3];
    int m = midpoint_of(sorted_pair(a, b));
    unlink(t);
    tr.alive = false;
    // Children keep CCW order; the new vertex m is the peak of both, so the
    // child refinement edge is the old edge opposite m.
    Tri c1{{p, a, m}, 2, tr.generation + 1, tr.ancestor, true};
    Tri c2{{p, m, b}, 1, tr.generation + 1, tr.ancestor, true};
    int i1 = static_cast<int>(tris.size());
    tris.push_back(c1);
    int i2 = static_cast<int>(tris.size());
    tris.push_back(c2);
    link(i1);
    link(i2);
    return {i1, i2};
  }

  // Bisects t across its refinement edge, recursively making the neighbor
  // compatible first (classic NVB closure).
  void bisect(int t) {
    if (++steps > step_limit)
      throw SolverError("refine_conforming: closure iteration bound exceeded "
                        "(corrupted refinement-edge assignment?)");
    if (!tris[t].alive) return;
    auto key = edge_key(t, tris[t].refine_edge);
    int nb = other_triangle(t, key);
    if (nb != -1 && edge_key(nb, tris[nb].refine_edge) != key) {
      bisect(nb);
      if (!tris[t].alive) return;  // closure chain may have reached t
      nb = other_triangle(t, key);
      if (nb != -1 && edge_key(nb, tris[nb].refine_edge) != key)
        throw SolverError("refine_conforming: neighbor still incompatible after closure");
    }
    split(t);
    if (nb != -1) split(nb);
  }

  Mesh result() const {
    Mesh out;
    out.vertices = verts;
    for (const auto& t : tris) {
      if (!t.alive) continue;
      Mesh::Triangle mt;
      mt.v = t.v;
      mt.refine_edge = t.refine_edge;
      mt.generation = t.generation;
      mt.ancestor = t.ancestor;
      out.triangles.push_back(mt);
    }
    out.finalize();
    return out;
  }
};

}  // namespace

Mesh refine_conforming(const Mesh& mesh, const std::set<int>& marked) {
  for (int t : marked)
    if (t < 0 || t >= mesh.num_triangles())
      throw InvalidParameterError("refine_conforming: marked index out of range");
  if (marked.empty()) {
    Mesh copy = mesh;
    for (int t = 0; t < copy.num_triangles(); ++t) copy.triangles[t].ancestor = t;
    return copy;
  }
  Refiner ref(mesh);
  for (int t : marked) {
    // A marked triangle may already have been bisected by closure.
    if (t < static_cast<int>(ref.tris.size()) && ref.tris[t].alive) ref.bisect(t);
  }
  return ref.result();
}

Mesh uniform_refine(const Mesh& mesh) {
  std::set<int> all;
  for (int t = 0; t < mesh.num_triangles(); ++t) all.insert(t);
  return refine_conforming(mesh, all);
}

ElementGeometry geometry(const Mesh& mesh, int t) {
  if (t < 0 || t >= mesh.num_triangles())
    throw InvalidParameterError("geometry: triangle index out of range");
  ElementGeometry g;
  g.area = mesh.triangle_area(t);
  for (int e = 0; e < 3; ++e) {
    Vec2 a = mesh.vertex_of(t, (e + 1) % 3);
    Vec2 b = mesh.vertex_of(t, (e + 2) % 3);
    Vec2 d = b - a;
    g.edge_length[e] = d.norm();
    g.h = std::max(g.h, g.edge_length[e]);
    // Outward normal: rotate the CCW-ordered edge direction by -90 degrees.
    g.normal[e] = Vec2{d.y, -d.x} / g.edge_length[e];
  }
  return g;
}

std::array<double, 2> bounding_box_sides(const Mesh& mesh) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& v : mesh.vertices) {
    x0 = std::min(x0, v.x);
    x1 = std::max(x1, v.x);
    y0 = std::min(y0, v.y);
    y1 = std::max(y1, v.y);
  }
  return {x1 - x0, y1 - y0};
}

}  // namespace oseenctrl
