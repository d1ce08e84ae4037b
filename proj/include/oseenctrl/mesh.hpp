#pragma once

#include <array>
#include <set>
#include <vector>

#include "oseenctrl/common.hpp"

namespace oseenctrl {

enum class Domain { unit_square, unit_triangle, l_shape, t_shape };

/// Conforming 2D simplicial triangulation. Immutable after construction;
/// refinement returns a new mesh.
///
/// Conventions:
///  - triangle vertices are counterclockwise;
///  - local edge i of a triangle is the edge opposite local vertex i,
///    i.e. it connects local vertices (i+1)%3 and (i+2)%3;
///  - the refinement edge of a triangle is the edge opposite its peak
///    vertex (newest-vertex bisection); initial meshes tag the longest edge.
class Mesh {
 public:
  struct Triangle {
    std::array<int, 3> v;  // vertex indices, CCW
    int refine_edge = 0;   // local edge index in {0,1,2}
    int generation = 0;
    int ancestor = -1;     // triangle index in the mesh this one was refined from
  };
  struct Edge {
    int a = -1, b = -1;              // vertex indices, a < b
    std::array<int, 2> tri{-1, -1};  // incident triangles; tri[1] == -1 on boundary
    bool boundary = false;
  };

  std::vector<Vec2> vertices;
  std::vector<Triangle> triangles;
  std::vector<Edge> edges;
  std::vector<std::array<int, 3>> triangle_edges;  // edge ids, local edge i opposite vertex i
  std::vector<bool> vertex_on_boundary;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }

  Vec2 vertex_of(int t, int local) const { return vertices[triangles[t].v[local]]; }
  double triangle_area(int t) const;
  double total_area() const;
  /// Triangle on the other side of edge e from triangle t, or -1.
  int neighbor(int t, int e) const;

  /// Checks the conformity invariants: positive areas, interior edges with
  /// two matching incident triangles, no hanging vertices.
  bool is_conforming(std::string* why = nullptr) const;

  /// Builds edge/adjacency/boundary tables from vertices+triangles.
  void finalize();
};

struct ElementGeometry {
  double h = 0.0;     // diameter = longest edge
  double area = 0.0;
  std::array<Vec2, 3> normal;       // outward unit normal of local edge i
  std::array<double, 3> edge_length;
};

Mesh build_initial_mesh(Domain domain);

/// Newest-vertex bisection with conforming closure. Every marked triangle is
/// bisected at least once; the result is conforming and nested.
Mesh refine_conforming(const Mesh& mesh, const std::set<int>& marked);

Mesh uniform_refine(const Mesh& mesh);

ElementGeometry geometry(const Mesh& mesh, int t);

/// Reentrant corners of the domain polygon (empty for convex domains).
std::vector<Vec2> reentrant_corners(Domain domain);

double domain_area(Domain domain);

/// Axis-aligned bounding box side lengths of the mesh vertices.
std::array<double, 2> bounding_box_sides(const Mesh& mesh);

Domain parse_domain(const std::string& name);

}  // namespace oseenctrl
