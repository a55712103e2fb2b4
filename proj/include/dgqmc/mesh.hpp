#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "dgqmc/errors.hpp"

namespace dgqmc {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Undirected mesh edge with DG adjacency. The unit normal points from the
/// plus element into the minus element; on boundary faces (minus_element < 0)
/// it is the outward normal of the domain.
struct Face {
  std::array<int, 2> vertices{-1, -1};
  double diameter = 0.0;  // h_F
  int plus_element = -1;
  int minus_element = -1;
  std::array<double, 2> normal{0.0, 0.0};

  bool is_boundary() const { return minus_element < 0; }
};

struct Mesh {
  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> elements;
  std::vector<Face> faces;
  std::vector<double> element_diameters;  // h_T
  static constexpr int max_faces_per_element = 3;  // simplices in 2D

  Point2 centroid(int e) const {
    const auto& t = elements[static_cast<std::size_t>(e)];
    return {(vertices[t[0]].x + vertices[t[1]].x + vertices[t[2]].x) / 3.0,
            (vertices[t[0]].y + vertices[t[1]].y + vertices[t[2]].y) / 3.0};
  }

  double element_area(int e) const {
    const auto& t = elements[static_cast<std::size_t>(e)];
    const Point2& a = vertices[t[0]];
    const Point2& b = vertices[t[1]];
    const Point2& c = vertices[t[2]];
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
  }
};

namespace detail {

inline double distance(const Point2& a, const Point2& b) {
  return std::hypot(b.x - a.x, b.y - a.y);
}

}  // namespace detail

/// Collects every undirected vertex pair occurring as an element edge.
/// Interior faces get both neighbors (plus = lower element index), boundary
/// faces one. Output is ordered by the sorted vertex pair, so enumeration is
/// deterministic for a given element list.
inline std::vector<Face> enumerate_faces(const std::vector<Point2>& vertices,
                                         const std::vector<std::array<int, 3>>& elements) {
  std::map<std::pair<int, int>, std::vector<int>> adjacency;
  for (std::size_t e = 0; e < elements.size(); ++e) {
    const auto& t = elements[e];
    for (int i = 0; i < 3; ++i) {
      int a = t[static_cast<std::size_t>(i)];
      int b = t[static_cast<std::size_t>((i + 1) % 3)];
      if (a > b) std::swap(a, b);
      adjacency[{a, b}].push_back(static_cast<int>(e));
    }
  }

  std::vector<Face> faces;
  faces.reserve(adjacency.size());
  for (const auto& [key, elems] : adjacency) {
    if (elems.size() > 2)
      throw validation_error("enumerate_faces: edge shared by more than two elements");
    Face f;
    f.vertices = {key.first, key.second};
    f.diameter = detail::distance(vertices[key.first], vertices[key.second]);
    f.plus_element = *std::min_element(elems.begin(), elems.end());
    f.minus_element = elems.size() == 2 ? *std::max_element(elems.begin(), elems.end()) : -1;

    // Normal orthogonal to the edge, oriented away from the plus element.
    const Point2& p0 = vertices[key.first];
    const Point2& p1 = vertices[key.second];
    double nx = p1.y - p0.y;
    double ny = p0.x - p1.x;
    const double len = std::hypot(nx, ny);
    nx /= len;
    ny /= len;
    const auto& t = elements[static_cast<std::size_t>(f.plus_element)];
    const Point2 cen{(vertices[t[0]].x + vertices[t[1]].x + vertices[t[2]].x) / 3.0,
                     (vertices[t[0]].y + vertices[t[1]].y + vertices[t[2]].y) / 3.0};
    const Point2 mid{0.5 * (p0.x + p1.x), 0.5 * (p0.y + p1.y)};
    if (nx * (cen.x - mid.x) + ny * (cen.y - mid.y) > 0.0) {
      nx = -nx;
      ny = -ny;
    }
    f.normal = {nx, ny};
    faces.push_back(f);
  }
  return faces;
}

/// Structured triangulation of (0,1)^2 with mesh size 1/m: each of the m^2
/// cells is split along its bottom-left to top-right diagonal. All triangles
/// are counterclockwise right isosceles.
inline Mesh build_structured_mesh(int m) {
  if (m < 1) throw validation_error("build_structured_mesh: subdivision count must be >= 1");

  Mesh mesh;
  const int nv = m + 1;
  mesh.vertices.reserve(static_cast<std::size_t>(nv) * nv);
  for (int j = 0; j < nv; ++j)
    for (int i = 0; i < nv; ++i)
      mesh.vertices.push_back({static_cast<double>(i) / m, static_cast<double>(j) / m});

  auto vid = [nv](int i, int j) { return j * nv + i; };
  mesh.elements.reserve(static_cast<std::size_t>(2) * m * m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      mesh.elements.push_back({v00, v10, v11});  // below the diagonal
      mesh.elements.push_back({v00, v11, v01});  // above the diagonal
    }
  }

  mesh.faces = enumerate_faces(mesh.vertices, mesh.elements);

  mesh.element_diameters.reserve(mesh.elements.size());
  for (const auto& t : mesh.elements) {
    const double d01 = detail::distance(mesh.vertices[t[0]], mesh.vertices[t[1]]);
    const double d12 = detail::distance(mesh.vertices[t[1]], mesh.vertices[t[2]]);
    const double d20 = detail::distance(mesh.vertices[t[2]], mesh.vertices[t[0]]);
    mesh.element_diameters.push_back(std::max({d01, d12, d20}));
  }
  return mesh;
}

struct MeshQuality {
  double min_angle_deg = 0.0;
  double max_diameter_ratio = 0.0;  // max over faces of h_T / h_F
  bool ok = false;
};

inline MeshQuality mesh_quality_report(const Mesh& mesh) {
  MeshQuality q;
  q.min_angle_deg = 180.0;
  q.ok = true;
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    if (mesh.element_area(static_cast<int>(e)) <= 0.0) {
      q.ok = false;
      q.min_angle_deg = 0.0;
      continue;
    }
    const auto& t = mesh.elements[e];
    for (int i = 0; i < 3; ++i) {
      const Point2& a = mesh.vertices[t[static_cast<std::size_t>(i)]];
      const Point2& b = mesh.vertices[t[static_cast<std::size_t>((i + 1) % 3)]];
      const Point2& c = mesh.vertices[t[static_cast<std::size_t>((i + 2) % 3)]];
      const double ux = b.x - a.x, uy = b.y - a.y;
      const double vx = c.x - a.x, vy = c.y - a.y;
      const double cosang = (ux * vx + uy * vy) /
                            (std::hypot(ux, uy) * std::hypot(vx, vy));
      const double ang = std::acos(std::clamp(cosang, -1.0, 1.0)) * 180.0 /
                         3.14159265358979323846;
      q.min_angle_deg = std::min(q.min_angle_deg, ang);
    }
  }
  for (const Face& f : mesh.faces) {
    const double ht = mesh.element_diameters[static_cast<std::size_t>(f.plus_element)];
    q.max_diameter_ratio = std::max(q.max_diameter_ratio, ht / f.diameter);
    if (!f.is_boundary()) {
      const double htm = mesh.element_diameters[static_cast<std::size_t>(f.minus_element)];
      q.max_diameter_ratio = std::max(q.max_diameter_ratio, htm / f.diameter);
    }
  }
  return q;
}

}  // namespace dgqmc
