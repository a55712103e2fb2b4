#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dgqmc/mesh.hpp"

using namespace dgqmc;

TEST_CASE("structured mesh counts") {
  const Mesh m1 = build_structured_mesh(1);
  CHECK(m1.vertices.size() == 4);
  CHECK(m1.elements.size() == 2);
  CHECK(m1.faces.size() == 5);
  int boundary = 0;
  for (const Face& f : m1.faces) boundary += f.is_boundary() ? 1 : 0;
  CHECK(boundary == 4);

  const Mesh m2 = build_structured_mesh(2);
  CHECK(m2.vertices.size() == 9);
  CHECK(m2.elements.size() == 8);
  CHECK(m2.faces.size() == 16);
  boundary = 0;
  for (const Face& f : m2.faces) boundary += f.is_boundary() ? 1 : 0;
  CHECK(boundary == 8);
  for (const Face& f : m2.faces)
    if (f.is_boundary()) CHECK(f.minus_element == -1);
}

TEST_CASE("build_structured_mesh rejects m < 1") {
  CHECK_THROWS_AS(build_structured_mesh(0), validation_error);
}

TEST_CASE("two-triangle mesh has an interior diagonal") {
  const Mesh m1 = build_structured_mesh(1);
  int interior = 0;
  for (const Face& f : m1.faces)
    if (!f.is_boundary()) {
      ++interior;
      CHECK(f.plus_element != f.minus_element);
      CHECK(f.diameter == Catch::Approx(std::sqrt(2.0)).epsilon(1e-14));
    }
  CHECK(interior == 1);
}

TEST_CASE("duplicate elements are non-manifold") {
  Mesh m = build_structured_mesh(1);
  auto elements = m.elements;
  elements.push_back(elements.front());
  CHECK_THROWS_AS(enumerate_faces(m.vertices, elements), validation_error);
}

TEST_CASE("euler count and area for m up to 32") {
  for (int m : {1, 2, 3, 4, 8, 16, 32}) {
    const Mesh mesh = build_structured_mesh(m);
    const long long v = static_cast<long long>(mesh.vertices.size());
    const long long e = static_cast<long long>(mesh.faces.size());
    const long long t = static_cast<long long>(mesh.elements.size());
    CHECK(v - e + t == 1);
    double area = 0.0;
    for (std::size_t i = 0; i < mesh.elements.size(); ++i)
      area += mesh.element_area(static_cast<int>(i));
    CHECK(area == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("interior normals point from plus into minus") {
  const Mesh mesh = build_structured_mesh(4);
  for (const Face& f : mesh.faces) {
    const Point2& p0 = mesh.vertices[f.vertices[0]];
    const Point2& p1 = mesh.vertices[f.vertices[1]];
    const Point2 mid{0.5 * (p0.x + p1.x), 0.5 * (p0.y + p1.y)};
    CHECK(std::hypot(f.normal[0], f.normal[1]) == Catch::Approx(1.0).epsilon(1e-14));
    const Point2 cp = mesh.centroid(f.plus_element);
    CHECK(f.normal[0] * (cp.x - mid.x) + f.normal[1] * (cp.y - mid.y) < 0.0);
    if (!f.is_boundary()) {
      const Point2 cm = mesh.centroid(f.minus_element);
      CHECK(f.normal[0] * (cm.x - mid.x) + f.normal[1] * (cm.y - mid.y) > 0.0);
    }
  }
}

TEST_CASE("face diameter never exceeds adjacent element diameter") {
  const Mesh mesh = build_structured_mesh(8);
  for (const Face& f : mesh.faces) {
    CHECK(f.diameter <= mesh.element_diameters[static_cast<std::size_t>(f.plus_element)] + 1e-14);
    if (!f.is_boundary())
      CHECK(f.diameter <= mesh.element_diameters[static_cast<std::size_t>(f.minus_element)] + 1e-14);
  }
}

TEST_CASE("quality report on structured meshes") {
  const MeshQuality q4 = mesh_quality_report(build_structured_mesh(4));
  CHECK(q4.ok);
  CHECK(q4.min_angle_deg == Catch::Approx(45.0).epsilon(1e-12));

  const MeshQuality q16 = mesh_quality_report(build_structured_mesh(16));
  CHECK(q16.max_diameter_ratio == Catch::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("degenerate element flags the quality report") {
  Mesh mesh = build_structured_mesh(2);
  mesh.vertices[4] = mesh.vertices[3];  // collapse an interior vertex
  const MeshQuality q = mesh_quality_report(mesh);
  CHECK_FALSE(q.ok);
}
