#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "dgqmc/errors.hpp"
#include "dgqmc/mesh.hpp"
#include "dgqmc/quadrature.hpp"

namespace dgqmc {

namespace basis {

inline int local_dimension(int degree) { return (degree + 1) * (degree + 2) / 2; }

/// Lagrange basis on the reference triangle (P1: vertices; P2: vertices plus
/// edge midpoints), written in barycentric coordinates.
inline void evaluate(int degree, double xi, double eta, std::span<double> values) {
  const double l1 = 1.0 - xi - eta, l2 = xi, l3 = eta;
  if (degree == 1) {
    values[0] = l1;
    values[1] = l2;
    values[2] = l3;
    return;
  }
  values[0] = l1 * (2.0 * l1 - 1.0);
  values[1] = l2 * (2.0 * l2 - 1.0);
  values[2] = l3 * (2.0 * l3 - 1.0);
  values[3] = 4.0 * l1 * l2;
  values[4] = 4.0 * l2 * l3;
  values[5] = 4.0 * l3 * l1;
}

inline void gradient(int degree, double xi, double eta,
                     std::span<std::array<double, 2>> grads) {
  const double l1 = 1.0 - xi - eta, l2 = xi, l3 = eta;
  constexpr std::array<double, 2> d1{-1.0, -1.0}, d2{1.0, 0.0}, d3{0.0, 1.0};
  if (degree == 1) {
    grads[0] = d1;
    grads[1] = d2;
    grads[2] = d3;
    return;
  }
  auto axpy = [](double a, const std::array<double, 2>& g,
                 double b, const std::array<double, 2>& h) {
    return std::array<double, 2>{a * g[0] + b * h[0], a * g[1] + b * h[1]};
  };
  grads[0] = {(4.0 * l1 - 1.0) * d1[0], (4.0 * l1 - 1.0) * d1[1]};
  grads[1] = {(4.0 * l2 - 1.0) * d2[0], (4.0 * l2 - 1.0) * d2[1]};
  grads[2] = {(4.0 * l3 - 1.0) * d3[0], (4.0 * l3 - 1.0) * d3[1]};
  grads[3] = axpy(4.0 * l2, d1, 4.0 * l1, d2);
  grads[4] = axpy(4.0 * l3, d2, 4.0 * l2, d3);
  grads[5] = axpy(4.0 * l1, d3, 4.0 * l3, d1);
}

}  // namespace basis

/// Broken polynomial space on a triangulation: no inter-element continuity,
/// element-blocked dof layout. Caches quadrature geometry, basis values, and
/// physical basis gradients at all volume and face quadrature points so that
/// per-sample assembly reduces to coefficient-weighted accumulation.
class DGSpace {
 public:
  DGSpace(const Mesh& mesh, int degree)
      : mesh_(&mesh), degree_(degree), local_dofs_(basis::local_dimension(degree)) {
    if (degree != 1 && degree != 2)
      throw validation_error("DGSpace: polynomial degree must be 1 or 2");
    build_volume_tables();
    build_face_tables();
  }

  const Mesh& mesh() const { return *mesh_; }
  int degree() const { return degree_; }
  int local_dofs() const { return local_dofs_; }
  int dofs() const { return static_cast<int>(mesh_->elements.size()) * local_dofs_; }
  int quadrature_degree() const { return 2 * degree_ + 2; }

  int volume_points_per_element() const { return nq_vol_; }
  int face_points_per_face() const { return nq_face_; }
  std::size_t total_volume_points() const {
    return mesh_->elements.size() * static_cast<std::size_t>(nq_vol_);
  }
  std::size_t total_face_points() const {
    return mesh_->faces.size() * static_cast<std::size_t>(nq_face_);
  }

  // Volume tables, indexed by (element * nq_vol + q).
  double vol_x(std::size_t p) const { return vol_x_[p]; }
  double vol_y(std::size_t p) const { return vol_y_[p]; }
  double vol_w(std::size_t p) const { return vol_w_[p]; }
  /// Basis value of local dof i at reference quadrature point q.
  double vol_value(int q, int i) const {
    return vol_val_[static_cast<std::size_t>(q) * local_dofs_ + i];
  }
  /// Physical gradient of local dof i at (element, q).
  const std::array<double, 2>& vol_grad(int element, int q, int i) const {
    return vol_grad_[(static_cast<std::size_t>(element) * nq_vol_ + q) * local_dofs_ + i];
  }

  // Face tables, indexed by (face * nq_face + q).
  double face_x(std::size_t p) const { return face_x_[p]; }
  double face_y(std::size_t p) const { return face_y_[p]; }
  /// Quadrature weight including the face length measure.
  double face_w(std::size_t p) const { return face_w_[p]; }
  double face_value(std::size_t p, int side, int i) const {
    return face_val_[(p * 2 + side) * local_dofs_ + i];
  }
  const std::array<double, 2>& face_grad(std::size_t p, int side, int i) const {
    return face_grad_[(p * 2 + side) * local_dofs_ + i];
  }

  /// Evaluate a dof vector at a point of element e (reference coords computed
  /// internally); used by point probes and refined error quadrature.
  double evaluate(std::span<const double> coeffs, int e, double x, double y) const {
    const auto& t = mesh_->elements[static_cast<std::size_t>(e)];
    const Point2& a = mesh_->vertices[t[0]];
    const auto& inv = inv_jacobian_[static_cast<std::size_t>(e)];
    const double dx = x - a.x, dy = y - a.y;
    const double xi = inv[0] * dx + inv[1] * dy;
    const double eta = inv[2] * dx + inv[3] * dy;
    std::array<double, 6> vals{};
    basis::evaluate(degree_, xi, eta, vals);
    double result = 0.0;
    for (int i = 0; i < local_dofs_; ++i)
      result += coeffs[static_cast<std::size_t>(e) * local_dofs_ + i] * vals[static_cast<std::size_t>(i)];
    return result;
  }

 private:
  void build_volume_tables() {
    const TriangleRule rule = triangle_rule(quadrature_degree());
    nq_vol_ = static_cast<int>(rule.size());
    const std::size_t ne = mesh_->elements.size();

    vol_val_.resize(static_cast<std::size_t>(nq_vol_) * local_dofs_);
    std::vector<std::array<double, 2>> ref_grad(static_cast<std::size_t>(nq_vol_) *
                                                local_dofs_);
    for (int q = 0; q < nq_vol_; ++q) {
      basis::evaluate(degree_, rule.x[static_cast<std::size_t>(q)],
                      rule.y[static_cast<std::size_t>(q)],
                      std::span<double>(vol_val_).subspan(
                          static_cast<std::size_t>(q) * local_dofs_,
                          static_cast<std::size_t>(local_dofs_)));
      basis::gradient(degree_, rule.x[static_cast<std::size_t>(q)],
                      rule.y[static_cast<std::size_t>(q)],
                      std::span<std::array<double, 2>>(ref_grad).subspan(
                          static_cast<std::size_t>(q) * local_dofs_,
                          static_cast<std::size_t>(local_dofs_)));
    }

    vol_x_.resize(ne * nq_vol_);
    vol_y_.resize(ne * nq_vol_);
    vol_w_.resize(ne * nq_vol_);
    vol_grad_.resize(ne * nq_vol_ * static_cast<std::size_t>(local_dofs_));
    inv_jacobian_.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) {
      const auto& t = mesh_->elements[e];
      const Point2& a = mesh_->vertices[t[0]];
      const Point2& b = mesh_->vertices[t[1]];
      const Point2& c = mesh_->vertices[t[2]];
      const double j00 = b.x - a.x, j01 = c.x - a.x;
      const double j10 = b.y - a.y, j11 = c.y - a.y;
      const double det = j00 * j11 - j01 * j10;
      if (det <= 0.0) throw validation_error("DGSpace: degenerate or flipped element");
      inv_jacobian_[e] = {j11 / det, -j01 / det, -j10 / det, j00 / det};
      for (int q = 0; q < nq_vol_; ++q) {
        const std::size_t p = e * nq_vol_ + q;
        const double xi = triangle_cache_x(rule, q), eta = triangle_cache_y(rule, q);
        vol_x_[p] = a.x + j00 * xi + j01 * eta;
        vol_y_[p] = a.y + j10 * xi + j11 * eta;
        vol_w_[p] = rule.weights[static_cast<std::size_t>(q)] * det;  // det = 2|T|
        for (int i = 0; i < local_dofs_; ++i) {
          const auto& g = ref_grad[static_cast<std::size_t>(q) * local_dofs_ + i];
          // physical gradient = J^{-T} * reference gradient
          vol_grad_[p * local_dofs_ + i] = {inv_jacobian_[e][0] * g[0] + inv_jacobian_[e][2] * g[1],
                                            inv_jacobian_[e][1] * g[0] + inv_jacobian_[e][3] * g[1]};
        }
      }
    }
  }

  static double triangle_cache_x(const TriangleRule& r, int q) {
    return r.x[static_cast<std::size_t>(q)];
  }
  static double triangle_cache_y(const TriangleRule& r, int q) {
    return r.y[static_cast<std::size_t>(q)];
  }

  void build_face_tables() {
    const QuadratureRule1D line = gauss_legendre(quadrature_degree() / 2 + 1);
    nq_face_ = static_cast<int>(line.points.size());
    const std::size_t nf = mesh_->faces.size();

    face_x_.resize(nf * nq_face_);
    face_y_.resize(nf * nq_face_);
    face_w_.resize(nf * nq_face_);
    face_val_.assign(nf * nq_face_ * 2 * static_cast<std::size_t>(local_dofs_), 0.0);
    face_grad_.assign(nf * nq_face_ * 2 * static_cast<std::size_t>(local_dofs_),
                      {0.0, 0.0});

    for (std::size_t f = 0; f < nf; ++f) {
      const Face& face = mesh_->faces[f];
      const Point2& p0 = mesh_->vertices[face.vertices[0]];
      const Point2& p1 = mesh_->vertices[face.vertices[1]];
      for (int q = 0; q < nq_face_; ++q) {
        const std::size_t p = f * nq_face_ + q;
        const double t = line.points[static_cast<std::size_t>(q)];
        face_x_[p] = p0.x + t * (p1.x - p0.x);
        face_y_[p] = p0.y + t * (p1.y - p0.y);
        face_w_[p] = line.weights[static_cast<std::size_t>(q)] * face.diameter;
        fill_trace(p, 0, face.plus_element);
        if (!face.is_boundary()) fill_trace(p, 1, face.minus_element);
      }
    }
  }

  void fill_trace(std::size_t p, int side, int element) {
    const auto& t = mesh_->elements[static_cast<std::size_t>(element)];
    const Point2& a = mesh_->vertices[t[0]];
    const auto& inv = inv_jacobian_[static_cast<std::size_t>(element)];
    const double dx = face_x_[p] - a.x, dy = face_y_[p] - a.y;
    const double xi = inv[0] * dx + inv[1] * dy;
    const double eta = inv[2] * dx + inv[3] * dy;
    std::array<double, 6> vals{};
    std::array<std::array<double, 2>, 6> grads{};
    basis::evaluate(degree_, xi, eta, vals);
    basis::gradient(degree_, xi, eta, grads);
    for (int i = 0; i < local_dofs_; ++i) {
      face_val_[(p * 2 + side) * local_dofs_ + i] = vals[static_cast<std::size_t>(i)];
      const auto& g = grads[static_cast<std::size_t>(i)];
      face_grad_[(p * 2 + side) * local_dofs_ + i] = {inv[0] * g[0] + inv[2] * g[1],
                                                      inv[1] * g[0] + inv[3] * g[1]};
    }
  }

  const Mesh* mesh_;
  int degree_;
  int local_dofs_;
  int nq_vol_ = 0;
  int nq_face_ = 0;

  std::vector<double> vol_x_, vol_y_, vol_w_;
  std::vector<double> vol_val_;                      // (q, i), element independent
  std::vector<std::array<double, 2>> vol_grad_;      // (element, q, i)
  std::vector<std::array<double, 4>> inv_jacobian_;  // row-major J^{-1}

  std::vector<double> face_x_, face_y_, face_w_;
  std::vector<double> face_val_;                     // (point, side, i)
  std::vector<std::array<double, 2>> face_grad_;     // (point, side, i)
};

}  // namespace dgqmc
