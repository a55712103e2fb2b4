#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <span>
#include <vector>

#include "dgqmc/dgfem.hpp"
#include "dgqmc/errors.hpp"
#include "dgqmc/mesh.hpp"
#include "dgqmc/quadrature.hpp"

namespace dgqmc {

/// Continuous piecewise-linear Galerkin solver on the structured mesh, with
/// homogeneous Dirichlet data eliminated. Serves as the conforming comparator
/// for the DG pipelines; dof vectors are nodal values including boundary
/// zeros.
class ConformingP1 {
 public:
  explicit ConformingP1(int m)
      : mesh_(build_structured_mesh(m)), rule_(triangle_rule(4)) {
    const int nv = static_cast<int>(mesh_.vertices.size());
    interior_.assign(static_cast<std::size_t>(nv), -1);
    int count = 0;
    for (int v = 0; v < nv; ++v) {
      const Point2& p = mesh_.vertices[static_cast<std::size_t>(v)];
      const bool boundary = p.x == 0.0 || p.x == 1.0 || p.y == 0.0 || p.y == 1.0;
      if (!boundary) interior_[static_cast<std::size_t>(v)] = count++;
    }
    interior_count_ = count;
    build_pattern();
    solver_.analyzePattern(pattern_);
  }

  const Mesh& mesh() const { return mesh_; }
  int dofs() const { return static_cast<int>(mesh_.vertices.size()); }

  std::vector<double> solve(const SpatialFunction& a_eval, const SpatialFunction& f) {
    Eigen::SparseMatrix<double> A = pattern_;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(interior_count_);
    double* values = A.valuePtr();

    for (std::size_t e = 0; e < mesh_.elements.size(); ++e) {
      const auto& t = mesh_.elements[e];
      const Point2& p0 = mesh_.vertices[t[0]];
      const Point2& p1 = mesh_.vertices[t[1]];
      const Point2& p2 = mesh_.vertices[t[2]];
      const double j00 = p1.x - p0.x, j01 = p2.x - p0.x;
      const double j10 = p1.y - p0.y, j11 = p2.y - p0.y;
      const double det = j00 * j11 - j01 * j10;
      // Physical gradients of the three hat functions (constant on element).
      const std::array<std::array<double, 2>, 3> grad = {{
          {(-j11 + j10) / det, (j01 - j00) / det},
          {j11 / det, -j01 / det},
          {-j10 / det, j00 / det},
      }};
      double a_int = 0.0;  // int_T a
      std::array<double, 3> load{};
      for (std::size_t q = 0; q < rule_.size(); ++q) {
        const double xi = rule_.x[q], eta = rule_.y[q];
        const double x = p0.x + j00 * xi + j01 * eta;
        const double y = p0.y + j10 * xi + j11 * eta;
        const double w = rule_.weights[q] * det;
        const double a = a_eval(x, y);
        if (!(a > 0.0))
          throw numerical_error("conforming solve: coefficient nonpositive");
        a_int += w * a;
        const double wf = w * f(x, y);
        load[0] += wf * (1.0 - xi - eta);
        load[1] += wf * xi;
        load[2] += wf * eta;
      }
      for (int i = 0; i < 3; ++i) {
        const int gi = interior_[static_cast<std::size_t>(t[static_cast<std::size_t>(i)])];
        if (gi < 0) continue;
        b[gi] += load[static_cast<std::size_t>(i)];
        for (int j = 0; j < 3; ++j) {
          const int gj = interior_[static_cast<std::size_t>(t[static_cast<std::size_t>(j)])];
          if (gj < 0) continue;
          values[slots_[(e * 3 + static_cast<std::size_t>(i)) * 3 + static_cast<std::size_t>(j)]] +=
              a_int * (grad[static_cast<std::size_t>(i)][0] * grad[static_cast<std::size_t>(j)][0] +
                       grad[static_cast<std::size_t>(i)][1] * grad[static_cast<std::size_t>(j)][1]);
        }
      }
    }

    solver_.factorize(A);
    if (solver_.info() != Eigen::Success)
      throw numerical_error("conforming solve: factorization failed");
    const Eigen::VectorXd u = solver_.solve(b);
    if (b.norm() > 0.0 && !((A * u - b).norm() / b.norm() <= 1e-10))
      throw numerical_error("conforming solve: residual exceeds tolerance");

    std::vector<double> nodal(mesh_.vertices.size(), 0.0);
    for (std::size_t v = 0; v < nodal.size(); ++v)
      if (interior_[v] >= 0) nodal[v] = u[interior_[v]];
    return nodal;
  }

  double l2_norm(std::span<const double> nodal) const {
    if (nodal.size() != mesh_.vertices.size())
      throw validation_error("ConformingP1::l2_norm: nodal vector length mismatch");
    double acc = 0.0;
    for (const auto& t : mesh_.elements) {
      const Point2& p0 = mesh_.vertices[t[0]];
      const Point2& p1 = mesh_.vertices[t[1]];
      const Point2& p2 = mesh_.vertices[t[2]];
      const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
      for (std::size_t q = 0; q < rule_.size(); ++q) {
        const double xi = rule_.x[q], eta = rule_.y[q];
        const double val = nodal[static_cast<std::size_t>(t[0])] * (1.0 - xi - eta) +
                           nodal[static_cast<std::size_t>(t[1])] * xi +
                           nodal[static_cast<std::size_t>(t[2])] * eta;
        acc += rule_.weights[q] * det * val * val;
      }
    }
    return std::sqrt(acc);
  }

  double l2_error(std::span<const double> nodal, const SpatialFunction& reference) const {
    const TriangleRule fine = triangle_rule(12);
    double acc = 0.0;
    for (const auto& t : mesh_.elements) {
      const Point2& p0 = mesh_.vertices[t[0]];
      const Point2& p1 = mesh_.vertices[t[1]];
      const Point2& p2 = mesh_.vertices[t[2]];
      const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
      for (std::size_t q = 0; q < fine.size(); ++q) {
        const double xi = fine.x[q], eta = fine.y[q];
        const double x = p0.x + (p1.x - p0.x) * xi + (p2.x - p0.x) * eta;
        const double y = p0.y + (p1.y - p0.y) * xi + (p2.y - p0.y) * eta;
        const double val = nodal[static_cast<std::size_t>(t[0])] * (1.0 - xi - eta) +
                           nodal[static_cast<std::size_t>(t[1])] * xi +
                           nodal[static_cast<std::size_t>(t[2])] * eta;
        const double diff = val - reference(x, y);
        acc += fine.weights[q] * det * diff * diff;
      }
    }
    return std::sqrt(acc);
  }

  double mean_value(std::span<const double> nodal) const {
    double acc = 0.0;
    for (const auto& t : mesh_.elements) {
      const double area = 0.5 * std::abs(
          (mesh_.vertices[t[1]].x - mesh_.vertices[t[0]].x) *
              (mesh_.vertices[t[2]].y - mesh_.vertices[t[0]].y) -
          (mesh_.vertices[t[2]].x - mesh_.vertices[t[0]].x) *
              (mesh_.vertices[t[1]].y - mesh_.vertices[t[0]].y));
      acc += area / 3.0 *
             (nodal[static_cast<std::size_t>(t[0])] + nodal[static_cast<std::size_t>(t[1])] +
              nodal[static_cast<std::size_t>(t[2])]);
    }
    return acc;
  }

 private:
  void build_pattern() {
    std::vector<Eigen::Triplet<double>> trip;
    slots_.assign(mesh_.elements.size() * 9, 0);
    for (const auto& t : mesh_.elements) {
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const int gi = interior_[static_cast<std::size_t>(t[static_cast<std::size_t>(i)])];
          const int gj = interior_[static_cast<std::size_t>(t[static_cast<std::size_t>(j)])];
          if (gi >= 0 && gj >= 0) trip.emplace_back(gi, gj, 0.0);
        }
    }
    pattern_.resize(interior_count_, interior_count_);
    pattern_.setFromTriplets(trip.begin(), trip.end());
    pattern_.makeCompressed();

    auto slot = [&](int row, int col) -> std::size_t {
      const auto* outer = pattern_.outerIndexPtr();
      const auto* inner = pattern_.innerIndexPtr();
      for (auto k = outer[col]; k < outer[col + 1]; ++k)
        if (inner[k] == row) return static_cast<std::size_t>(k);
      throw validation_error("ConformingP1: missing pattern entry");
    };
    for (std::size_t e = 0; e < mesh_.elements.size(); ++e) {
      const auto& t = mesh_.elements[e];
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const int gi = interior_[static_cast<std::size_t>(t[static_cast<std::size_t>(i)])];
          const int gj = interior_[static_cast<std::size_t>(t[static_cast<std::size_t>(j)])];
          if (gi >= 0 && gj >= 0)
            slots_[(e * 3 + static_cast<std::size_t>(i)) * 3 + static_cast<std::size_t>(j)] =
                slot(gi, gj);
        }
    }
  }

  Mesh mesh_;
  TriangleRule rule_;
  std::vector<int> interior_;
  int interior_count_ = 0;
  Eigen::SparseMatrix<double> pattern_;
  std::vector<std::size_t> slots_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

/// One-shot conforming solve; the comparator entry point.
inline std::vector<double> solve_conforming_p1(int m, const SpatialFunction& a_eval,
                                               const SpatialFunction& f) {
  ConformingP1 solver(m);
  return solver.solve(a_eval, f);
}

}  // namespace dgqmc
