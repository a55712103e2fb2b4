#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dgqmc/dgspace.hpp"
#include "dgqmc/errors.hpp"
#include "dgqmc/field.hpp"

namespace dgqmc {

using SpatialFunction = std::function<double(double, double)>;

/// Coefficient values at every cached quadrature point of a space.
struct CoefficientTable {
  std::vector<double> volume;  // (element, q)
  std::vector<double> face;    // (face, q)
};

inline CoefficientTable tabulate_coefficient(const DGSpace& space,
                                             const SpatialFunction& a_eval) {
  CoefficientTable table;
  table.volume.resize(space.total_volume_points());
  table.face.resize(space.total_face_points());
  for (std::size_t p = 0; p < table.volume.size(); ++p) {
    table.volume[p] = a_eval(space.vol_x(p), space.vol_y(p));
    if (!(table.volume[p] > 0.0))
      throw numerical_error("coefficient nonpositive at a volume quadrature point");
  }
  for (std::size_t p = 0; p < table.face.size(); ++p) {
    table.face[p] = a_eval(space.face_x(p), space.face_y(p));
    if (!(table.face[p] > 0.0))
      throw numerical_error("coefficient nonpositive at a face quadrature point");
  }
  return table;
}

struct AssembledSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd load;
  int theta = -1;
  double eta = 0.0;
  std::vector<double> sample;  // parameter y the system was assembled at
};

/// Assembles the interior-penalty bilinear form
///   sum_T int_T a grad u . grad v
///   + sum_F int_F [ theta <a grad v>.[u] - <a grad u>.[v] + (eta/h_F)[u].[v] ]
/// over a fixed space. The sparsity pattern and value slots are precomputed
/// once, so repeated assembly for new coefficient samples only accumulates.
class IpdgAssembler {
 public:
  explicit IpdgAssembler(const DGSpace& space) : space_(&space) { build_pattern(); }

  const DGSpace& space() const { return *space_; }
  const Eigen::SparseMatrix<double>& pattern() const { return pattern_; }

  Eigen::SparseMatrix<double> assemble(const CoefficientTable& a, int theta,
                                       double eta) const {
    if (theta != -1 && theta != 0 && theta != 1)
      throw validation_error("assemble: theta must be -1, 0, or +1");
    if (!(eta > 0.0)) throw validation_error("assemble: penalty must be positive");

    Eigen::SparseMatrix<double> A = pattern_;
    double* values = A.valuePtr();
    const int nl = space_->local_dofs();
    const int nq_vol = space_->volume_points_per_element();
    const int nq_face = space_->face_points_per_face();
    const Mesh& mesh = space_->mesh();

    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
      const std::size_t* slots = vol_slots_.data() + e * nl * nl;
      for (int q = 0; q < nq_vol; ++q) {
        const std::size_t p = e * nq_vol + static_cast<std::size_t>(q);
        const double wa = space_->vol_w(p) * a.volume[p];
        for (int i = 0; i < nl; ++i) {
          const auto& gi = space_->vol_grad(static_cast<int>(e), q, i);
          for (int j = 0; j < nl; ++j) {
            const auto& gj = space_->vol_grad(static_cast<int>(e), q, j);
            values[slots[i * nl + j]] += wa * (gi[0] * gj[0] + gi[1] * gj[1]);
          }
        }
      }
    }

    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
      const Face& face = mesh.faces[f];
      const bool interior = !face.is_boundary();
      const double avg = interior ? 0.5 : 1.0;
      const double pen = eta / face.diameter;
      const int sides = interior ? 2 : 1;
      const std::size_t* slots = face_slots_.data() + f * 4 * nl * nl;
      for (int q = 0; q < nq_face; ++q) {
        const std::size_t p = f * nq_face + static_cast<std::size_t>(q);
        const double w = space_->face_w(p);
        const double ac = a.face[p];
        // Per side: trace value, a * normal gradient, jump sign.
        for (int su = 0; su < sides; ++su) {
          const double sgn_u = su == 0 ? 1.0 : -1.0;
          for (int sv = 0; sv < sides; ++sv) {
            const double sgn_v = sv == 0 ? 1.0 : -1.0;
            const std::size_t* block = slots + (sv * 2 + su) * nl * nl;
            for (int i = 0; i < nl; ++i) {  // test function v
              const double vv = space_->face_value(p, sv, i);
              const auto& gv = space_->face_grad(p, sv, i);
              const double gnv = ac * (gv[0] * face.normal[0] + gv[1] * face.normal[1]);
              for (int j = 0; j < nl; ++j) {  // trial function u
                const double vu = space_->face_value(p, su, j);
                const auto& gu = space_->face_grad(p, su, j);
                const double gnu = ac * (gu[0] * face.normal[0] + gu[1] * face.normal[1]);
                values[block[i * nl + j]] +=
                    w * (theta * avg * gnv * sgn_u * vu - avg * gnu * sgn_v * vv +
                         pen * sgn_u * vu * sgn_v * vv);
              }
            }
          }
        }
      }
    }
    return A;
  }

 private:
  void build_pattern() {
    const int nl = space_->local_dofs();
    const Mesh& mesh = space_->mesh();
    const int n = space_->dofs();

    std::vector<Eigen::Triplet<double>> trip;
    auto add_block = [&](int er, int ec) {
      for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nl; ++j)
          trip.emplace_back(er * nl + i, ec * nl + j, 0.0);
    };
    for (std::size_t e = 0; e < mesh.elements.size(); ++e)
      add_block(static_cast<int>(e), static_cast<int>(e));
    for (const Face& f : mesh.faces) {
      if (f.is_boundary()) continue;
      add_block(f.plus_element, f.minus_element);
      add_block(f.minus_element, f.plus_element);
    }
    pattern_.resize(n, n);
    pattern_.setFromTriplets(trip.begin(), trip.end());
    pattern_.makeCompressed();

    auto slot = [&](int row, int col) -> std::size_t {
      const auto* outer = pattern_.outerIndexPtr();
      const auto* inner = pattern_.innerIndexPtr();
      for (auto k = outer[col]; k < outer[col + 1]; ++k)
        if (inner[k] == row) return static_cast<std::size_t>(k);
      throw validation_error("IpdgAssembler: missing pattern entry");
    };
    auto fill_block = [&](std::size_t* out, int er, int ec) {
      for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nl; ++j)
          out[i * nl + j] = slot(er * nl + i, ec * nl + j);
    };

    vol_slots_.resize(mesh.elements.size() * static_cast<std::size_t>(nl) * nl);
    for (std::size_t e = 0; e < mesh.elements.size(); ++e)
      fill_block(vol_slots_.data() + e * nl * nl, static_cast<int>(e),
                 static_cast<int>(e));

    // Face block order: (sv, su) in {PP, PM, MP, MM}; boundary uses PP only.
    face_slots_.resize(mesh.faces.size() * 4 * static_cast<std::size_t>(nl) * nl);
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
      const Face& face = mesh.faces[f];
      std::size_t* base = face_slots_.data() + f * 4 * nl * nl;
      fill_block(base + 0 * nl * nl, face.plus_element, face.plus_element);
      if (!face.is_boundary()) {
        fill_block(base + 1 * nl * nl, face.plus_element, face.minus_element);
        fill_block(base + 2 * nl * nl, face.minus_element, face.plus_element);
        fill_block(base + 3 * nl * nl, face.minus_element, face.minus_element);
      }
    }
  }

  const DGSpace* space_;
  Eigen::SparseMatrix<double> pattern_;
  std::vector<std::size_t> vol_slots_;
  std::vector<std::size_t> face_slots_;
};

inline AssembledSystem assemble_ipdg(const DGSpace& space, const SpatialFunction& a_eval,
                                     int theta, double eta) {
  IpdgAssembler assembler(space);
  AssembledSystem sys;
  sys.matrix = assembler.assemble(tabulate_coefficient(space, a_eval), theta, eta);
  sys.load = Eigen::VectorXd::Zero(space.dofs());
  sys.theta = theta;
  sys.eta = eta;
  return sys;
}

inline Eigen::VectorXd assemble_load(const DGSpace& space, const SpatialFunction& f) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(space.dofs());
  const int nl = space.local_dofs();
  const int nq = space.volume_points_per_element();
  for (std::size_t e = 0; e < space.mesh().elements.size(); ++e) {
    for (int q = 0; q < nq; ++q) {
      const std::size_t p = e * nq + static_cast<std::size_t>(q);
      const double wf = space.vol_w(p) * f(space.vol_x(p), space.vol_y(p));
      for (int i = 0; i < nl; ++i)
        b[static_cast<Eigen::Index>(e) * nl + i] += wf * space.vol_value(q, i);
    }
  }
  return b;
}

/// Direct solver with the analyze step cached for a fixed sparsity pattern.
/// The symmetric path is tried first for theta = -1; an indefinite matrix
/// (penalty below the coercivity threshold) falls back to LU.
class SystemSolver {
 public:
  SystemSolver(const IpdgAssembler& assembler, int theta) : theta_(theta) {
    lu_.analyzePattern(assembler.pattern());
    if (theta_ == -1) ldlt_.analyzePattern(assembler.pattern());
  }

  Eigen::VectorXd solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b) {
    Eigen::VectorXd u;
    bool done = false;
    if (theta_ == -1) {
      ldlt_.factorize(A);
      if (ldlt_.info() == Eigen::Success) {
        u = ldlt_.solve(b);
        done = ldlt_.info() == Eigen::Success;
      }
    }
    if (!done) {
      lu_.factorize(A);
      if (lu_.info() != Eigen::Success)
        throw numerical_error("solve: factorization failed (possible coercivity loss)");
      u = lu_.solve(b);
      if (lu_.info() != Eigen::Success)
        throw numerical_error("solve: backsubstitution failed");
    }
    const double bnorm = b.norm();
    if (bnorm > 0.0) {
      const double residual = (A * u - b).norm() / bnorm;
      if (!(residual <= 1e-10))
        throw numerical_error("solve: residual " + std::to_string(residual) +
                              " exceeds tolerance (possible coercivity loss)");
    }
    return u;
  }

 private:
  int theta_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

inline std::vector<double> solve_system(const AssembledSystem& sys) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  Eigen::VectorXd u;
  if (sys.theta == -1) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(sys.matrix);
    if (ldlt.info() == Eigen::Success) u = ldlt.solve(sys.load);
  }
  if (u.size() == 0) {
    lu.compute(sys.matrix);
    if (lu.info() != Eigen::Success)
      throw numerical_error("solve_system: factorization failed (possible coercivity loss)");
    u = lu.solve(sys.load);
  }
  const double bnorm = sys.load.norm();
  if (bnorm > 0.0 && !((sys.matrix * u - sys.load).norm() / bnorm <= 1e-10))
    throw numerical_error("solve_system: residual exceeds tolerance");
  return {u.data(), u.data() + u.size()};
}

namespace detail {

/// Squared jump and average-flux accumulators shared by the two DG norms.
struct FaceNormTerms {
  double jump_sq = 0.0;      // sum_F eta/h_F ||[v]||^2
  double avg_flux_sq = 0.0;  // sum_F h_F/eta ||<a grad v>||^2
};

inline FaceNormTerms face_norm_terms(const DGSpace& space, std::span<const double> u,
                                     std::span<const double> a_face, double eta) {
  FaceNormTerms out;
  const int nl = space.local_dofs();
  const int nq = space.face_points_per_face();
  const Mesh& mesh = space.mesh();
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& face = mesh.faces[f];
    const bool interior = !face.is_boundary();
    double jump_acc = 0.0, avg_acc = 0.0;
    for (int q = 0; q < nq; ++q) {
      const std::size_t p = f * nq + static_cast<std::size_t>(q);
      const double w = space.face_w(p);
      const double ac = a_face[p];
      double val_p = 0.0, val_m = 0.0;
      double flux_p[2] = {0.0, 0.0}, flux_m[2] = {0.0, 0.0};
      for (int i = 0; i < nl; ++i) {
        const double cp = u[static_cast<std::size_t>(face.plus_element) * nl + i];
        val_p += cp * space.face_value(p, 0, i);
        const auto& gp = space.face_grad(p, 0, i);
        flux_p[0] += cp * gp[0];
        flux_p[1] += cp * gp[1];
      }
      if (interior) {
        for (int i = 0; i < nl; ++i) {
          const double cm = u[static_cast<std::size_t>(face.minus_element) * nl + i];
          val_m += cm * space.face_value(p, 1, i);
          const auto& gm = space.face_grad(p, 1, i);
          flux_m[0] += cm * gm[0];
          flux_m[1] += cm * gm[1];
        }
      }
      const double jump = interior ? val_p - val_m : val_p;
      jump_acc += w * jump * jump;
      const double s = interior ? 0.5 : 1.0;
      const double ax = s * ac * (interior ? flux_p[0] + flux_m[0] : flux_p[0]);
      const double ay = s * ac * (interior ? flux_p[1] + flux_m[1] : flux_p[1]);
      avg_acc += w * (ax * ax + ay * ay);
    }
    out.jump_sq += (eta / face.diameter) * jump_acc;
    out.avg_flux_sq += (face.diameter / eta) * avg_acc;
  }
  return out;
}

inline double broken_gradient_sq(const DGSpace& space, std::span<const double> u,
                                 std::span<const double> a_vol) {
  double acc = 0.0;
  const int nl = space.local_dofs();
  const int nq = space.volume_points_per_element();
  for (std::size_t e = 0; e < space.mesh().elements.size(); ++e) {
    for (int q = 0; q < nq; ++q) {
      const std::size_t p = e * nq + static_cast<std::size_t>(q);
      double gx = 0.0, gy = 0.0;
      for (int i = 0; i < nl; ++i) {
        const double c = u[e * nl + static_cast<std::size_t>(i)];
        const auto& g = space.vol_grad(static_cast<int>(e), q, i);
        gx += c * g[0];
        gy += c * g[1];
      }
      acc += space.vol_w(p) * a_vol[p] * (gx * gx + gy * gy);
    }
  }
  return acc;
}

}  // namespace detail

/// Broken energy norm ||v||_{V_h}: weighted gradients plus penalized jumps.
inline double dg_norm(const DGSpace& space, std::span<const double> u,
                      const CoefficientTable& a, double eta) {
  if (u.size() != static_cast<std::size_t>(space.dofs()))
    throw validation_error("dg_norm: dof vector length mismatch");
  const double vol = detail::broken_gradient_sq(space, u, a.volume);
  const auto face = detail::face_norm_terms(space, u, a.face, eta);
  return std::sqrt(vol + face.jump_sq);
}

/// Star norm ||v||_{V*_h}: adds the scaled average-flux face terms.
inline double dg_star_norm(const DGSpace& space, std::span<const double> u,
                           const CoefficientTable& a, double eta) {
  if (u.size() != static_cast<std::size_t>(space.dofs()))
    throw validation_error("dg_star_norm: dof vector length mismatch");
  const double vol = detail::broken_gradient_sq(space, u, a.volume);
  const auto face = detail::face_norm_terms(space, u, a.face, eta);
  return std::sqrt(vol + face.jump_sq + face.avg_flux_sq);
}

inline double dg_norm(const DGSpace& space, std::span<const double> u,
                      const SpatialFunction& a_eval, double eta) {
  return dg_norm(space, u, tabulate_coefficient(space, a_eval), eta);
}

inline double dg_star_norm(const DGSpace& space, std::span<const double> u,
                           const SpatialFunction& a_eval, double eta) {
  return dg_star_norm(space, u, tabulate_coefficient(space, a_eval), eta);
}

/// L2 norm of a dof vector through the cached mass quadrature.
inline double l2_norm(const DGSpace& space, std::span<const double> u) {
  double acc = 0.0;
  const int nl = space.local_dofs();
  const int nq = space.volume_points_per_element();
  for (std::size_t e = 0; e < space.mesh().elements.size(); ++e) {
    for (int q = 0; q < nq; ++q) {
      double val = 0.0;
      for (int i = 0; i < nl; ++i)
        val += u[e * nl + static_cast<std::size_t>(i)] * space.vol_value(q, i);
      acc += space.vol_w(e * nq + static_cast<std::size_t>(q)) * val * val;
    }
  }
  return std::sqrt(acc);
}

/// L2 distance between two dof vectors of the same space.
inline double l2_error(const DGSpace& space, std::span<const double> u,
                       std::span<const double> v) {
  if (u.size() != v.size() || u.size() != static_cast<std::size_t>(space.dofs()))
    throw validation_error("l2_error: dof vector length mismatch");
  std::vector<double> diff(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) diff[i] = u[i] - v[i];
  return l2_norm(space, diff);
}

/// L2 distance to an analytic reference, refined quadrature (degree 12).
inline double l2_error(const DGSpace& space, std::span<const double> u,
                       const SpatialFunction& reference) {
  if (u.size() != static_cast<std::size_t>(space.dofs()))
    throw validation_error("l2_error: dof vector length mismatch");
  const TriangleRule rule = triangle_rule(12);
  const Mesh& mesh = space.mesh();
  double acc = 0.0;
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto& t = mesh.elements[e];
    const Point2& a = mesh.vertices[t[0]];
    const Point2& b = mesh.vertices[t[1]];
    const Point2& c = mesh.vertices[t[2]];
    const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double x = a.x + (b.x - a.x) * rule.x[q] + (c.x - a.x) * rule.y[q];
      const double y = a.y + (b.y - a.y) * rule.x[q] + (c.y - a.y) * rule.y[q];
      const double diff = space.evaluate(u, static_cast<int>(e), x, y) - reference(x, y);
      acc += rule.weights[q] * det * diff * diff;
    }
  }
  return std::sqrt(acc);
}

/// Largest per-face discrete trace constant of the mesh, the C_tr entering
/// the penalty threshold check.
inline double discrete_trace_constant(const DGSpace& space) {
  const Mesh& mesh = space.mesh();
  const double k = space.degree();
  double worst = 0.0;
  for (const Face& f : mesh.faces) {
    for (int side = 0; side < (f.is_boundary() ? 1 : 2); ++side) {
      const int e = side == 0 ? f.plus_element : f.minus_element;
      const double ht = mesh.element_diameters[static_cast<std::size_t>(e)];
      const double area = mesh.element_area(e);
      worst = std::max(worst, (k + 1.0) * (k + 2.0) * f.diameter * ht / (2.0 * area));
    }
  }
  return std::sqrt(worst);
}

struct PenaltyPolicy {
  enum class Kind { analytic, constant } kind = Kind::analytic;
  double value = 0.0;  // used by Kind::constant

  static PenaltyPolicy analytic() { return {Kind::analytic, 0.0}; }
  static PenaltyPolicy constant(double eta) { return {Kind::constant, eta}; }
};

struct PenaltyResult {
  double eta = 0.0;
  double stability_threshold = 0.0;  // 0 when no check applies (theta = +1)
  bool below_threshold = false;
};

/// Penalty selection. Affine: the y-independent a_max^2 / a_min. Lognormal:
///   eta(y) = max{ exp(sum_j 3 beta_j |y_j|), a0_min exp(-sum_j beta_j |y_j|) }.
/// A constant override reproduces fixed-eta experiments. For theta != +1 the
/// result is flagged when eta falls below
///   tau a_max(y)^2 C_tr^2 N_faces (theta-1)^2 / (4 a_min(y)).
inline PenaltyResult penalty_value(const RandomFieldSpec& spec, std::span<const double> y,
                                   int theta, const PenaltyPolicy& policy,
                                   double c_tr = 0.0, double tau = 1.0) {
  PenaltyResult result;
  if (policy.kind == PenaltyPolicy::Kind::constant) {
    if (!(policy.value > 0.0))
      throw validation_error("penalty_value: override must be positive");
    result.eta = policy.value;
  } else if (spec.mode == FieldMode::affine) {
    const CoefficientBounds b = coefficient_bounds(spec);
    result.eta = b.a_max * b.a_max / b.a_min;
  } else {
    if (y.size() != static_cast<std::size_t>(spec.dimension))
      throw validation_error("penalty_value: parameter dimension mismatch");
    double weighted = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j)
      weighted += std::abs(y[j]) * spec.basis[j].amplitude;
    result.eta = std::max(std::exp(3.0 * weighted), spec.a0_min * std::exp(-weighted));
  }

  if (theta != 1 && c_tr > 0.0) {
    const CoefficientBounds b = coefficient_bounds(spec, y);
    const double dtheta = theta - 1.0;
    result.stability_threshold = tau * b.a_max * b.a_max * c_tr * c_tr *
                                 Mesh::max_faces_per_element * dtheta * dtheta /
                                 (4.0 * b.a_min);
    result.below_threshold = result.eta < result.stability_threshold;
  }
  return result;
}

}  // namespace dgqmc
