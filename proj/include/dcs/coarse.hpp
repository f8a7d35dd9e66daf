#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <vector>

#include "dcs/fvcore.hpp"
#include "dcs/mesh.hpp"

namespace dcs::coarse {

/// One coarse basis function: the lifting of a hat trace on a single
/// interface edge of its owner subdomain, zero everywhere else. The field
/// solves eta U - Lap(U) = 0 in the owner with Dirichlet data lambda_k on
/// `edge` and 0 on the other edges (exterior included); support is exactly
/// the owner, so the basis is discontinuous across interfaces by
/// construction.
struct BasisFunction {
  int owner = -1;
  mesh::Edge edge = mesh::Edge::South;
  int profile = 0;  // 0: 1 - s/L, 1: s/L at face centers
  fv::CellField field;
  // Face data on each interface edge of the owner (Dirichlet extraction);
  // entries for exterior edges stay empty.
  std::array<fv::FaceData, 4> face{};
};

/// Basis of the discontinuous coarse space: per subdomain, per interface
/// edge, two hat profiles. Ordering is subdomain-major, then edge in
/// S,E,N,W order, then profile, and is part of the contract (column order
/// of the jump system).
struct CoarseSpace {
  std::vector<BasisFunction> basis;
  int dim() const { return static_cast<int>(basis.size()); }
};

/// Solves one all-Dirichlet lifting per basis function and precomputes its
/// interface traces and fluxes. Dimension = 4 x number of interfaces.
CoarseSpace build_coarse_space(const fv::ProblemSpec& spec,
                               const mesh::Decomposition& d);

/// Oriented Robin-jump rows. Interface k owns the row block starting at
/// 2 * first_face(k): first its face_count rows seen from side A, then the
/// same faces seen from side B. Each row is
///   (flux_s + q trace_s) - (-flux_o + q trace_o)
/// with s the viewing side and o the other one, fluxes outward from their
/// own side.
int jump_rows(const mesh::Decomposition& d);
Eigen::VectorXd jump_residual(const std::vector<fv::InterfaceData>& faces,
                              const mesh::Decomposition& d, double q);

/// Weighted least-squares system for the coarse corrector: columns are the
/// jump rows of each basis function, weights the midpoint-rule factor h per
/// face sample. The normal matrix M^T W M is factorized once per q with a
/// tiny diagonal guard (1e-12 x its max diagonal) against near-dependent
/// columns.
class JumpSystem {
 public:
  JumpSystem(const CoarseSpace& cs, const mesh::Decomposition& d, double q);
  /// Direct construction from an explicit matrix; used by oracle tests.
  JumpSystem(Eigen::MatrixXd m, Eigen::VectorXd weights, double q);

  double q() const { return q_; }
  int rows() const { return static_cast<int>(weights_.size()); }
  int dim() const { return static_cast<int>(m_.cols()); }
  const Eigen::SparseMatrix<double>& m() const { return m_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  double weighted_norm2(const Eigen::VectorXd& r) const {
    return (r.array().square() * weights_.array()).sum();
  }

  /// Coefficients minimizing || r0 + M c ||_W^2. Normal-equation
  /// optimality residual is held to 1e-8 relative; throws
  /// fv::SolverError past that.
  Eigen::VectorXd solve_rjmin(const Eigen::VectorXd& r0) const;

 private:
  void factorize();

  double q_ = 0;
  Eigen::SparseMatrix<double> m_;
  Eigen::VectorXd weights_;
  Eigen::MatrixXd normal_;  // M^T W M + guard
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
};

/// u := u + sum_j c_j psi_j, applied to cell fields and interface face data
/// in one linear update so both stay consistent.
void apply_correction(std::vector<fv::CellField>& fields,
                      std::vector<fv::InterfaceData>& faces,
                      const CoarseSpace& cs, const mesh::Decomposition& d,
                      const Eigen::VectorXd& coeffs);

}  // namespace dcs::coarse
