#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <functional>
#include <stdexcept>
#include <string>

#include "dcs/mesh.hpp"

namespace dcs::fv {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Reported when a linear solve fails to reach its residual target or a
/// factorization breaks down.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Reaction-diffusion problem eta*u - Lap(u) = f with homogeneous exterior
/// Dirichlet data. A null source means f = 0.
struct ProblemSpec {
  double eta = 0.0;
  std::function<double(double, double)> source;

  void validate() const {
    if (eta < 0) throw std::invalid_argument("eta must be >= 0");
  }
};

enum class BcKind { Dirichlet, Robin };

struct EdgeBc {
  BcKind kind = BcKind::Dirichlet;
  double robin_coeff = 0.0;  // > 0 when kind == Robin

  static EdgeBc dirichlet() { return {BcKind::Dirichlet, 0.0}; }
  static EdgeBc robin(double c) { return {BcKind::Robin, c}; }
};

/// Cell-centered values on an nx x ny grid, row-major with x fastest.
struct CellField {
  int nx = 0;
  int ny = 0;
  Vector v;

  CellField() = default;
  CellField(int nx_, int ny_) : nx(nx_), ny(ny_), v(Vector::Zero(nx_ * ny_)) {}

  double& at(int cx, int cy) { return v[cy * nx + cx]; }
  double at(int cx, int cy) const { return v[cy * nx + cx]; }
  double max_abs() const { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }
};

/// Per-face (trace, outward flux) pairs along one subdomain edge, ordered
/// ascending in the edge arclength so both sides of an interface align.
struct FaceData {
  Vector trace;
  Vector flux;

  FaceData() = default;
  explicit FaceData(int m) : trace(Vector::Zero(m)), flux(Vector::Zero(m)) {}
  int size() const { return static_cast<int>(trace.size()); }
};

/// The two oriented views of one interface, indexed by mesh::Side. Fluxes
/// are stored outward from their own side.
struct InterfaceData {
  std::array<FaceData, 2> data;

  FaceData& operator[](mesh::Side s) { return data[mesh::side_index(s)]; }
  const FaceData& operator[](mesh::Side s) const {
    return data[mesh::side_index(s)];
  }
};

enum class View { Owner, Opposite };

/// Assembled and factorized cell-centered FV operator for one box grid.
///
/// Two-point fluxes: interior face (u_nb - u_c)/h, boundary face
/// 2(u_f - u_c)/h with the face value u_f either given (Dirichlet) or
/// eliminated through the Robin relation flux + c*u_f = g. Cell balance
/// eta h^2 u_c - h sum(flux) = h^2 f_c gives a symmetric positive-definite
/// matrix. Boundary data enters only the right-hand side, so one
/// factorization serves every solve with the same edge kinds and
/// coefficients.
class SubdomainOperator {
 public:
  SubdomainOperator(const ProblemSpec& spec, int nx, int ny, double h,
                    const std::array<EdgeBc, 4>& bc);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double h() const { return h_; }
  const std::array<EdgeBc, 4>& bc() const { return bc_; }
  const SparseMatrix& matrix() const { return matrix_; }

  /// Right-hand side for given per-cell source values and per-edge boundary
  /// data (Dirichlet values or Robin data g, one entry per face).
  Vector assemble_rhs(const Vector& source_cells,
                      const std::array<Vector, 4>& edge_data) const;

  /// Direct solve, residual-checked to 1e-12 relative (one refinement step
  /// if needed). Throws SolverError on failure.
  CellField solve(const Vector& source_cells,
                  const std::array<Vector, 4>& edge_data) const;

 private:
  int nx_ = 0, ny_ = 0;
  double h_ = 0, eta_ = 0;
  std::array<EdgeBc, 4> bc_{};
  SparseMatrix matrix_;
  Eigen::SimplicialLDLT<SparseMatrix> solver_;
};

/// Indices of the cells adjacent to one edge, in face order.
std::vector<int> edge_cells(int nx, int ny, mesh::Edge e);

/// Face traces and outward fluxes of a solved field along one edge.
/// Robin edge: u_f = (g h + 2 u_c)/(c h + 2); Dirichlet edge: u_f = given.
/// Either way flux = 2(u_f - u_c)/h, and on Robin edges flux + c*u_f = g
/// holds identically.
FaceData extract_face_data(const CellField& field, mesh::Edge e,
                           const EdgeBc& bc, const Vector& edge_data,
                           double h);

/// Robin combination of stored face data. Owner view: flux + coeff*trace.
/// Opposite view (normal flipped): -flux + coeff*trace, which is the Robin
/// datum the neighbor receives.
Vector robin_combine(const FaceData& fd, double coeff, View view);

/// Global FV solve on the undecomposed grid with homogeneous exterior
/// Dirichlet data; the error reference when f != 0.
CellField solve_monodomain(const ProblemSpec& spec, int nx, int ny, double h,
                           const Vector& source_cells);

/// Source values at cell centers of an nx x ny grid whose lower-left corner
/// sits at (x0, y0). Null source gives zeros.
Vector sample_source(const ProblemSpec& spec, int nx, int ny, double h,
                     double x0, double y0);

}  // namespace dcs::fv
