#include "dcs/fvcore.hpp"

#include <cmath>
#include <vector>

namespace dcs::fv {

namespace {

// Per-face boundary weight: h * flux = w_diag * u_c - w_rhs * data.
// Dirichlet: flux = 2(u_f - u_c)/h          -> diag += 2,            rhs += 2 u_f
// Robin:     flux = (2/h)(g - c u_c)/(c+2/h) -> diag += 2ch/(ch+2),  rhs += 2h g/(ch+2)
struct BoundaryWeights {
  double diag;
  double rhs;
};

BoundaryWeights boundary_weights(const EdgeBc& bc, double h) {
  if (bc.kind == BcKind::Dirichlet) return {2.0, 2.0};
  const double denom = bc.robin_coeff * h + 2.0;
  return {2.0 * bc.robin_coeff * h / denom, 2.0 * h / denom};
}

}  // namespace

std::vector<int> edge_cells(int nx, int ny, mesh::Edge e) {
  std::vector<int> cells;
  switch (e) {
    case mesh::Edge::South:
      cells.reserve(nx);
      for (int cx = 0; cx < nx; ++cx) cells.push_back(cx);
      break;
    case mesh::Edge::North:
      cells.reserve(nx);
      for (int cx = 0; cx < nx; ++cx) cells.push_back((ny - 1) * nx + cx);
      break;
    case mesh::Edge::West:
      cells.reserve(ny);
      for (int cy = 0; cy < ny; ++cy) cells.push_back(cy * nx);
      break;
    case mesh::Edge::East:
      cells.reserve(ny);
      for (int cy = 0; cy < ny; ++cy) cells.push_back(cy * nx + nx - 1);
      break;
  }
  return cells;
}

SubdomainOperator::SubdomainOperator(const ProblemSpec& spec, int nx, int ny,
                                     double h, const std::array<EdgeBc, 4>& bc)
    : nx_(nx), ny_(ny), h_(h), eta_(spec.eta), bc_(bc) {
  spec.validate();
  if (nx < 1 || ny < 1 || !(h > 0))
    throw std::invalid_argument("SubdomainOperator: bad grid");
  for (const auto& b : bc_)
    if (b.kind == BcKind::Robin && !(b.robin_coeff > 0))
      throw std::invalid_argument("Robin coefficient must be > 0");

  const int n = nx * ny;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * 5);

  std::array<BoundaryWeights, 4> bw{};
  for (int e = 0; e < 4; ++e) bw[e] = boundary_weights(bc_[e], h);

  for (int cy = 0; cy < ny; ++cy) {
    for (int cx = 0; cx < nx; ++cx) {
      const int c = cy * nx + cx;
      double diag = eta_ * h * h;

      auto face = [&](int ncx, int ncy, mesh::Edge e) {
        if (ncx >= 0 && ncx < nx && ncy >= 0 && ncy < ny) {
          diag += 1.0;
          trip.emplace_back(c, ncy * nx + ncx, -1.0);
        } else {
          diag += bw[mesh::edge_index(e)].diag;
        }
      };
      face(cx, cy - 1, mesh::Edge::South);
      face(cx + 1, cy, mesh::Edge::East);
      face(cx, cy + 1, mesh::Edge::North);
      face(cx - 1, cy, mesh::Edge::West);

      trip.emplace_back(c, c, diag);
    }
  }

  matrix_.resize(n, n);
  matrix_.setFromTriplets(trip.begin(), trip.end());
  matrix_.makeCompressed();
  solver_.compute(matrix_);
  if (solver_.info() != Eigen::Success)
    throw SolverError("SubdomainOperator: factorization failed");
}

Vector SubdomainOperator::assemble_rhs(
    const Vector& source_cells, const std::array<Vector, 4>& edge_data) const {
  Vector rhs = h_ * h_ * source_cells;
  for (mesh::Edge e : mesh::kAllEdges) {
    const int ei = mesh::edge_index(e);
    const Vector& data = edge_data[ei];
    if (data.size() == 0) continue;  // all-zero boundary data
    const auto cells = edge_cells(nx_, ny_, e);
    const double w = boundary_weights(bc_[ei], h_).rhs;
    for (std::size_t k = 0; k < cells.size(); ++k)
      rhs[cells[k]] += w * data[static_cast<int>(k)];
  }
  return rhs;
}

CellField SubdomainOperator::solve(
    const Vector& source_cells, const std::array<Vector, 4>& edge_data) const {
  const Vector rhs = assemble_rhs(source_cells, edge_data);
  Vector x = solver_.solve(rhs);

  const double bnorm = rhs.lpNorm<Eigen::Infinity>();
  const double tol = 1e-12 * (bnorm > 0 ? bnorm : 1.0);
  double res = (matrix_ * x - rhs).lpNorm<Eigen::Infinity>();
  if (res > tol) {
    x += solver_.solve(rhs - matrix_ * x);  // one refinement step
    res = (matrix_ * x - rhs).lpNorm<Eigen::Infinity>();
    if (res > tol)
      throw SolverError("subdomain solve residual " + std::to_string(res) +
                        " above tolerance");
  }

  CellField out(nx_, ny_);
  out.v = std::move(x);
  return out;
}

FaceData extract_face_data(const CellField& field, mesh::Edge e,
                           const EdgeBc& bc, const Vector& edge_data,
                           double h) {
  const auto cells = edge_cells(field.nx, field.ny, e);
  const int m = static_cast<int>(cells.size());
  if (edge_data.size() != 0 && edge_data.size() != m)
    throw std::invalid_argument("extract_face_data: edge data size mismatch");

  FaceData fd(m);
  for (int k = 0; k < m; ++k) {
    const double uc = field.v[cells[k]];
    const double g = edge_data.size() ? edge_data[k] : 0.0;
    double uf;
    if (bc.kind == BcKind::Dirichlet) {
      uf = g;
    } else {
      uf = (g * h + 2.0 * uc) / (bc.robin_coeff * h + 2.0);
    }
    fd.trace[k] = uf;
    fd.flux[k] = 2.0 * (uf - uc) / h;
  }
  return fd;
}

Vector robin_combine(const FaceData& fd, double coeff, View view) {
  if (view == View::Owner) return fd.flux + coeff * fd.trace;
  return -fd.flux + coeff * fd.trace;
}

CellField solve_monodomain(const ProblemSpec& spec, int nx, int ny, double h,
                           const Vector& source_cells) {
  const std::array<EdgeBc, 4> bc = {EdgeBc::dirichlet(), EdgeBc::dirichlet(),
                                    EdgeBc::dirichlet(), EdgeBc::dirichlet()};
  SubdomainOperator op(spec, nx, ny, h, bc);
  return op.solve(source_cells, {});
}

Vector sample_source(const ProblemSpec& spec, int nx, int ny, double h,
                     double x0, double y0) {
  Vector f = Vector::Zero(nx * ny);
  if (!spec.source) return f;
  for (int cy = 0; cy < ny; ++cy)
    for (int cx = 0; cx < nx; ++cx)
      f[cy * nx + cx] = spec.source(x0 + (cx + 0.5) * h, y0 + (cy + 0.5) * h);
  return f;
}

}  // namespace dcs::fv
