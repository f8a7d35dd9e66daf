#include "dcs/coarse.hpp"

#include <stdexcept>

namespace dcs::coarse {

using fv::Vector;
using mesh::Edge;
using mesh::Side;

CoarseSpace build_coarse_space(const fv::ProblemSpec& spec,
                               const mesh::Decomposition& d) {
  const int nx = d.spec.cells_x;
  const int ny = d.spec.cells_y;

  // One all-Dirichlet operator serves every lifting (identical grids).
  const std::array<fv::EdgeBc, 4> bc = {
      fv::EdgeBc::dirichlet(), fv::EdgeBc::dirichlet(),
      fv::EdgeBc::dirichlet(), fv::EdgeBc::dirichlet()};
  fv::SubdomainOperator op(spec, nx, ny, d.h, bc);
  const Vector zero_source = Vector::Zero(nx * ny);

  CoarseSpace cs;
  for (const auto& sub : d.subdomains) {
    for (Edge e : mesh::kAllEdges) {
      if (sub.edge(e).exterior) continue;
      const int m = d.face_count(e);
      const double len = m * d.h;
      for (int profile = 0; profile < 2; ++profile) {
        BasisFunction b;
        b.owner = sub.id;
        b.edge = e;
        b.profile = profile;

        Vector hat(m);
        for (int k = 0; k < m; ++k) {
          const double s = (k + 0.5) * d.h;
          hat[k] = profile == 0 ? 1.0 - s / len : s / len;
        }

        std::array<Vector, 4> data{};
        data[mesh::edge_index(e)] = hat;
        b.field = op.solve(zero_source, data);

        for (Edge fe : mesh::kAllEdges) {
          if (sub.edge(fe).exterior) continue;
          b.face[mesh::edge_index(fe)] = fv::extract_face_data(
              b.field, fe, fv::EdgeBc::dirichlet(),
              data[mesh::edge_index(fe)], d.h);
        }
        cs.basis.push_back(std::move(b));
      }
    }
  }
  return cs;
}

int jump_rows(const mesh::Decomposition& d) {
  return 2 * d.total_interface_faces;
}

Eigen::VectorXd jump_residual(const std::vector<fv::InterfaceData>& faces,
                              const mesh::Decomposition& d, double q) {
  if (!(q > 0)) throw std::invalid_argument("jump coefficient q must be > 0");
  Eigen::VectorXd r = Eigen::VectorXd::Zero(jump_rows(d));
  for (const auto& itf : d.interfaces) {
    const fv::FaceData& a = faces[itf.id][Side::A];
    const fv::FaceData& b = faces[itf.id][Side::B];
    const int base = 2 * itf.first_face;
    for (int f = 0; f < itf.face_count; ++f) {
      const double ra = a.flux[f] + q * a.trace[f];
      const double rb = b.flux[f] + q * b.trace[f];
      const double oa = -a.flux[f] + q * a.trace[f];
      const double ob = -b.flux[f] + q * b.trace[f];
      r[base + f] = ra - ob;                   // view from A
      r[base + itf.face_count + f] = rb - oa;  // view from B
    }
  }
  return r;
}

JumpSystem::JumpSystem(const CoarseSpace& cs, const mesh::Decomposition& d,
                       double q)
    : q_(q) {
  if (!(q > 0)) throw std::invalid_argument("jump coefficient q must be > 0");
  const int rows = jump_rows(d);

  weights_ = Eigen::VectorXd::Constant(rows, d.h);

  std::vector<Eigen::Triplet<double>> trip;
  for (int j = 0; j < cs.dim(); ++j) {
    const BasisFunction& b = cs.basis[j];
    const auto& sub = d.subdomains[b.owner];
    for (Edge e : mesh::kAllEdges) {
      const mesh::EdgeLink& link = sub.edge(e);
      if (link.exterior) continue;
      const auto& itf = d.interfaces[link.interface];
      const fv::FaceData& fd = b.face[mesh::edge_index(e)];
      const Vector own = fv::robin_combine(fd, q, fv::View::Owner);
      const Vector opp = fv::robin_combine(fd, q, fv::View::Opposite);
      const int own_base =
          2 * itf.first_face + (link.side == Side::A ? 0 : itf.face_count);
      const int other_base =
          2 * itf.first_face + (link.side == Side::A ? itf.face_count : 0);
      for (int f = 0; f < itf.face_count; ++f) {
        trip.emplace_back(own_base + f, j, own[f]);
        trip.emplace_back(other_base + f, j, -opp[f]);
      }
    }
  }
  m_.resize(rows, cs.dim());
  m_.setFromTriplets(trip.begin(), trip.end());
  m_.makeCompressed();
  factorize();
}

JumpSystem::JumpSystem(Eigen::MatrixXd m, Eigen::VectorXd weights, double q)
    : q_(q), m_(m.sparseView()), weights_(std::move(weights)) {
  factorize();
}

void JumpSystem::factorize() {
  const Eigen::SparseMatrix<double> wm = weights_.asDiagonal() * m_;
  normal_ = Eigen::MatrixXd(m_.transpose() * wm);
  if (normal_.rows() > 0) {
    const double guard = 1e-12 * normal_.diagonal().maxCoeff();
    normal_.diagonal().array() += guard;
  }
  ldlt_.compute(normal_);
  if (ldlt_.info() != Eigen::Success)
    throw fv::SolverError("jump system: normal matrix factorization failed");
}

Eigen::VectorXd JumpSystem::solve_rjmin(const Eigen::VectorXd& r0) const {
  if (r0.size() != rows())
    throw std::invalid_argument("solve_rjmin: residual size mismatch");
  if (dim() == 0) return Eigen::VectorXd();

  const Eigen::VectorXd b = m_.transpose() * (weights_.asDiagonal() * r0);
  Eigen::VectorXd c = ldlt_.solve(-b);

  auto optimality = [&](const Eigen::VectorXd& coeff) {
    const Eigen::VectorXd res = r0 + m_ * coeff;
    return (m_.transpose() * (weights_.asDiagonal() * res)).norm();
  };
  const double tol = 1e-8 * (1.0 + b.norm());
  if (optimality(c) > tol) {
    c += ldlt_.solve(-(normal_ * c + b));  // refinement on the normal system
    if (optimality(c) > tol)
      throw fv::SolverError("solve_rjmin: optimality residual above 1e-8");
  }
  return c;
}

void apply_correction(std::vector<fv::CellField>& fields,
                      std::vector<fv::InterfaceData>& faces,
                      const CoarseSpace& cs, const mesh::Decomposition& d,
                      const Eigen::VectorXd& coeffs) {
  if (coeffs.size() != cs.dim())
    throw std::invalid_argument("apply_correction: coefficient size mismatch");
  for (int j = 0; j < cs.dim(); ++j) {
    const double c = coeffs[j];
    if (c == 0.0) continue;
    const BasisFunction& b = cs.basis[j];
    fields[b.owner].v += c * b.field.v;
    const auto& sub = d.subdomains[b.owner];
    for (Edge e : mesh::kAllEdges) {
      const mesh::EdgeLink& link = sub.edge(e);
      if (link.exterior) continue;
      fv::FaceData& fd = faces[link.interface][link.side];
      const fv::FaceData& bf = b.face[mesh::edge_index(e)];
      fd.trace += c * bf.trace;
      fd.flux += c * bf.flux;
    }
  }
}

}  // namespace dcs::coarse
