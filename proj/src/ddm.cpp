#include "dcs/ddm.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace dcs::ddm {

using fv::Vector;
using mesh::Edge;
using mesh::Side;

namespace {

// Engine-output mapping done by hand so draws are identical across standard
// library implementations.
double uniform_pm1(std::mt19937_64& eng) {
  const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

unsigned edge_mask(const mesh::SubdomainTopology& t) {
  unsigned mask = 0;
  for (Edge e : mesh::kAllEdges)
    if (t.edge(e).exterior) mask |= 1u << mesh::edge_index(e);
  return mask;
}

bool field_ok(const fv::CellField& f, double guard) {
  const double m = f.max_abs();
  return std::isfinite(m) && m <= guard;
}

}  // namespace

void RunConfig::validate() const {
  decomposition.validate();
  problem.validate();
  if (!(p > 0)) throw std::invalid_argument("p must be > 0");
  if (!(q > 0)) throw std::invalid_argument("q must be > 0");
  if (iterations < 0) throw std::invalid_argument("iterations must be >= 0");
}

Driver::Driver(RunConfig cfg, std::shared_ptr<const coarse::CoarseSpace> cs,
               std::shared_ptr<const coarse::JumpSystem> js)
    : cfg_(std::move(cfg)), cs_(std::move(cs)), js_(std::move(js)) {
  cfg_.validate();
  decomp_ = mesh::build_decomposition(cfg_.decomposition);

  const int nx = decomp_.spec.cells_x;
  const int ny = decomp_.spec.cells_y;
  has_source_ = static_cast<bool>(cfg_.problem.source);
  source_cells_.reserve(decomp_.subdomains.size());
  for (const auto& sub : decomp_.subdomains)
    source_cells_.push_back(fv::sample_source(cfg_.problem, nx, ny, decomp_.h,
                                              sub.ix * nx * decomp_.h,
                                              sub.iy * ny * decomp_.h));

  for (const auto& sub : decomp_.subdomains) {
    const unsigned mask = edge_mask(sub);
    if (ops_.count(mask)) continue;
    std::array<fv::EdgeBc, 4> bc{};
    for (Edge e : mesh::kAllEdges)
      bc[mesh::edge_index(e)] = sub.edge(e).exterior
                                    ? fv::EdgeBc::dirichlet()
                                    : fv::EdgeBc::robin(cfg_.p);
    ops_.try_emplace(mask, cfg_.problem, nx, ny, decomp_.h, bc);
  }

  if (cfg_.method == Method::DcsRjmin) {
    if (!cs_)
      cs_ = std::make_shared<const coarse::CoarseSpace>(
          coarse::build_coarse_space(cfg_.problem, decomp_));
    if (!js_)
      js_ = std::make_shared<const coarse::JumpSystem>(*cs_, decomp_, cfg_.q);
    if (js_->q() != cfg_.q)
      throw std::invalid_argument("jump system was built for a different q");
  }
}

const fv::SubdomainOperator& Driver::op_for(
    const mesh::SubdomainTopology& t) const {
  return ops_.at(edge_mask(t));
}

IterationState Driver::init_state() const {
  IterationState st;
  const int nx = decomp_.spec.cells_x;
  const int ny = decomp_.spec.cells_y;
  st.fields.assign(decomp_.subdomains.size(), fv::CellField(nx, ny));
  st.faces.resize(decomp_.interfaces.size());
  for (const auto& itf : decomp_.interfaces) {
    st.faces[itf.id][Side::A] = fv::FaceData(itf.face_count);
    st.faces[itf.id][Side::B] = fv::FaceData(itf.face_count);
  }

  if (cfg_.init == Init::RandomRobin) {
    std::mt19937_64 eng(cfg_.seed);
    // The draw for side S is the Robin datum *incoming* to the subdomain on
    // side S. The neighbor reads robin_combine(opposite slot, p, Opposite)
    // = -flux, so storing (trace 0, flux -g) on the opposite slot delivers
    // exactly g, for any p.
    for (const auto& itf : decomp_.interfaces) {
      for (Side s : {Side::A, Side::B}) {
        fv::FaceData& slot = st.faces[itf.id][mesh::opposite(s)];
        for (int f = 0; f < itf.face_count; ++f)
          slot.flux[f] = -uniform_pm1(eng);
      }
    }
  }
  return st;
}

void Driver::osm_step(IterationState& st) const {
  const std::size_t nsub = decomp_.subdomains.size();

  // Incoming Robin data is gathered from the previous state's face data
  // before any field is overwritten.
  std::vector<std::array<Vector, 4>> incoming(nsub);
  for (const auto& sub : decomp_.subdomains)
    for (Edge e : mesh::kAllEdges) {
      const mesh::EdgeLink& link = sub.edge(e);
      if (link.exterior) continue;
      incoming[sub.id][mesh::edge_index(e)] = fv::robin_combine(
          st.faces[link.interface][mesh::opposite(link.side)], cfg_.p,
          fv::View::Opposite);
    }

  for (const auto& sub : decomp_.subdomains)
    st.fields[sub.id] = op_for(sub).solve(source_cells_[sub.id],
                                          incoming[sub.id]);

  for (const auto& sub : decomp_.subdomains)
    for (Edge e : mesh::kAllEdges) {
      const mesh::EdgeLink& link = sub.edge(e);
      if (link.exterior) continue;
      st.faces[link.interface][link.side] = fv::extract_face_data(
          st.fields[sub.id], e, fv::EdgeBc::robin(cfg_.p),
          incoming[sub.id][mesh::edge_index(e)], decomp_.h);
    }
}

void Driver::coarse_correct(IterationState& st) const {
  const Eigen::VectorXd r0 = coarse::jump_residual(st.faces, decomp_, cfg_.q);
  const Eigen::VectorXd c = js_->solve_rjmin(r0);
  coarse::apply_correction(st.fields, st.faces, *cs_, decomp_, c);
}

std::pair<double, double> Driver::dcs_rjmin_step(IterationState& st) const {
  osm_step(st);
  const double j_q_half = jump_functional(st, cfg_.q);
  coarse_correct(st);
  return {j_q_half, jump_functional(st, cfg_.q)};
}

double Driver::jump_functional(const IterationState& st, double coeff) const {
  if (!(coeff > 0))
    throw std::invalid_argument("jump coefficient must be > 0");
  double sum = 0;
  for (const auto& itf : decomp_.interfaces) {
    const fv::FaceData& a = st.faces[itf.id][Side::A];
    const fv::FaceData& b = st.faces[itf.id][Side::B];
    for (int f = 0; f < itf.face_count; ++f) {
      const double from_a = (a.flux[f] + coeff * a.trace[f]) -
                            (-b.flux[f] + coeff * b.trace[f]);
      const double from_b = (b.flux[f] + coeff * b.trace[f]) -
                            (-a.flux[f] + coeff * a.trace[f]);
      sum += decomp_.h * (from_a * from_a + from_b * from_b);
    }
  }
  return sum;
}

std::pair<double, double> Driver::error_norms(
    const IterationState& st, const fv::CellField* reference) const {
  const int nx = decomp_.spec.cells_x;
  const int ny = decomp_.spec.cells_y;
  if (reference && (reference->nx != nx * decomp_.spec.subdomains_x ||
                    reference->ny != ny * decomp_.spec.subdomains_y))
    throw std::invalid_argument("error_norms: reference grid mismatch");

  double inf = 0;
  double l2sq = 0;
  for (const auto& sub : decomp_.subdomains) {
    const fv::CellField& f = st.fields[sub.id];
    for (int cy = 0; cy < ny; ++cy)
      for (int cx = 0; cx < nx; ++cx) {
        double diff = f.at(cx, cy);
        if (reference)
          diff -= reference->at(sub.ix * nx + cx, sub.iy * ny + cy);
        inf = std::max(inf, std::abs(diff));
        l2sq += decomp_.h * decomp_.h * diff * diff;
      }
  }
  return {inf, std::sqrt(l2sq)};
}

IterationMetrics Driver::metrics(const IterationState& st, double j_q_half,
                                 double increment,
                                 const fv::CellField* reference) const {
  IterationMetrics m;
  m.iteration = st.iteration;
  m.j_p = jump_functional(st, cfg_.p);
  m.j_q = jump_functional(st, cfg_.q);
  m.j_q_half = j_q_half;
  std::tie(m.err_inf, m.err_l2) = error_norms(st, reference);
  m.increment_l2 = increment;
  m.diverged = st.diverged;
  return m;
}

RunResult Driver::run() const {
  fv::CellField monodomain;
  const fv::CellField* reference = nullptr;
  if (has_source_) {
    const int gx = decomp_.spec.subdomains_x * decomp_.spec.cells_x;
    const int gy = decomp_.spec.subdomains_y * decomp_.spec.cells_y;
    monodomain = fv::solve_monodomain(
        cfg_.problem, gx, gy, decomp_.h,
        fv::sample_source(cfg_.problem, gx, gy, decomp_.h, 0.0, 0.0));
    reference = &monodomain;
  }

  RunResult result;
  IterationState st = init_state();
  if (cfg_.init == Init::RandomRobin) osm_step(st);  // materialize u^0
  result.history.push_back(
      metrics(st, jump_functional(st, cfg_.q), 0.0, reference));

  for (int n = 1; n <= cfg_.iterations && !st.diverged; ++n) {
    std::vector<Vector> prev;
    prev.reserve(st.fields.size());
    for (const auto& f : st.fields) prev.push_back(f.v);

    // Increment and half-step functional are taken between the local solves
    // and the coarse correction: the increment is || u^{n+1/2} - u^n ||.
    osm_step(st);
    double inc_sq = 0;
    for (std::size_t i = 0; i < st.fields.size(); ++i)
      inc_sq += decomp_.h * decomp_.h *
                (st.fields[i].v - prev[i]).squaredNorm();
    const double j_q_half = jump_functional(st, cfg_.q);
    if (cfg_.method == Method::DcsRjmin) coarse_correct(st);
    st.iteration = n;

    for (const auto& f : st.fields)
      if (!field_ok(f, kDivergenceGuard)) st.diverged = true;

    result.history.push_back(
        metrics(st, j_q_half, std::sqrt(inc_sq), reference));
  }

  result.iterations_run = st.iteration;
  result.diverged = st.diverged;
  const double e0 = result.history.front().err_inf;
  const double en = result.history.back().err_inf;
  if (e0 == en)
    result.log_ratio = 0.0;
  else if (e0 > 0)
    result.log_ratio = std::log10(en / e0);
  else
    result.log_ratio = std::numeric_limits<double>::infinity();
  result.state = std::move(st);
  return result;
}

}  // namespace dcs::ddm
