#include "dcs/mesh.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dcs::mesh {

namespace {

constexpr double kSquareCellTol = 1e-12;

}  // namespace

double DecompositionSpec::cell_width() const {
  validate();
  return domain_side / (static_cast<double>(subdomains_x) * cells_x);
}

void DecompositionSpec::validate() const {
  if (subdomains_x < 1 || subdomains_y < 1)
    throw std::invalid_argument("subdomain counts must be >= 1");
  if (cells_x < 1 || cells_y < 1)
    throw std::invalid_argument("cell counts must be >= 1");
  if (!(domain_side > 0))
    throw std::invalid_argument("domain_side must be > 0");
  const double hx = domain_side / (static_cast<double>(subdomains_x) * cells_x);
  const double hy = domain_side / (static_cast<double>(subdomains_y) * cells_y);
  if (std::abs(hx - hy) > kSquareCellTol * hx)
    throw std::invalid_argument(
        "cells must be square: subdomains_x*cells_x != subdomains_y*cells_y");
}

int SubdomainTopology::interface_edge_count() const {
  int n = 0;
  for (const auto& e : edges)
    if (!e.exterior) ++n;
  return n;
}

int Decomposition::face_count(Edge e) const {
  return (e == Edge::East || e == Edge::West) ? spec.cells_y : spec.cells_x;
}

Decomposition build_decomposition(const DecompositionSpec& spec) {
  spec.validate();
  Decomposition d;
  d.spec = spec;
  d.h = spec.cell_width();

  const int px = spec.subdomains_x;
  const int py = spec.subdomains_y;

  d.subdomains.resize(static_cast<std::size_t>(px) * py);
  for (int iy = 0; iy < py; ++iy) {
    for (int ix = 0; ix < px; ++ix) {
      SubdomainTopology& t = d.subdomains[d.sub_index(ix, iy)];
      t.id = d.sub_index(ix, iy);
      t.ix = ix;
      t.iy = iy;
    }
  }

  // Vertical interfaces (between x-neighbors), then horizontal. The lower
  // subdomain id is always side A, so the canonical normal points +x / +y.
  auto add_interface = [&d](int sa, int sb, Edge ea, Edge eb, bool vertical,
                            int faces) {
    Interface itf;
    itf.id = static_cast<int>(d.interfaces.size());
    itf.sub_a = sa;
    itf.sub_b = sb;
    itf.edge_a = ea;
    itf.edge_b = eb;
    itf.vertical = vertical;
    itf.face_count = faces;
    itf.first_face = d.total_interface_faces;
    d.total_interface_faces += faces;

    EdgeLink la;
    la.exterior = false;
    la.neighbor = sb;
    la.interface = itf.id;
    la.side = Side::A;
    d.subdomains[sa].edges[edge_index(ea)] = la;

    EdgeLink lb;
    lb.exterior = false;
    lb.neighbor = sa;
    lb.interface = itf.id;
    lb.side = Side::B;
    d.subdomains[sb].edges[edge_index(eb)] = lb;

    d.interfaces.push_back(itf);
  };

  for (int iy = 0; iy < py; ++iy)
    for (int ix = 0; ix + 1 < px; ++ix)
      add_interface(d.sub_index(ix, iy), d.sub_index(ix + 1, iy), Edge::East,
                    Edge::West, true, spec.cells_y);
  for (int iy = 0; iy + 1 < py; ++iy)
    for (int ix = 0; ix < px; ++ix)
      add_interface(d.sub_index(ix, iy), d.sub_index(ix, iy + 1), Edge::North,
                    Edge::South, false, spec.cells_x);

  return d;
}

std::vector<FaceCenter> face_centers(const Decomposition& d, int sub, Edge e) {
  if (sub < 0 || sub >= static_cast<int>(d.subdomains.size()))
    throw std::invalid_argument("face_centers: bad subdomain id " +
                                std::to_string(sub));
  const SubdomainTopology& t = d.subdomains[sub];
  const double h = d.h;
  const double x0 = t.ix * d.spec.cells_x * h;
  const double y0 = t.iy * d.spec.cells_y * h;
  const double wx = d.spec.cells_x * h;
  const double wy = d.spec.cells_y * h;

  const int m = d.face_count(e);
  std::vector<FaceCenter> out(m);
  for (int k = 0; k < m; ++k) {
    const double s = (k + 0.5) * h;
    FaceCenter& f = out[k];
    f.s = s;
    switch (e) {
      case Edge::South:
        f.x = x0 + s;
        f.y = y0;
        break;
      case Edge::North:
        f.x = x0 + s;
        f.y = y0 + wy;
        break;
      case Edge::West:
        f.x = x0;
        f.y = y0 + s;
        break;
      case Edge::East:
        f.x = x0 + wx;
        f.y = y0 + s;
        break;
    }
  }
  return out;
}

}  // namespace dcs::mesh
