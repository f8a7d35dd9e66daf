#pragma once

#include <array>
#include <vector>

namespace dcs::mesh {

/// Cardinal edges of a box subdomain, in the fixed traversal order used
/// everywhere (South, East, North, West). Deterministic ordering matters:
/// basis enumeration, row layout and RNG draws all follow it.
enum class Edge : int { South = 0, East = 1, North = 2, West = 3 };

inline constexpr std::array<Edge, 4> kAllEdges = {Edge::South, Edge::East,
                                                  Edge::North, Edge::West};

inline constexpr int edge_index(Edge e) { return static_cast<int>(e); }

/// Side of an interface. A is the lower subdomain id; the canonical
/// interface normal points from A to B (+x for vertical, +y for horizontal).
enum class Side : int { A = 0, B = 1 };

inline constexpr int side_index(Side s) { return static_cast<int>(s); }
inline constexpr Side opposite(Side s) {
  return s == Side::A ? Side::B : Side::A;
}

/// Uniform cartesian decomposition of the square [0, L]^2 into box
/// subdomains, each carrying the same cells_x x cells_y cell grid.
struct DecompositionSpec {
  double domain_side = 4.0;
  int subdomains_x = 2;
  int subdomains_y = 2;
  int cells_x = 20;
  int cells_y = 20;

  /// Cell width h = L / (subdomains_x * cells_x). Cells must be square.
  double cell_width() const;
  /// Throws std::invalid_argument on non-positive counts, non-positive
  /// side length, or non-square cells.
  void validate() const;
};

struct EdgeLink {
  bool exterior = true;
  int neighbor = -1;   // linear subdomain id
  int interface = -1;  // dense interface id
  Side side = Side::A; // which side of the interface this subdomain is on
};

struct Interface {
  int id = -1;
  int sub_a = -1;              // lower subdomain id
  int sub_b = -1;              // higher subdomain id
  Edge edge_a = Edge::East;    // edge of sub_a carrying the interface
  Edge edge_b = Edge::West;    // edge of sub_b carrying the interface
  bool vertical = false;       // vertical: faces stacked along y
  int face_count = 0;
  int first_face = 0;          // offset into the global face numbering
};

struct SubdomainTopology {
  int id = -1;
  int ix = -1;
  int iy = -1;
  std::array<EdgeLink, 4> edges{};

  const EdgeLink& edge(Edge e) const { return edges[edge_index(e)]; }
  int interface_edge_count() const;
};

struct FaceCenter {
  double x = 0;
  double y = 0;
  double s = 0;  // arclength along the edge, ascending on both sides
};

struct Decomposition {
  DecompositionSpec spec;
  double h = 0;
  std::vector<SubdomainTopology> subdomains;
  std::vector<Interface> interfaces;
  int total_interface_faces = 0;

  int sub_index(int ix, int iy) const { return iy * spec.subdomains_x + ix; }
  /// Faces along one subdomain edge: cells_y for E/W, cells_x for N/S.
  int face_count(Edge e) const;
};

/// Builds the subdomain/interface topology. Interfaces get dense ids,
/// vertical ones first (row-major), then horizontal. Each interface is
/// stored once; the two incident subdomains see it through oriented
/// EdgeLinks.
Decomposition build_decomposition(const DecompositionSpec& spec);

/// Face-center coordinates on one subdomain edge, ascending in the
/// arclength coordinate s = (k + 1/2) h. Paired edges on the two sides of
/// an interface enumerate identical s sequences, so faces align
/// index-by-index.
std::vector<FaceCenter> face_centers(const Decomposition& d, int sub, Edge e);

}  // namespace dcs::mesh
