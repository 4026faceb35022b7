#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ppfpn/angular.hpp"
#include "ppfpn/coeffs.hpp"

namespace ppfpn {

// Uniform structured grid with two ghost layers on every side, enough for
// one layer of interface reconstructions built from limited slopes.
struct Grid2D {
  int nx = 0;
  int ny = 0;
  double dx = 1.0;
  double dy = 1.0;
  double x0 = 0.0;
  double y0 = 0.0;
  int ghost_width = 2;

  int stride() const { return nx + 2 * ghost_width; }
  int rows() const { return ny + 2 * ghost_width; }
  std::size_t cells() const {
    return static_cast<std::size_t>(stride()) * rows();
  }
  // i in [-ghost_width, nx + ghost_width), same for j.
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j + ghost_width) * stride() +
           (i + ghost_width);
  }
  double xc(int i) const { return x0 + (i + 0.5) * dx; }
  double yc(int j) const { return y0 + (j + 0.5) * dy; }
  double x_face(int i) const { return x0 + i * dx; }
  double y_face(int j) const { return y0 + j * dy; }
};

Grid2D make_grid(int nx, int ny, double xlo, double xhi, double ylo,
                 double yhi);

// Cell fields over the ghosted grid. rho is the angular average moment
// <I>, micro holds the remaining (N+1)^2 - 1 moment coefficients per cell
// (cell major), T the material temperature and phi = a*c*T^4 the emission.
// Moment 0 is excluded from micro; when the full vector is needed its
// value is rho/(2 sqrt(pi)).
struct MomentState {
  int n_micro = 0;
  std::vector<double> rho;
  std::vector<double> T;
  std::vector<double> phi;
  std::vector<double> micro;

  double* micro_at(std::size_t cell) { return micro.data() + cell * n_micro; }
  const double* micro_at(std::size_t cell) const {
    return micro.data() + cell * n_micro;
  }
};

MomentState make_state(const Grid2D& g, int n_micro);

enum class BcKind {
  vacuum,
  planckian,
  periodic,
  reflective,
};

// One piece of an edge, spanning [lo, hi) in the coordinate running along
// the edge (y for left/right, x for bottom/top). Whole-edge conditions use
// a single segment with an unbounded span.
struct BcSegment {
  BcKind kind = BcKind::vacuum;
  double T_b = 0.0;
  double lo = -1e300;
  double hi = 1e300;
};

struct BoundaryCondition {
  std::vector<BcSegment> left;
  std::vector<BcSegment> right;
  std::vector<BcSegment> bottom;
  std::vector<BcSegment> top;

  static BoundaryCondition uniform(BcKind kind, double T_b = 0.0);
};

// Signs picked up by the moment basis under xi -> -xi (x) or eta -> -eta
// (y). The real basis maps to itself up to sign under either reflection,
// so the maps are diagonal, involutive and commute with any diagonal
// filter.
std::vector<double> parity_map_x(int N);
std::vector<double> parity_map_y(int N);

// Edge segment lists clamped to the domain span, validated to tile it and
// sorted by position; periodic edges checked to come in unsegmented pairs.
// fill_ghosts applies the same normalization internally; it is exposed so
// face-based loops can resolve the boundary kind at a given coordinate.
struct NormalizedBc {
  std::vector<BcSegment> left, right, bottom, top;
};

NormalizedBc normalize_bc(const BoundaryCondition& bc, const Grid2D& g);
const BcSegment& bc_segment_at(const std::vector<BcSegment>& edge, double coord);

// Populate all ghost cells from the boundary condition. Vacuum zeroes the
// moments and copies phi, T from the adjacent interior cell; planckian
// imposes the isotropic equilibrium intensity at T_b; periodic wraps;
// reflective mirrors with the parity signs applied to micro. Edges in x
// are filled first, then edges in y sweep the full ghosted row so corner
// blocks end up defined.
void fill_ghosts(const Grid2D& g, MomentState& s, const BoundaryCondition& bc,
                 const AngularTables& tables, const PhysicsConstants& consts);

// Interior cell values as CSV rows "x,y,<name>" with %.17g formatting so
// a write/read round trip is bit exact. read_field_csv returns a full
// ghosted field with zero ghosts.
void write_field_csv(const std::string& path, const Grid2D& g,
                     const std::vector<double>& field,
                     const std::string& name);
std::vector<double> read_field_csv(const std::string& path, const Grid2D& g);

// Legacy structured-points plot file carrying any number of cell fields.
void write_fields_vtk(
    const std::string& path, const Grid2D& g, const std::string& title,
    const std::vector<std::pair<std::string, const std::vector<double>*>>&
        fields);

}
