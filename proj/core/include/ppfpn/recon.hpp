#pragma once

#include <cstddef>
#include <vector>

#include "ppfpn/angular.hpp"
#include "ppfpn/mesh.hpp"

namespace ppfpn {

// Monotonized central slope: zero at extrema, the centered difference on
// smooth monotone data, and antisymmetric under reflection of the stencil.
double muscl_slope(double w_left, double w_center, double w_right, double h);

struct InterfaceScalar {
  double mean;
  double diff;
};

// Arithmetic mean and one-sided difference quotient at the face between
// two cells; exact for affine data.
InterfaceScalar interface_scalar(double w_left, double w_right, double h);

// Transport coefficient alpha at the four faces of a cell.
struct FaceAlpha {
  double west = 0.0;
  double east = 0.0;
  double south = 0.0;
  double north = 0.0;
};

// Largest lambda in [0,1] such that lambda * micro keeps the cell's moment
// vector realizable for the flux update: the face-weighted combination of
// half-range first moments stays nonnegative against rho, and each of the
// four half-range conditions rho/4 +- <.psi>.micro >= 0 holds. Every
// condition is affine in lambda with nonnegative constant term, so the
// optimum is a ratio clamp. rho < 0 is an upstream positivity violation.
double lambda1(double rho, const double* micro, const FaceAlpha& alpha,
               double dx, double dy, const AngularTables& tables);

enum class Axis { x, y };

// Largest lambda in [0,1] such that the scaled slope keeps both half-range
// interface reconstructions nonnegative. slope points at the full moment
// vector gradient (component 0 included, length K). r_minus and r_plus are
// the b/alpha ratios at the lower and upper face along the axis. Requires
// the lambda1-limited state, whose half-range conditions already hold.
double lambda2(double rho, const double* micro, const double* slope,
               double r_minus, double r_plus, double h, Axis axis,
               const AngularTables& tables);

// Limited slopes of the full moment vector, stored per cell (cell major,
// K components). Filled on the interior plus a one-cell ring so boundary
// interface reconstructions have both sides.
struct SlopeField {
  int K = 0;
  std::vector<double> sx;
  std::vector<double> sy;

  double* sx_at(std::size_t cell) { return sx.data() + cell * K; }
  const double* sx_at(std::size_t cell) const { return sx.data() + cell * K; }
  double* sy_at(std::size_t cell) { return sy.data() + cell * K; }
  const double* sy_at(std::size_t cell) const { return sy.data() + cell * K; }
};

SlopeField compute_moment_slopes(const Grid2D& g, const MomentState& s,
                                 const AngularTables& tables);

}
