#include "ppfpn/recon.hpp"

#include <algorithm>
#include <cmath>

#include "ppfpn/errors.hpp"

namespace ppfpn {

namespace {

constexpr double kInvTwoSqrtPi = 0.28209479177387814347403972578039;

// One affine feasibility condition value(lambda) = a + lambda*b >= 0 with
// a >= 0; the largest admissible lambda in [0,1].
double affine_cap(double a, double b, double lambda) {
  if (b >= 0.0) return lambda;
  if (a + b >= 0.0) return lambda;
  double cap = a / (-b);
  if (cap < 0.0) cap = 0.0;
  if (cap > 1.0) cap = 1.0;
  return std::min(lambda, cap);
}

double dot_micro(const std::vector<double>& w, const double* micro, int K) {
  double s = 0.0;
  for (int a = 1; a < K; ++a) s += w[a] * micro[a - 1];
  return s;
}

double dot_full(const std::vector<double>& w, const double* vec, int K) {
  double s = 0.0;
  for (int a = 0; a < K; ++a) s += w[a] * vec[a];
  return s;
}

}  // namespace

double muscl_slope(double w_left, double w_center, double w_right, double h) {
  double fwd = (w_right - w_center) / h;
  double bwd = (w_center - w_left) / h;
  if (fwd * bwd <= 0.0) return 0.0;
  double ctr = 0.5 * (w_right - w_left) / h;
  double mag = std::min(std::min(2.0 * std::fabs(fwd), 2.0 * std::fabs(bwd)),
                        std::fabs(ctr));
  return fwd > 0.0 ? mag : -mag;
}

InterfaceScalar interface_scalar(double w_left, double w_right, double h) {
  InterfaceScalar r;
  r.mean = 0.5 * (w_left + w_right);
  r.diff = (w_right - w_left) / h;
  return r;
}

double lambda1(double rho, const double* micro, const FaceAlpha& alpha,
               double dx, double dy, const AngularTables& tables) {
  if (rho < 0.0) throw InvariantViolation("lambda1: negative density");
  int K = tables.K;
  double lam = 1.0;

  // Half-range conditions rho/4 +- <.psi>.micro >= 0.
  double q = 0.25 * rho;
  lam = affine_cap(q, dot_micro(tables.xi_pos_m1, micro, K), lam);
  lam = affine_cap(q, -dot_micro(tables.xi_neg_m1, micro, K), lam);
  lam = affine_cap(q, dot_micro(tables.eta_pos_m1, micro, K), lam);
  lam = affine_cap(q, -dot_micro(tables.eta_neg_m1, micro, K), lam);

  // Face-weighted combination entering the macro flux balance.
  double cw = alpha.west / dx;
  double ce = alpha.east / dx;
  double cs = alpha.south / dy;
  double cn = alpha.north / dy;
  double a0 = 0.25 * (cw + ce + cs + cn) * rho;
  double b0 = cw * dot_micro(tables.xi_neg_m1, micro, K) -
              ce * dot_micro(tables.xi_pos_m1, micro, K) +
              cs * dot_micro(tables.eta_neg_m1, micro, K) -
              cn * dot_micro(tables.eta_pos_m1, micro, K);
  lam = affine_cap(a0, b0, lam);
  return lam;
}

double lambda2(double rho, const double* micro, const double* slope,
               double r_minus, double r_plus, double h, Axis axis,
               const AngularTables& tables) {
  int K = tables.K;
  const std::vector<double>& pos_m1 =
      axis == Axis::x ? tables.xi_pos_m1 : tables.eta_pos_m1;
  const std::vector<double>& pos_m2 =
      axis == Axis::x ? tables.xi_pos_m2 : tables.eta_pos_m2;
  const std::vector<double>& neg_m1 =
      axis == Axis::x ? tables.xi_neg_m1 : tables.eta_neg_m1;
  const std::vector<double>& neg_m2 =
      axis == Axis::x ? tables.xi_neg_m2 : tables.eta_neg_m2;

  double a_pos = 0.25 * rho + dot_micro(pos_m1, micro, K);
  double a_neg = 0.25 * rho - dot_micro(neg_m1, micro, K);
  double scale = 0.25 * rho + std::fabs(dot_micro(pos_m1, micro, K)) +
                 std::fabs(dot_micro(neg_m1, micro, K)) + 1e-300;
  if (a_pos < -1e-13 * scale || a_neg < -1e-13 * scale)
    throw InvariantViolation("lambda2: state not half-range feasible");
  a_pos = std::max(a_pos, 0.0);
  a_neg = std::max(a_neg, 0.0);

  double b_pos = 0.5 * h * dot_full(pos_m1, slope, K) +
                 r_plus * dot_full(pos_m2, slope, K);
  double b_neg = 0.5 * h * dot_full(neg_m1, slope, K) +
                 r_minus * dot_full(neg_m2, slope, K);

  double lam = 1.0;
  lam = affine_cap(a_pos, -std::fabs(b_pos), lam);
  lam = affine_cap(a_neg, -std::fabs(b_neg), lam);
  return lam;
}

SlopeField compute_moment_slopes(const Grid2D& g, const MomentState& s,
                                 const AngularTables& tables) {
  int K = tables.K;
  SlopeField f;
  f.K = K;
  f.sx.assign(g.cells() * static_cast<std::size_t>(K), 0.0);
  f.sy.assign(g.cells() * static_cast<std::size_t>(K), 0.0);

  auto comp = [&](std::size_t cell, int k) {
    return k == 0 ? s.rho[cell] * kInvTwoSqrtPi : s.micro_at(cell)[k - 1];
  };

  for (int j = -1; j <= g.ny; ++j) {
    for (int i = -1; i <= g.nx; ++i) {
      std::size_t c = g.index(i, j);
      std::size_t cl = g.index(i - 1, j);
      std::size_t cr = g.index(i + 1, j);
      std::size_t cb = g.index(i, j - 1);
      std::size_t ct = g.index(i, j + 1);
      double* sx = f.sx_at(c);
      double* sy = f.sy_at(c);
      for (int k = 0; k < K; ++k) {
        sx[k] = muscl_slope(comp(cl, k), comp(c, k), comp(cr, k), g.dx);
        sy[k] = muscl_slope(comp(cb, k), comp(c, k), comp(ct, k), g.dy);
      }
    }
  }
  return f;
}

}
