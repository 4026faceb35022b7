#include <algorithm>
#include <cmath>
#include <vector>

#include "ppfpn/errors.hpp"
#include "ppfpn/solver.hpp"

namespace ppfpn {

namespace {

double pow4(double x) {
  double x2 = x * x;
  return x2 * x2;
}

double face_conductivity(double sig_a, double sig_b, double scale) {
  const double sf = interface_sigma(sig_a, sig_b);
  if (!(sf > 0.0))
    throw ConfigError("diffusion reference: nonpositive face opacity");
  return scale / (3.0 * sf);
}

}  // namespace

int diffusion_advance(const Grid2D& g, const BoundaryCondition& bc,
                      const OpacityField& opacity, const PhysicsConstants& pc,
                      double dt, std::vector<double>& T, double tol, int cap) {
  const int nx = g.nx, ny = g.ny;
  const std::size_t n = static_cast<std::size_t>(nx) * ny;
  if (T.size() != n || opacity.coeff.size() != n)
    throw ConfigError("diffusion reference: field size mismatch");
  if (!(dt > 0.0) || !(tol > 0.0) || cap < 1)
    throw ConfigError("diffusion reference: bad controls");
  const NormalizedBc nb = normalize_bc(bc, g);
  const bool wrapx = nb.left[0].kind == BcKind::periodic;
  const bool wrapy = nb.bottom[0].kind == BcKind::periodic;

  const std::vector<double> Tn = T;
  std::vector<double> un(n), u(n);
  const double Tf = opacity.T_floor > 0.0 ? opacity.T_floor : 1e-6;
  const double ufloor = pow4(Tf);
  for (std::size_t c = 0; c < n; ++c) {
    un[c] = pow4(Tn[c]);
    u[c] = std::max(un[c], ufloor);
  }

  std::vector<double> Ti(n), sig(n);
  const double hx2 = g.dx * g.dx, hy2 = g.dy * g.dy;
  const int lin_cap = 200 + 10 * static_cast<int>(n);

  int it = 0;
  while (it < cap) {
    ++it;
    for (std::size_t c = 0; c < n; ++c) {
      Ti[c] = std::pow(u[c], 0.25);
      sig[c] = opacity.value(c, Ti[c]);
    }

    MacroSystem sys;
    sys.nx = nx;
    sys.ny = ny;
    sys.wrap_x = wrapx;
    sys.wrap_y = wrapy;
    sys.diag.assign(n, 0.0);
    sys.west.assign(n, 0.0);
    sys.east.assign(n, 0.0);
    sys.south.assign(n, 0.0);
    sys.north.assign(n, 0.0);
    sys.rhs_I.assign(n, 0.0);
    sys.rhs_phi.assign(n, 0.0);

    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t c = static_cast<std::size_t>(j) * nx + i;
        const double dTdu = 0.25 * std::pow(u[c], -0.75);
        double di = (pc.C_v * dTdu + pc.a) / dt;
        double R = (pc.C_v * (Ti[c] - Tn[c]) + pc.a * (u[c] - un[c])) / dt;

        auto couple = [&](std::size_t nbc, double h2, double& slot) {
          const double w = face_conductivity(sig[c], sig[nbc], pc.a * pc.c) / h2;
          di += w;
          slot = -w;
          R -= w * (u[nbc] - u[c]);
        };
        auto boundary = [&](const BcSegment& s, double h2) {
          if (s.kind == BcKind::reflective) return;
          const double ub = s.kind == BcKind::planckian ? pow4(s.T_b) : 0.0;
          const double w =
              2.0 * face_conductivity(sig[c], sig[c], pc.a * pc.c) / h2;
          di += w;
          R -= w * (ub - u[c]);
        };

        if (i > 0)
          couple(c - 1, hx2, sys.west[c]);
        else if (wrapx)
          couple(c + nx - 1, hx2, sys.west[c]);
        else
          boundary(bc_segment_at(nb.left, g.yc(j)), hx2);
        if (i < nx - 1)
          couple(c + 1, hx2, sys.east[c]);
        else if (wrapx)
          couple(c - (nx - 1), hx2, sys.east[c]);
        else
          boundary(bc_segment_at(nb.right, g.yc(j)), hx2);
        if (j > 0)
          couple(c - nx, hy2, sys.south[c]);
        else if (wrapy)
          couple(c + static_cast<std::size_t>(ny - 1) * nx, hy2, sys.south[c]);
        else
          boundary(bc_segment_at(nb.bottom, g.xc(i)), hy2);
        if (j < ny - 1)
          couple(c + nx, hy2, sys.north[c]);
        else if (wrapy)
          couple(c - static_cast<std::size_t>(ny - 1) * nx, hy2, sys.north[c]);
        else
          boundary(bc_segment_at(nb.top, g.xc(i)), hy2);

        sys.diag[c] = di;
        sys.rhs_I[c] = -R;
      }
    }

    std::vector<double> delta(n, 0.0);
    solve_macro(sys, delta, 1e-12, lin_cap);

    double umax = ufloor, dmax = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      u[c] = std::max(u[c] + delta[c], ufloor);
      umax = std::max(umax, u[c]);
      dmax = std::max(dmax, std::fabs(delta[c]));
    }
    if (dmax <= tol * umax) {
      for (std::size_t c = 0; c < n; ++c) T[c] = std::pow(u[c], 0.25);
      return it;
    }
  }
  throw SolverFailure("diffusion reference: Newton stalled");
}

void diffusion_advance_linear(const Grid2D& g, const BoundaryCondition& bc,
                              const OpacityField& opacity,
                              const PhysicsConstants& pc, double dt,
                              std::vector<double>& rho) {
  const int nx = g.nx, ny = g.ny;
  const std::size_t n = static_cast<std::size_t>(nx) * ny;
  if (rho.size() != n || opacity.coeff.size() != n)
    throw ConfigError("diffusion reference: field size mismatch");
  if (!(dt > 0.0)) throw ConfigError("diffusion reference: bad time step");
  const NormalizedBc nb = normalize_bc(bc, g);
  const bool wrapx = nb.left[0].kind == BcKind::periodic;
  const bool wrapy = nb.bottom[0].kind == BcKind::periodic;

  std::vector<double> sig(n);
  for (std::size_t c = 0; c < n; ++c) sig[c] = opacity.value(c, 1.0);

  MacroSystem sys;
  sys.nx = nx;
  sys.ny = ny;
  sys.wrap_x = wrapx;
  sys.wrap_y = wrapy;
  sys.diag.assign(n, 1.0);
  sys.west.assign(n, 0.0);
  sys.east.assign(n, 0.0);
  sys.south.assign(n, 0.0);
  sys.north.assign(n, 0.0);
  sys.rhs_I = rho;
  sys.rhs_phi.assign(n, 0.0);

  const double hx2 = g.dx * g.dx, hy2 = g.dy * g.dy;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t c = static_cast<std::size_t>(j) * nx + i;
      auto couple = [&](std::size_t nbc, double h2, double& slot) {
        const double w = dt * face_conductivity(sig[c], sig[nbc], pc.c) / h2;
        sys.diag[c] += w;
        slot = -w;
      };
      auto boundary = [&](const BcSegment& s, double h2) {
        if (s.kind == BcKind::reflective) return;
        double rb = 0.0;
        if (s.kind == BcKind::planckian) {
          const double t2 = s.T_b * s.T_b;
          rb = pc.a * pc.c * t2 * t2;
        }
        const double w = 2.0 * dt * face_conductivity(sig[c], sig[c], pc.c) / h2;
        sys.diag[c] += w;
        sys.rhs_phi[c] += w * rb;
      };
      if (i > 0)
        couple(c - 1, hx2, sys.west[c]);
      else if (wrapx)
        couple(c + nx - 1, hx2, sys.west[c]);
      else
        boundary(bc_segment_at(nb.left, g.yc(j)), hx2);
      if (i < nx - 1)
        couple(c + 1, hx2, sys.east[c]);
      else if (wrapx)
        couple(c - (nx - 1), hx2, sys.east[c]);
      else
        boundary(bc_segment_at(nb.right, g.yc(j)), hx2);
      if (j > 0)
        couple(c - nx, hy2, sys.south[c]);
      else if (wrapy)
        couple(c + static_cast<std::size_t>(ny - 1) * nx, hy2, sys.south[c]);
      else
        boundary(bc_segment_at(nb.bottom, g.xc(i)), hy2);
      if (j < ny - 1)
        couple(c + nx, hy2, sys.north[c]);
      else if (wrapy)
        couple(c - static_cast<std::size_t>(ny - 1) * nx, hy2, sys.north[c]);
      else
        boundary(bc_segment_at(nb.top, g.xc(i)), hy2);
    }
  }

  const int lin_cap = 200 + 10 * static_cast<int>(n);
  solve_macro(sys, rho, 1e-12, lin_cap);
}

}
