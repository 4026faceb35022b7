#include "ppfpn/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "ppfpn/errors.hpp"

namespace ppfpn {

namespace {

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double OpacityField::value(std::size_t cell, double T) const {
  double c0 = coeff[cell];
  if (law == Law::constant) return c0;
  double Tf = T > T_floor ? T : T_floor;
  return c0 / (Tf * Tf * Tf);
}

OpacityField OpacityField::uniform(int nx, int ny, double sigma) {
  OpacityField f;
  f.coeff.assign(static_cast<std::size_t>(nx) * ny, sigma);
  return f;
}

std::vector<double> MacroSystem::rhs() const {
  std::vector<double> b(rhs_I.size());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = rhs_I[i] + rhs_phi[i];
  return b;
}

void macro_matvec(const MacroSystem& sys, const std::vector<double>& v,
                  std::vector<double>& out) {
  const int nx = sys.nx, ny = sys.ny;
  out.resize(v.size());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      std::size_t c = static_cast<std::size_t>(j) * nx + i;
      double s = sys.diag[c] * v[c];
      if (i > 0)
        s += sys.west[c] * v[c - 1];
      else if (sys.wrap_x)
        s += sys.west[c] * v[c + nx - 1];
      if (i < nx - 1)
        s += sys.east[c] * v[c + 1];
      else if (sys.wrap_x)
        s += sys.east[c] * v[c - (nx - 1)];
      if (j > 0)
        s += sys.south[c] * v[c - nx];
      else if (sys.wrap_y)
        s += sys.south[c] * v[c + static_cast<std::size_t>(ny - 1) * nx];
      if (j < ny - 1)
        s += sys.north[c] * v[c + nx];
      else if (sys.wrap_y)
        s += sys.north[c] * v[c - static_cast<std::size_t>(ny - 1) * nx];
      out[c] = s;
    }
  }
}

LinearSolveReport solve_macro(const MacroSystem& sys, std::vector<double>& x,
                              double tol_rel, int cap) {
  const std::size_t n = static_cast<std::size_t>(sys.nx) * sys.ny;
  if (sys.nx < 1 || sys.ny < 1 || sys.diag.size() != n ||
      sys.west.size() != n || sys.east.size() != n || sys.south.size() != n ||
      sys.north.size() != n || sys.rhs_I.size() != n ||
      sys.rhs_phi.size() != n || x.size() != n || !(tol_rel > 0.0) || cap < 1)
    throw ConfigError("solve_macro: malformed system");
  for (std::size_t i = 0; i < n; ++i)
    if (!(sys.diag[i] > 0.0))
      throw SolverFailure("solve_macro: nonpositive diagonal entry");

  std::vector<double> b = sys.rhs();
  const double bn = inf_norm(b);
  LinearSolveReport rep;
  if (bn == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return rep;
  }
  const double tol_abs = tol_rel * bn;

  std::vector<double> r(n), z(n), p(n), q(n);
  macro_matvec(sys, x, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
  rep.residual = inf_norm(r);
  if (rep.residual <= tol_abs) return rep;

  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / sys.diag[i];
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= cap; ++it) {
    macro_matvec(sys, p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0))
      throw SolverFailure("solve_macro: lost positive definiteness");
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
    for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * q[i];
    rep.iters = it;
    if (inf_norm(r) <= tol_abs) {
      macro_matvec(sys, x, q);
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
      rep.residual = inf_norm(r);
      if (rep.residual <= tol_abs) return rep;
      // recurrence drifted from the true residual, restart the direction
      for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / sys.diag[i];
      p = z;
      rz = dot(r, z);
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / sys.diag[i];
    const double rz2 = dot(r, z);
    const double beta = rz2 / rz;
    rz = rz2;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw SolverFailure("solve_macro: no convergence within iteration cap");
}

Solver::Solver(const Grid2D& g, const AngularTables* tables,
               BoundaryCondition bc, OpacityField opacity, SolverConfig cfg)
    : grid_(g),
      tables_(tables),
      bc_(std::move(bc)),
      opacity_(std::move(opacity)),
      cfg_(cfg) {
  if (!tables_) throw ConfigError("solver: missing angular tables");
  if (g.nx < 2 || g.ny < 2 || g.ghost_width < 2)
    throw ConfigError("solver: grid too small");
  const PhysicsConstants& pc = cfg_.constants;
  if (!(pc.a > 0.0) || !(pc.c > 0.0) || !(pc.eps > 0.0) || !(pc.C_v > 0.0))
    throw ConfigError("solver: nonpositive physical constants");
  if (!(cfg_.sigma_f >= 0.0) || !(cfg_.tol_outer > 0.0) ||
      cfg_.max_sweeps < 1 || !(cfg_.lin_tol > 0.0) || cfg_.lin_cap < 0)
    throw ConfigError("solver: bad iteration controls");
  K_ = tables_->K;
  const std::size_t n = static_cast<std::size_t>(g.nx) * g.ny;
  if (opacity_.coeff.size() != n)
    throw ConfigError("solver: opacity does not match grid");
  for (double c0 : opacity_.coeff)
    if (!(c0 >= 0.0) || !std::isfinite(c0))
      throw ConfigError("solver: invalid opacity coefficient");
  if (!cfg_.cv_cells.empty()) {
    if (cfg_.cv_cells.size() != n)
      throw ConfigError("solver: heat capacity field does not match grid");
    for (double v : cfg_.cv_cells)
      if (!(v > 0.0) || !std::isfinite(v))
        throw ConfigError("solver: invalid heat capacity");
  }
  if (!cfg_.sigma_f_cells.empty()) {
    if (cfg_.sigma_f_cells.size() != n)
      throw ConfigError("solver: filter strength field does not match grid");
    for (double v : cfg_.sigma_f_cells)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ConfigError("solver: invalid filter strength");
  }
  nbc_ = normalize_bc(bc_, grid_);

  const std::size_t cells = g.cells();
  sigma_g_.assign(cells, 0.0);
  beta_g_.assign(cells, 0.0);
  kappa_g_.assign(cells, 0.0);
  kphi_g_.assign(cells, 0.0);
  sigma_int_.assign(n, 0.0);
  kappa_int_.assign(n, 0.0);
  micro_lim_.assign(cells * (K_ - 1), 0.0);
  sx_lim_.assign(cells * K_, 0.0);
  sy_lim_.assign(cells * K_, 0.0);
  fcx_.assign(static_cast<std::size_t>(g.nx + 1) * g.ny, UgksCoefficients{});
  fcy_.assign(static_cast<std::size_t>(g.nx) * (g.ny + 1), UgksCoefficients{});
  mfx_in_.assign(fcx_.size(), 0.0);
  mfx_ph_.assign(fcx_.size(), 0.0);
  mfx_rl_.assign(fcx_.size(), 0.0);
  mfx_rh_.assign(fcx_.size(), 0.0);
  mfy_in_.assign(fcy_.size(), 0.0);
  mfy_ph_.assign(fcy_.size(), 0.0);
  mfy_rl_.assign(fcy_.size(), 0.0);
  mfy_rh_.assign(fcy_.size(), 0.0);
  rho_new_.assign(n, 0.0);
  phi_new_.assign(n, 0.0);
  T_new_.assign(n, 0.0);
}

namespace {

int face_class(const BcSegment& s) {
  switch (s.kind) {
    case BcKind::periodic:
      return 1;
    case BcKind::reflective:
      return 2;
    case BcKind::vacuum:
      return 3;
    case BcKind::planckian:
      return 4;
  }
  return 3;
}

}  // namespace

Solver::FaceBc Solver::left_bc_(int j) const {
  const BcSegment& s = bc_segment_at(nbc_.left, grid_.yc(j));
  double tb2 = s.T_b * s.T_b;
  return FaceBc{face_class(s), cfg_.constants.a * cfg_.constants.c * tb2 * tb2};
}

Solver::FaceBc Solver::right_bc_(int j) const {
  const BcSegment& s = bc_segment_at(nbc_.right, grid_.yc(j));
  double tb2 = s.T_b * s.T_b;
  return FaceBc{face_class(s), cfg_.constants.a * cfg_.constants.c * tb2 * tb2};
}

Solver::FaceBc Solver::bottom_bc_(int i) const {
  const BcSegment& s = bc_segment_at(nbc_.bottom, grid_.xc(i));
  double tb2 = s.T_b * s.T_b;
  return FaceBc{face_class(s), cfg_.constants.a * cfg_.constants.c * tb2 * tb2};
}

Solver::FaceBc Solver::top_bc_(int i) const {
  const BcSegment& s = bc_segment_at(nbc_.top, grid_.xc(i));
  double tb2 = s.T_b * s.T_b;
  return FaceBc{face_class(s), cfg_.constants.a * cfg_.constants.c * tb2 * tb2};
}

void Solver::check_state(const MomentState& state) const {
  const std::size_t cells = grid_.cells();
  if (state.n_micro != K_ - 1 || state.rho.size() != cells ||
      state.T.size() != cells || state.phi.size() != cells ||
      state.micro.size() != cells * static_cast<std::size_t>(K_ - 1))
    throw ConfigError("solver: state does not match grid and tables");
}

void Solver::begin_step(MomentState& state, double dt) {
  check_state(state);
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw ConfigError("solver: nonpositive time step");
  dt_ = dt;
  fill_ghosts(grid_, state, bc_, *tables_, cfg_.constants);
  slopes_ = compute_moment_slopes(grid_, state, *tables_);
}

void Solver::extend_scalar_ghosts(std::vector<double>& field) const {
  const Grid2D& g = grid_;
  const bool wx = nbc_.left[0].kind == BcKind::periodic;
  const bool wy = nbc_.bottom[0].kind == BcKind::periodic;
  for (int j = 0; j < g.ny; ++j) {
    field[g.index(-1, j)] = field[g.index(wx ? g.nx - 1 : 0, j)];
    field[g.index(g.nx, j)] = field[g.index(wx ? 0 : g.nx - 1, j)];
  }
  for (int i = 0; i < g.nx; ++i) {
    field[g.index(i, -1)] = field[g.index(i, wy ? g.ny - 1 : 0)];
    field[g.index(i, g.ny)] = field[g.index(i, wy ? 0 : g.ny - 1)];
  }
}

void Solver::prepare_sweep(const MomentState& state,
                           const std::vector<double>& T_iter) {
  const Grid2D& g = grid_;
  const PhysicsConstants& pc = cfg_.constants;
  const int nx = g.nx, ny = g.ny;
  if (T_iter.size() != static_cast<std::size_t>(nx) * ny)
    throw ConfigError("prepare_sweep: iterate size mismatch");

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t cell = static_cast<std::size_t>(j) * nx + i;
      const std::size_t idx = g.index(i, j);
      const double T = T_iter[cell];
      const double sg = opacity_.value(cell, T);
      double bt = 0.0, kp = 0.0;
      if (!cfg_.linear_transport) {
        PhysicsConstants pcv = pc;
        if (!cfg_.cv_cells.empty()) pcv.C_v = cfg_.cv_cells[cell];
        bt = planck_beta(T, pcv);
        kp = imc_kappa(dt_, pc.eps, bt, sg);
      }
      sigma_int_[cell] = sg;
      kappa_int_[cell] = kp;
      sigma_g_[idx] = sg;
      beta_g_[idx] = bt;
      kappa_g_[idx] = kp;
      kphi_g_[idx] = kp * state.phi[idx];
    }
  }
  extend_scalar_ghosts(sigma_g_);
  extend_scalar_ghosts(beta_g_);
  extend_scalar_ghosts(kappa_g_);
  for (int j = 0; j < ny; ++j) {
    kphi_g_[g.index(-1, j)] = kappa_g_[g.index(-1, j)] * state.phi[g.index(-1, j)];
    kphi_g_[g.index(nx, j)] = kappa_g_[g.index(nx, j)] * state.phi[g.index(nx, j)];
  }
  for (int i = 0; i < nx; ++i) {
    kphi_g_[g.index(i, -1)] = kappa_g_[g.index(i, -1)] * state.phi[g.index(i, -1)];
    kphi_g_[g.index(i, ny)] = kappa_g_[g.index(i, ny)] * state.phi[g.index(i, ny)];
  }

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const std::size_t f = static_cast<std::size_t>(j) * (nx + 1) + i;
      const std::size_t li = g.index(i - 1, j), ri = g.index(i, j);
      const double sf = interface_sigma(sigma_g_[li], sigma_g_[ri]);
      UgksCoefficients k = ugks_kernels(dt_, pc.eps, sf, pc);
      k.kappa = cfg_.linear_transport
                    ? 0.0
                    : imc_kappa(dt_, pc.eps, 0.5 * (beta_g_[li] + beta_g_[ri]), sf);
      fcx_[f] = k;
    }
  }
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t f = static_cast<std::size_t>(j) * nx + i;
      const std::size_t li = g.index(i, j - 1), ri = g.index(i, j);
      const double sf = interface_sigma(sigma_g_[li], sigma_g_[ri]);
      UgksCoefficients k = ugks_kernels(dt_, pc.eps, sf, pc);
      k.kappa = cfg_.linear_transport
                    ? 0.0
                    : imc_kappa(dt_, pc.eps, 0.5 * (beta_g_[li] + beta_g_[ri]), sf);
      fcy_[f] = k;
    }
  }

  limiter_pass(state);
  macro_flux_pass(state);
}

void Solver::limiter_pass(const MomentState& state) {
  const Grid2D& g = grid_;
  const AngularTables& t = *tables_;
  const int nx = g.nx, ny = g.ny, nm = K_ - 1;
  stat_l1_ = stat_lx_ = stat_ly_ = 1.0;
  for (int j = -1; j <= ny; ++j) {
    for (int i = -1; i <= nx; ++i) {
      const bool gx = (i < 0 || i >= nx), gy = (j < 0 || j >= ny);
      if (gx && gy) continue;
      const std::size_t idx = g.index(i, j);
      const double* mic = state.micro_at(idx);
      double* ml = micro_lim_.data() + idx * nm;
      double* sxl = sx_lim_.data() + idx * K_;
      double* syl = sy_lim_.data() + idx * K_;
      const double* sx0 = slopes_.sx_at(idx);
      const double* sy0 = slopes_.sy_at(idx);
      if (!cfg_.positivity) {
        for (int a = 0; a < nm; ++a) ml[a] = mic[a];
        for (int k = 0; k < K_; ++k) {
          sxl[k] = sx0[k];
          syl[k] = sy0[k];
        }
        continue;
      }
      // ghost cells reuse the nearest boundary face coefficient for their
      // outward face; over-limiting there cannot break positivity
      const int jc = std::clamp(j, 0, ny - 1);
      const int ic = std::clamp(i, 0, nx - 1);
      const std::size_t fw = static_cast<std::size_t>(jc) * (nx + 1) + std::clamp(i, 0, nx);
      const std::size_t fe = static_cast<std::size_t>(jc) * (nx + 1) + std::clamp(i + 1, 0, nx);
      const std::size_t fs = static_cast<std::size_t>(std::clamp(j, 0, ny)) * nx + ic;
      const std::size_t fn = static_cast<std::size_t>(std::clamp(j + 1, 0, ny)) * nx + ic;
      FaceAlpha fa;
      fa.west = fcx_[fw].alpha;
      fa.east = fcx_[fe].alpha;
      fa.south = fcy_[fs].alpha;
      fa.north = fcy_[fn].alpha;
      const double rho = state.rho[idx];
      const double l1 = lambda1(rho, mic, fa, g.dx, g.dy, t);
      for (int a = 0; a < nm; ++a) ml[a] = l1 * mic[a];
      const double lx = lambda2(rho, ml, sx0, fcx_[fw].b / fcx_[fw].alpha,
                                fcx_[fe].b / fcx_[fe].alpha, g.dx, Axis::x, t);
      for (int k = 0; k < K_; ++k) sxl[k] = lx * sx0[k];
      const double ly = lambda2(rho, ml, sy0, fcy_[fs].b / fcy_[fs].alpha,
                                fcy_[fn].b / fcy_[fn].alpha, g.dy, Axis::y, t);
      for (int k = 0; k < K_; ++k) syl[k] = ly * sy0[k];
      if (!gx && !gy) {
        stat_l1_ = std::min(stat_l1_, l1);
        stat_lx_ = std::min(stat_lx_, lx);
        stat_ly_ = std::min(stat_ly_, ly);
      }
    }
  }
}

void Solver::macro_flux_pass(const MomentState& state) {
  const Grid2D& g = grid_;
  const int nx = g.nx, ny = g.ny, nm = K_ - 1;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const std::size_t f = static_cast<std::size_t>(j) * (nx + 1) + i;
      const std::size_t li = g.index(i - 1, j), ri = g.index(i, j);
      FluxCellView vl, vr;
      vl.rho = state.rho[li];
      vl.micro = micro_lim_.data() + li * nm;
      vl.slope = sx_lim_.data() + li * K_;
      vl.kphi = kphi_g_[li];
      vr.rho = state.rho[ri];
      vr.micro = micro_lim_.data() + ri * nm;
      vr.slope = sx_lim_.data() + ri * K_;
      vr.kphi = kphi_g_[ri];
      FaceFluxParts p = macro_flux_x(vl, vr, fcx_[f], g.dx, *tables_, cfg_.flux_mode);
      mfx_in_[f] = p.from_In[0];
      mfx_ph_[f] = p.from_phin[0];
      mfx_rl_[f] = p.rho_lo[0];
      mfx_rh_[f] = p.rho_hi[0];
    }
  }
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t f = static_cast<std::size_t>(j) * nx + i;
      const std::size_t li = g.index(i, j - 1), ri = g.index(i, j);
      FluxCellView vl, vr;
      vl.rho = state.rho[li];
      vl.micro = micro_lim_.data() + li * nm;
      vl.slope = sy_lim_.data() + li * K_;
      vl.kphi = kphi_g_[li];
      vr.rho = state.rho[ri];
      vr.micro = micro_lim_.data() + ri * nm;
      vr.slope = sy_lim_.data() + ri * K_;
      vr.kphi = kphi_g_[ri];
      FaceFluxParts p = macro_flux_y(vl, vr, fcy_[f], g.dy, *tables_, cfg_.flux_mode);
      mfy_in_[f] = p.from_In[0];
      mfy_ph_[f] = p.from_phin[0];
      mfy_rl_[f] = p.rho_lo[0];
      mfy_rh_[f] = p.rho_hi[0];
    }
  }
}

MacroSystem Solver::assemble_macro(const MomentState& state) const {
  const Grid2D& g = grid_;
  const PhysicsConstants& pc = cfg_.constants;
  const int nx = g.nx, ny = g.ny;
  const std::size_t n = static_cast<std::size_t>(nx) * ny;
  const double rx = dt_ / g.dx, ry = dt_ / g.dy;

  MacroSystem sys;
  sys.nx = nx;
  sys.ny = ny;
  sys.wrap_x = nbc_.left[0].kind == BcKind::periodic;
  sys.wrap_y = nbc_.bottom[0].kind == BcKind::periodic;
  sys.diag.assign(n, 0.0);
  sys.west.assign(n, 0.0);
  sys.east.assign(n, 0.0);
  sys.south.assign(n, 0.0);
  sys.north.assign(n, 0.0);
  sys.rhs_I.assign(n, 0.0);
  sys.rhs_phi.assign(n, 0.0);

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t cell = static_cast<std::size_t>(j) * nx + i;
      const std::size_t idx = g.index(i, j);
      const double exc = sigma_int_[cell] * pc.c * dt_ / (pc.eps * pc.eps) *
                         kappa_int_[cell];
      double di = 1.0 + exc;
      double bI = state.rho[idx];
      double bP = exc * state.phi[idx];

      const std::size_t fw = static_cast<std::size_t>(j) * (nx + 1) + i;
      const std::size_t fe = fw + 1;
      const std::size_t fs = static_cast<std::size_t>(j) * nx + i;
      const std::size_t fn = fs + nx;

      bI += rx * mfx_in_[fw];
      bP += rx * mfx_ph_[fw];
      di -= rx * mfx_rh_[fw];
      const double cw = -rx * mfx_rl_[fw];
      if (i > 0) {
        sys.west[cell] = cw;
      } else {
        const FaceBc fb = left_bc_(j);
        if (fb.cls == 1)
          sys.west[cell] = cw;
        else if (fb.cls == 2)
          di += cw;
        else if (fb.cls == 4)
          bP -= cw * fb.rho_bc;
      }

      bI -= rx * mfx_in_[fe];
      bP -= rx * mfx_ph_[fe];
      di += rx * mfx_rl_[fe];
      const double ce = rx * mfx_rh_[fe];
      if (i < nx - 1) {
        sys.east[cell] = ce;
      } else {
        const FaceBc fb = right_bc_(j);
        if (fb.cls == 1)
          sys.east[cell] = ce;
        else if (fb.cls == 2)
          di += ce;
        else if (fb.cls == 4)
          bP -= ce * fb.rho_bc;
      }

      bI += ry * mfy_in_[fs];
      bP += ry * mfy_ph_[fs];
      di -= ry * mfy_rh_[fs];
      const double cs = -ry * mfy_rl_[fs];
      if (j > 0) {
        sys.south[cell] = cs;
      } else {
        const FaceBc fb = bottom_bc_(i);
        if (fb.cls == 1)
          sys.south[cell] = cs;
        else if (fb.cls == 2)
          di += cs;
        else if (fb.cls == 4)
          bP -= cs * fb.rho_bc;
      }

      bI -= ry * mfy_in_[fn];
      bP -= ry * mfy_ph_[fn];
      di += ry * mfy_rl_[fn];
      const double cn = ry * mfy_rh_[fn];
      if (j < ny - 1) {
        sys.north[cell] = cn;
      } else {
        const FaceBc fb = top_bc_(i);
        if (fb.cls == 1)
          sys.north[cell] = cn;
        else if (fb.cls == 2)
          di += cn;
        else if (fb.cls == 4)
          bP -= cn * fb.rho_bc;
      }

      sys.diag[cell] = di;
      sys.rhs_I[cell] = bI;
      sys.rhs_phi[cell] = bP;
    }
  }

  for (std::size_t c = 0; c < n; ++c) {
    const bool off_ok = sys.west[c] <= 0.0 && sys.east[c] <= 0.0 &&
                        sys.south[c] <= 0.0 && sys.north[c] <= 0.0;
    const double row =
        sys.diag[c] + sys.west[c] + sys.east[c] + sys.south[c] + sys.north[c];
    if (!(sys.diag[c] > 0.0) || !off_ok || !(row > 0.0))
      throw InvariantViolation("assemble_macro: system is not an M-matrix");
  }
  return sys;
}

std::vector<double> Solver::ghost_extended_rho(
    const std::vector<double>& rho_new) const {
  const Grid2D& g = grid_;
  const int nx = g.nx, ny = g.ny;
  std::vector<double> out(g.cells(), 0.0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      out[g.index(i, j)] = rho_new[static_cast<std::size_t>(j) * nx + i];
  auto ghost = [&](const FaceBc& fb, std::size_t gi, std::size_t wrap_cell,
                   std::size_t fold_cell) {
    if (fb.cls == 1)
      out[gi] = rho_new[wrap_cell];
    else if (fb.cls == 2)
      out[gi] = rho_new[fold_cell];
    else if (fb.cls == 4)
      out[gi] = fb.rho_bc;
  };
  for (int j = 0; j < ny; ++j) {
    const std::size_t row = static_cast<std::size_t>(j) * nx;
    ghost(left_bc_(j), g.index(-1, j), row + nx - 1, row);
    ghost(right_bc_(j), g.index(nx, j), row, row + nx - 1);
  }
  for (int i = 0; i < nx; ++i) {
    const std::size_t col = static_cast<std::size_t>(i);
    ghost(bottom_bc_(i), g.index(i, -1),
          col + static_cast<std::size_t>(ny - 1) * nx, col);
    ghost(top_bc_(i), g.index(i, ny), col,
          col + static_cast<std::size_t>(ny - 1) * nx);
  }
  return out;
}

void Solver::residual_check(const MomentState& state, const MacroSystem& sys,
                            const std::vector<double>& rho_new) const {
  const Grid2D& g = grid_;
  const PhysicsConstants& pc = cfg_.constants;
  const int nx = g.nx, ny = g.ny;
  const double rx = dt_ / g.dx, ry = dt_ / g.dy;
  const std::vector<double> r1 = ghost_extended_rho(rho_new);
  double scale = inf_norm(rho_new) + 1e-300;
  scale += inf_norm(sys.rhs());
  const double tol = 1e-11 * scale;

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t cell = static_cast<std::size_t>(j) * nx + i;
      const std::size_t idx = g.index(i, j);
      const std::size_t fw = static_cast<std::size_t>(j) * (nx + 1) + i;
      const std::size_t fe = fw + 1;
      const std::size_t fs = static_cast<std::size_t>(j) * nx + i;
      const std::size_t fn = fs + nx;
      const double Fw = mfx_in_[fw] + mfx_ph_[fw] +
                        mfx_rl_[fw] * r1[g.index(i - 1, j)] +
                        mfx_rh_[fw] * r1[idx];
      const double Fe = mfx_in_[fe] + mfx_ph_[fe] + mfx_rl_[fe] * r1[idx] +
                        mfx_rh_[fe] * r1[g.index(i + 1, j)];
      const double Fs = mfy_in_[fs] + mfy_ph_[fs] +
                        mfy_rl_[fs] * r1[g.index(i, j - 1)] +
                        mfy_rh_[fs] * r1[idx];
      const double Fn = mfy_in_[fn] + mfy_ph_[fn] + mfy_rl_[fn] * r1[idx] +
                        mfy_rh_[fn] * r1[g.index(i, j + 1)];
      const double exc = sigma_int_[cell] * pc.c * dt_ / (pc.eps * pc.eps) *
                         kappa_int_[cell];
      const double res = rho_new[cell] - state.rho[idx] - rx * (Fw - Fe) -
                         ry * (Fs - Fn) - exc * (state.phi[idx] - rho_new[cell]);
      if (!(std::fabs(res) <= tol))
        throw InvariantViolation(
            "source iteration: realized fluxes do not close the balance");
    }
  }
}

IterationReport Solver::run_sweeps(MomentState& state) {
  const Grid2D& g = grid_;
  const PhysicsConstants& pc = cfg_.constants;
  const int nx = g.nx, ny = g.ny;
  const std::size_t n = static_cast<std::size_t>(nx) * ny;

  IterationReport rep;
  std::vector<double> T_iter(n), rho_it(n), phi_it(n);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t cell = static_cast<std::size_t>(j) * nx + i;
      const std::size_t idx = g.index(i, j);
      T_iter[cell] = state.T[idx];
      rho_it[cell] = state.rho[idx];
      phi_it[cell] = state.phi[idx];
    }
  }
  std::vector<double> x = rho_it;
  const int cap = cfg_.lin_cap > 0 ? cfg_.lin_cap : 200 + 10 * static_cast<int>(n);

  bool converged = false;
  for (int s = 0; s < cfg_.max_sweeps; ++s) {
    prepare_sweep(state, T_iter);
    rep.min_lambda1 = std::min(rep.min_lambda1, stat_l1_);
    rep.min_lambda_x = std::min(rep.min_lambda_x, stat_lx_);
    rep.min_lambda_y = std::min(rep.min_lambda_y, stat_ly_);
    MacroSystem sys = assemble_macro(state);
    LinearSolveReport lin = solve_macro(sys, x, cfg_.lin_tol, cap);
    rep.linear_iters.push_back(lin.iters);
    rep.sweeps = s + 1;

    if (cfg_.positivity) {
      const double floor_neg = -1e-12 * (inf_norm(x) + inf_norm(sys.rhs()));
      for (std::size_t c = 0; c < n; ++c) {
        if (x[c] < 0.0) {
          if (x[c] < floor_neg)
            throw InvariantViolation(
                "source iteration: negative density beyond roundoff");
          x[c] = 0.0;
        }
      }
    }
    residual_check(state, sys, x);

    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t cell = static_cast<std::size_t>(j) * nx + i;
        const std::size_t idx = g.index(i, j);
        phi_new_[cell] = cfg_.linear_transport
                             ? x[cell]
                             : kappa_int_[cell] * state.phi[idx] +
                                   (1.0 - kappa_int_[cell]) * x[cell];
      }
    }

    const double fr = 1e-12 * inf_norm(x) + 1e-300;
    const double fp = 1e-12 * inf_norm(phi_new_) + 1e-300;
    double change = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      change = std::max(change,
                        std::fabs(x[c] - rho_it[c]) / (std::fabs(x[c]) + fr));
      change = std::max(change, std::fabs(phi_new_[c] - phi_it[c]) /
                                    (std::fabs(phi_new_[c]) + fp));
    }
    rho_it = x;
    phi_it = phi_new_;
    if (!cfg_.linear_transport) {
      for (std::size_t c = 0; c < n; ++c) {
        const double ph = phi_new_[c] > 0.0 ? phi_new_[c] : 0.0;
        T_iter[c] = std::pow(ph / (pc.a * pc.c), 0.25);
      }
    }
    rep.final_change = change;
    if (change <= cfg_.tol_outer) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw SolverFailure("source iteration: no convergence within sweep cap");

  rho_new_ = rho_it;
  phi_new_ = phi_it;
  T_new_ = T_iter;
  return rep;
}

IterationReport Solver::source_iteration(MomentState& state, double dt) {
  begin_step(state, dt);
  IterationReport rep = run_sweeps(state);
  const int nx = grid_.nx, ny = grid_.ny;
  rep.min_rho = std::numeric_limits<double>::infinity();
  rep.min_phi = std::numeric_limits<double>::infinity();
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t cell = static_cast<std::size_t>(j) * nx + i;
      const std::size_t idx = grid_.index(i, j);
      state.rho[idx] = rho_new_[cell];
      state.phi[idx] = phi_new_[cell];
      state.T[idx] = T_new_[cell];
      rep.min_rho = std::min(rep.min_rho, rho_new_[cell]);
      rep.min_phi = std::min(rep.min_phi, phi_new_[cell]);
    }
  }
  return rep;
}

IterationReport Solver::advance(MomentState& state, double dt) {
  begin_step(state, dt);
  IterationReport rep = run_sweeps(state);
  prepare_sweep(state, T_new_);
  rep.min_lambda1 = std::min(rep.min_lambda1, stat_l1_);
  rep.min_lambda_x = std::min(rep.min_lambda_x, stat_lx_);
  rep.min_lambda_y = std::min(rep.min_lambda_y, stat_ly_);
  micro_update(state, rho_new_, phi_new_, T_new_);
  const int nx = grid_.nx, ny = grid_.ny;
  rep.min_rho = std::numeric_limits<double>::infinity();
  rep.min_phi = std::numeric_limits<double>::infinity();
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t idx = grid_.index(i, j);
      rep.min_rho = std::min(rep.min_rho, state.rho[idx]);
      rep.min_phi = std::min(rep.min_phi, state.phi[idx]);
    }
  }
  return rep;
}

void Solver::micro_update(MomentState& state, const std::vector<double>& rho_new,
                          const std::vector<double>& phi_new,
                          const std::vector<double>& T_new) {
  const Grid2D& g = grid_;
  const PhysicsConstants& pc = cfg_.constants;
  const int nx = g.nx, ny = g.ny, nm = K_ - 1;
  const std::size_t n = static_cast<std::size_t>(nx) * ny;
  if (rho_new.size() != n || phi_new.size() != n || T_new.size() != n)
    throw ConfigError("micro_update: field size mismatch");
  const double rx = dt_ / g.dx, ry = dt_ / g.dy;

  const std::vector<double> r1 = ghost_extended_rho(rho_new);
  std::vector<double> div(n * nm, 0.0);

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const std::size_t f = static_cast<std::size_t>(j) * (nx + 1) + i;
      const std::size_t li = g.index(i - 1, j), ri = g.index(i, j);
      FluxCellView vl, vr;
      vl.rho = state.rho[li];
      vl.micro = micro_lim_.data() + li * nm;
      vl.slope = sx_lim_.data() + li * K_;
      vl.kphi = kphi_g_[li];
      vr.rho = state.rho[ri];
      vr.micro = micro_lim_.data() + ri * nm;
      vr.slope = sx_lim_.data() + ri * K_;
      vr.kphi = kphi_g_[ri];
      FaceFluxParts p = micro_flux_x(vl, vr, fcx_[f], g.dx, *tables_, cfg_.flux_mode);
      const double rl = r1[li], rr = r1[ri];
      for (int a = 0; a < nm; ++a) {
        const double flux =
            p.from_In[a] + p.from_phin[a] + p.rho_lo[a] * rl + p.rho_hi[a] * rr;
        if (i > 0)
          div[(static_cast<std::size_t>(j) * nx + i - 1) * nm + a] -= rx * flux;
        if (i < nx)
          div[(static_cast<std::size_t>(j) * nx + i) * nm + a] += rx * flux;
      }
    }
  }
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t f = static_cast<std::size_t>(j) * nx + i;
      const std::size_t li = g.index(i, j - 1), ri = g.index(i, j);
      FluxCellView vl, vr;
      vl.rho = state.rho[li];
      vl.micro = micro_lim_.data() + li * nm;
      vl.slope = sy_lim_.data() + li * K_;
      vl.kphi = kphi_g_[li];
      vr.rho = state.rho[ri];
      vr.micro = micro_lim_.data() + ri * nm;
      vr.slope = sy_lim_.data() + ri * K_;
      vr.kphi = kphi_g_[ri];
      FaceFluxParts p = micro_flux_y(vl, vr, fcy_[f], g.dy, *tables_, cfg_.flux_mode);
      const double rl = r1[li], rr = r1[ri];
      for (int a = 0; a < nm; ++a) {
        const double flux =
            p.from_In[a] + p.from_phin[a] + p.rho_lo[a] * rl + p.rho_hi[a] * rr;
        if (j > 0)
          div[(static_cast<std::size_t>(j - 1) * nx + i) * nm + a] -= ry * flux;
        if (j < ny)
          div[(static_cast<std::size_t>(j) * nx + i) * nm + a] += ry * flux;
      }
    }
  }

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t cell = static_cast<std::size_t>(j) * nx + i;
      const std::size_t idx = g.index(i, j);
      const double relax = sigma_int_[cell] * pc.c * dt_ / (pc.eps * pc.eps);
      const double sf =
          cfg_.sigma_f_cells.empty() ? cfg_.sigma_f : cfg_.sigma_f_cells[cell];
      double* mic = state.micro_at(idx);
      for (int a = 0; a < nm; ++a) {
        const double denom =
            1.0 + relax + dt_ * sf * tables_->filter_diagonal[a + 1];
        mic[a] = (mic[a] + div[cell * nm + a]) / denom;
      }
      state.rho[idx] = rho_new[cell];
      state.phi[idx] = phi_new[cell];
      state.T[idx] = T_new[cell];
    }
  }
}

double Solver::admissible_dt(const MomentState& state, double dt_cap) const {
  check_state(state);
  const int nx = grid_.nx, ny = grid_.ny;
  std::vector<double> sg(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const std::size_t cell = static_cast<std::size_t>(j) * nx + i;
      sg[cell] = opacity_.value(cell, state.T[grid_.index(i, j)]);
    }
  return max_timestep(nx, ny, grid_.dx, grid_.dy, sg, cfg_.constants, dt_cap,
                      cfg_.positivity ? TimestepMode::pp_strict
                                      : TimestepMode::cfl_only);
}

namespace {

constexpr char kCheckpointMagic[8] = {'P', 'P', 'F', 'P', 'N', 'C', 'K', '1'};

void put_bytes(std::ofstream& out, const void* p, std::size_t bytes) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(bytes));
}

void get_bytes(std::ifstream& in, void* p, std::size_t bytes) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(bytes));
  if (!in) throw ConfigError("checkpoint: truncated file");
}

}  // namespace

void write_checkpoint(const std::string& path, const Grid2D& g,
                      const MomentState& state, double time) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("checkpoint: cannot open " + path);
  put_bytes(out, kCheckpointMagic, sizeof(kCheckpointMagic));
  const std::int32_t head[4] = {g.nx, g.ny, g.ghost_width, state.n_micro};
  put_bytes(out, head, sizeof(head));
  const double geo[5] = {g.dx, g.dy, g.x0, g.y0, time};
  put_bytes(out, geo, sizeof(geo));
  put_bytes(out, state.rho.data(), state.rho.size() * sizeof(double));
  put_bytes(out, state.T.data(), state.T.size() * sizeof(double));
  put_bytes(out, state.phi.data(), state.phi.size() * sizeof(double));
  put_bytes(out, state.micro.data(), state.micro.size() * sizeof(double));
  if (!out) throw ConfigError("checkpoint: write failure on " + path);
}

double read_checkpoint(const std::string& path, const Grid2D& g,
                       MomentState& state) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("checkpoint: cannot open " + path);
  char magic[8];
  get_bytes(in, magic, sizeof(magic));
  if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw ConfigError("checkpoint: bad header in " + path);
  std::int32_t head[4];
  get_bytes(in, head, sizeof(head));
  if (head[0] != g.nx || head[1] != g.ny || head[2] != g.ghost_width ||
      head[3] != state.n_micro)
    throw ConfigError("checkpoint: geometry mismatch in " + path);
  double geo[5];
  get_bytes(in, geo, sizeof(geo));
  if (geo[0] != g.dx || geo[1] != g.dy || geo[2] != g.x0 || geo[3] != g.y0)
    throw ConfigError("checkpoint: geometry mismatch in " + path);
  get_bytes(in, state.rho.data(), state.rho.size() * sizeof(double));
  get_bytes(in, state.T.data(), state.T.size() * sizeof(double));
  get_bytes(in, state.phi.data(), state.phi.size() * sizeof(double));
  get_bytes(in, state.micro.data(), state.micro.size() * sizeof(double));
  return geo[4];
}

}
