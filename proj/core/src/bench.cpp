#include "ppfpn/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>

#include "ppfpn/errors.hpp"
#include "ppfpn/version.hpp"

namespace ppfpn {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

const AngularTables& cached_tables(int n, FilterKind f) {
  static std::map<std::pair<int, int>, AngularTables> cache;
  const auto key = std::make_pair(n, static_cast<int>(f));
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_tables(n, f)).first;
  return it->second;
}

bool tophat_thin(double x, double y) {
  const double ay = std::fabs(y);
  if (x < 2.5) return ay < 0.5;
  if (x < 3.0) return ay < 1.5;
  if (x < 4.0) return ay > 0.5 && ay < 1.5;
  if (x < 4.5) return ay < 1.5;
  return ay < 0.5;
}

std::vector<Scenario> make_registry() {
  std::vector<Scenario> v;

  {
    Scenario s;
    s.name = "line_source";
    s.summary =
        "isotropic pulse spreading through a thin medium; positivity and "
        "ring symmetry check";
    s.x0 = -1.5;
    s.x1 = 1.5;
    s.y0 = -1.5;
    s.y1 = 1.5;
    s.paper = {150, 150, 1.0, 0.0};
    s.desk = {100, 100, 1.0, 0.0};
    s.n_order = 11;
    s.filter = FilterKind::sspline;
    s.sigma_f = 45.0;
    s.linear_transport = true;
    s.cfl = 0.1;
    s.opacity_coeff = [](double, double) { return 1.0; };
    s.init_T = [](double, double) { return 1.0; };
    s.init_rho = [](double x, double y) {
      const double var = 0.03 * 0.03;
      return std::exp(-(x * x + y * y) / (2.0 * var)) / (2.0 * kPi * var);
    };
    s.boundary = [] { return BoundaryCondition::uniform(BcKind::vacuum); };
    s.record_min_rho = true;
    s.symmetry_radii = {0.25, 0.5, 0.75, 1.0};
    s.lineout_diagonal = true;
    v.push_back(std::move(s));
  }

  {
    Scenario s;
    s.name = "ap_test";
    s.summary =
        "thick linear slab driven by a hot wall; checks the walk into the "
        "diffusion regime";
    s.x0 = 0.0;
    s.x1 = 1.0;
    s.y_tracks_dx = true;
    s.paper = {200, 2, 2.0, 0.1};
    s.desk = {100, 2, 2.0, 0.25};
    s.constants.eps = 1e-8;
    s.n_order = 3;
    s.linear_transport = true;
    s.cfl = 0.25;
    s.opacity_coeff = [](double, double) { return 1.0; };
    s.init_T = [](double, double) { return 0.0; };
    s.init_rho = [](double, double) { return 0.0; };
    s.boundary = [] {
      BoundaryCondition bc;
      bc.left = {BcSegment{BcKind::planckian, std::pow(4.0 * kPi, 0.25)}};
      bc.right = {BcSegment{BcKind::vacuum}};
      bc.bottom = {BcSegment{BcKind::reflective}};
      bc.top = {BcSegment{BcKind::reflective}};
      return bc;
    };
    s.record_err_ap = true;
    s.snapshot_times = {0.01, 0.05, 0.15};
    v.push_back(std::move(s));
  }

  {
    Scenario s;
    s.name = "accuracy";
    s.summary =
        "smooth periodic nonlinear wave for self convergence studies across "
        "the stiffness range";
    s.x0 = 0.0;
    s.x1 = 1.0;
    s.y_tracks_dx = true;
    s.paper = {80, 2, 0.2, 0.0};
    s.desk = {40, 2, 0.2, 0.0};
    s.n_order = 7;
    s.dt_parabolic = true;
    s.opacity_coeff = [](double, double) { return 1.0; };
    s.init_T = [](double x, double) {
      return 1.0 + 0.5 * std::sin(2.0 * kPi * x);
    };
    s.boundary = [] {
      BoundaryCondition bc = BoundaryCondition::uniform(BcKind::periodic);
      bc.bottom = {BcSegment{BcKind::reflective}};
      bc.top = {BcSegment{BcKind::reflective}};
      return bc;
    };
    v.push_back(std::move(s));
  }

  {
    Scenario s;
    s.name = "marshak2b";
    s.summary =
        "Marshak wave into cold material with opacity 300/T^3, hot wall at "
        "1 keV";
    s.x0 = 0.0;
    s.x1 = 1.0;
    s.y_tracks_dx = true;
    s.paper = {200, 2, 74.0, 0.7};
    s.desk = {100, 2, 15.0, 0.7};
    s.constants = PhysicsConstants{0.01372, 29.98, 1.0, 0.3};
    s.n_order = 3;
    s.cfl = 0.7;
    s.cfl_simplified = 0.05;
    s.cfl_over_c = true;
    s.opacity_law = OpacityField::Law::inverse_t3;
    s.opacity_coeff = [](double, double) { return 300.0; };
    s.init_T = [](double, double) { return 1e-6; };
    s.boundary = [] {
      BoundaryCondition bc;
      bc.left = {BcSegment{BcKind::planckian, 1.0}};
      bc.right = {BcSegment{BcKind::vacuum}};
      bc.bottom = {BcSegment{BcKind::reflective}};
      bc.top = {BcSegment{BcKind::reflective}};
      return bc;
    };
    s.snapshot_times = {15.0, 30.0, 45.0, 60.0};
    v.push_back(std::move(s));
  }

  {
    Scenario s;
    s.name = "marshak2a";
    s.summary =
        "fast Marshak wave with opacity 30/T^3; the front sits near the "
        "diffusion solution";
    s.x0 = 0.0;
    s.x1 = 1.0;
    s.y_tracks_dx = true;
    s.paper = {200, 2, 1.0, 0.25};
    s.desk = {100, 2, 1.0, 0.25};
    s.constants = PhysicsConstants{0.01372, 29.98, 1.0, 0.3};
    s.n_order = 3;
    s.cfl = 0.25;
    s.cfl_over_c = true;
    s.opacity_law = OpacityField::Law::inverse_t3;
    s.opacity_coeff = [](double, double) { return 30.0; };
    s.init_T = [](double, double) { return 1e-6; };
    s.boundary = [] {
      BoundaryCondition bc;
      bc.left = {BcSegment{BcKind::planckian, 1.0}};
      bc.right = {BcSegment{BcKind::vacuum}};
      bc.bottom = {BcSegment{BcKind::reflective}};
      bc.top = {BcSegment{BcKind::reflective}};
      return bc;
    };
    s.snapshot_times = {0.2, 0.4, 0.6, 0.8};
    v.push_back(std::move(s));
  }

  {
    Scenario s;
    s.name = "tophat";
    s.summary =
        "radiation ducted around a dense block; probes track heating in the "
        "thin channel";
    s.x0 = 0.0;
    s.x1 = 7.0;
    s.y0 = -2.0;
    s.y1 = 2.0;
    s.paper = {128, 64, 10.0, 0.25};
    s.desk = {64, 32, 1.0, 0.25};
    s.constants = PhysicsConstants{0.01372, 29.98, 1.0, 1.0};
    s.n_order = 7;
    s.filter = FilterKind::lanczos;
    s.sigma_f = 2000.0;
    s.cfl = 0.25;
    s.cfl_over_c = true;
    s.opacity_coeff = [](double x, double y) {
      return tophat_thin(x, y) ? 0.2 : 2000.0;
    };
    s.heat_capacity = [](double x, double y) {
      return tophat_thin(x, y) ? 0.001 : 1.0;
    };
    s.filter_strength = [](double x, double y) {
      return tophat_thin(x, y) ? 2000.0 : 0.0;
    };
    s.init_T = [](double, double) { return 0.05; };
    s.boundary = [] {
      BoundaryCondition bc = BoundaryCondition::uniform(BcKind::vacuum);
      bc.left = {BcSegment{BcKind::vacuum, 0.0, -1e300, -0.5},
                 BcSegment{BcKind::planckian, 0.5, -0.5, 0.5},
                 BcSegment{BcKind::vacuum, 0.0, 0.5, 1e300}};
      return bc;
    };
    s.probes = {{"A", 0.25, 0.0},
                {"B", 2.75, 0.0},
                {"C", 3.5, 1.25},
                {"D", 4.25, 0.0},
                {"E", 6.75, 0.0}};
    s.record_min_rho = true;
    s.snapshot_times = {0.5};
    v.push_back(std::move(s));
  }

  return v;
}

struct ResolvedRun {
  Grid2D g;
  BoundaryCondition bc;
  OpacityField op;
  SolverConfig cfg;
  int n_order = 0;
  FilterKind filter = FilterKind::none;
  double sigma_f = 0.0;
  double cfl = 0.0;
  double t_end = 0.0;
  bool dt_parabolic = false;
  bool cfl_over_c = false;
  std::string preset;
};

ResolvedRun resolve(const Scenario& s, const RunOverrides& o) {
  ResolvedRun r;
  const ScenarioPreset* p = nullptr;
  if (o.preset == "paper")
    p = &s.paper;
  else if (o.preset == "desk")
    p = &s.desk;
  else
    throw ConfigError("bench: unknown preset " + o.preset);
  r.preset = o.preset;

  int nx = o.nx > 0 ? o.nx : p->nx;
  int ny = o.ny > 0 ? o.ny : p->ny;
  double y0 = s.y0, y1 = s.y1;
  if (s.y_tracks_dx) {
    if (o.ny <= 0) ny = 2;
    y0 = 0.0;
    y1 = ny * (s.x1 - s.x0) / nx;
  }
  if (nx < 2 || ny < 2) throw ConfigError("bench: grid too small");
  r.g = make_grid(nx, ny, s.x0, s.x1, y0, y1);

  r.t_end = o.t_end > 0.0 ? o.t_end : p->t_end;
  if (!(r.t_end > 0.0)) throw ConfigError("bench: nonpositive end time");
  r.n_order = o.n_order > 0 ? o.n_order : s.n_order;
  r.filter = o.has_filter ? o.filter : s.filter;
  r.sigma_f = o.sigma_f >= 0.0 ? o.sigma_f : s.sigma_f;

  SolverConfig cfg;
  cfg.constants = s.constants;
  if (o.eps > 0.0) cfg.constants.eps = o.eps;
  cfg.flux_mode = o.has_mode ? o.mode : s.flux_mode;
  cfg.positivity = o.positivity < 0 ? s.positivity : o.positivity > 0;
  cfg.linear_transport = s.linear_transport;
  cfg.sigma_f = r.sigma_f;

  if (o.cfl > 0.0)
    r.cfl = o.cfl;
  else if (cfg.flux_mode == FluxMode::simplified && s.cfl_simplified > 0.0)
    r.cfl = s.cfl_simplified;
  else
    r.cfl = p->cfl > 0.0 ? p->cfl : s.cfl;
  r.dt_parabolic = s.dt_parabolic;
  r.cfl_over_c = s.cfl_over_c;

  const std::size_t n = static_cast<std::size_t>(nx) * ny;
  r.op.law = s.opacity_law;
  r.op.coeff.resize(n);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      r.op.coeff[static_cast<std::size_t>(j) * nx + i] =
          s.opacity_coeff(r.g.xc(i), r.g.yc(j));
  if (s.heat_capacity) {
    cfg.cv_cells.resize(n);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        cfg.cv_cells[static_cast<std::size_t>(j) * nx + i] =
            s.heat_capacity(r.g.xc(i), r.g.yc(j));
  }
  if (s.filter_strength && o.sigma_f < 0.0) {
    cfg.sigma_f_cells.resize(n);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        cfg.sigma_f_cells[static_cast<std::size_t>(j) * nx + i] =
            s.filter_strength(r.g.xc(i), r.g.yc(j));
  }
  r.cfg = cfg;
  r.bc = s.boundary();
  return r;
}

std::vector<double> interior_values(const Grid2D& g,
                                    const std::vector<double>& ghosted) {
  std::vector<double> out(static_cast<std::size_t>(g.nx) * g.ny);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      out[static_cast<std::size_t>(j) * g.nx + i] = ghosted[g.index(i, j)];
  return out;
}

double interior_min(const Grid2D& g, const std::vector<double>& ghosted) {
  double m = ghosted[g.index(0, 0)];
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) m = std::min(m, ghosted[g.index(i, j)]);
  return m;
}

double err_ap_of(const Grid2D& g, const MomentState& st, int K) {
  const double inv2sp = 1.0 / (2.0 * std::sqrt(kPi));
  double worst = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t idx = g.index(i, j);
      double v = std::fabs(st.rho[idx] - st.phi[idx]) * inv2sp;
      const double* mic = st.micro_at(idx);
      for (int a = 0; a + 1 < K; ++a) v += std::fabs(mic[a]);
      worst = std::max(worst, v);
    }
  return worst;
}

std::string time_tag(double t) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "t%g", t);
  return buf;
}

void emit_fields(const std::string& dir, const std::string& tag,
                 const Grid2D& g, const MomentState& st,
                 const PhysicsConstants& pc, bool diagonal) {
  std::vector<double> tr(g.cells(), 0.0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t idx = g.index(i, j);
      tr[idx] = radiation_temperature(st.rho[idx], pc);
    }
  write_field_csv(dir + "/rho_" + tag + ".csv", g, st.rho, "rho");
  write_field_csv(dir + "/T_" + tag + ".csv", g, st.T, "T");
  write_field_csv(dir + "/Tr_" + tag + ".csv", g, tr, "Tr");
  write_fields_vtk(dir + "/fields_" + tag + ".vtk", g, "ppfpn fields",
                   {{"rho", &st.rho}, {"T", &st.T}, {"Tr", &tr}});

  const std::vector<double> rho_i = interior_values(g, st.rho);
  const std::vector<double> t_i = interior_values(g, st.T);
  const double ymid = g.y0 + 0.5 * g.ny * g.dy;
  std::vector<double> xs(g.nx), vr(g.nx), vt(g.nx), vtr(g.nx);
  for (int i = 0; i < g.nx; ++i) {
    xs[i] = g.xc(i);
    vr[i] = sample_bilinear(g, rho_i, xs[i], ymid);
    vt[i] = sample_bilinear(g, t_i, xs[i], ymid);
    vtr[i] = radiation_temperature(vr[i], pc);
  }
  write_lineout_csv(dir + "/lineout_rho_" + tag + ".csv", "x", xs, "rho", vr);
  write_lineout_csv(dir + "/lineout_T_" + tag + ".csv", "x", xs, "T", vt);
  write_lineout_csv(dir + "/lineout_Tr_" + tag + ".csv", "x", xs, "Tr", vtr);

  if (diagonal) {
    const double cx = g.x0 + 0.5 * g.nx * g.dx;
    const double cy = g.y0 + 0.5 * g.ny * g.dy;
    std::vector<double> ss(g.nx), vd(g.nx);
    for (int i = 0; i < g.nx; ++i) {
      const double u = g.xc(i);
      ss[i] = std::sqrt(2.0) * (u - cx);
      vd[i] = sample_bilinear(g, rho_i, u, cy + (u - cx));
    }
    write_lineout_csv(dir + "/lineout_diag_rho_" + tag + ".csv", "s", ss,
                      "rho", vd);
  }
}

}  // namespace

const std::vector<Scenario>& scenario_registry() {
  static const std::vector<Scenario> registry = make_registry();
  return registry;
}

const Scenario& find_scenario(const std::string& name) {
  for (const Scenario& s : scenario_registry())
    if (s.name == name) return s;
  throw ConfigError("bench: unknown scenario " + name);
}

double radiation_temperature(double rho, const PhysicsConstants& pc) {
  return std::pow(std::max(rho, 0.0) / (pc.a * pc.c), 0.25);
}

double sample_bilinear(const Grid2D& g, const std::vector<double>& interior,
                       double x, double y) {
  if (interior.size() != static_cast<std::size_t>(g.nx) * g.ny)
    throw ConfigError("bench: field size does not match grid");
  double fx = (x - g.x0) / g.dx - 0.5;
  double fy = (y - g.y0) / g.dy - 0.5;
  int i0 = static_cast<int>(std::floor(fx));
  int j0 = static_cast<int>(std::floor(fy));
  double wx = fx - i0, wy = fy - j0;
  if (i0 < 0) i0 = 0, wx = 0.0;
  if (i0 > g.nx - 2) i0 = g.nx - 2, wx = 1.0;
  if (j0 < 0) j0 = 0, wy = 0.0;
  if (j0 > g.ny - 2) j0 = g.ny - 2, wy = 1.0;
  const std::size_t base = static_cast<std::size_t>(j0) * g.nx + i0;
  const double lo = (1.0 - wx) * interior[base] + wx * interior[base + 1];
  const double hi =
      (1.0 - wx) * interior[base + g.nx] + wx * interior[base + g.nx + 1];
  return (1.0 - wy) * lo + wy * hi;
}

std::vector<double> symmetry_metric(const Grid2D& g,
                                    const std::vector<double>& interior,
                                    const std::vector<double>& radii,
                                    int n_angles) {
  if (n_angles < 4) throw ConfigError("bench: too few sample angles");
  const double wx = g.nx * g.dx, wy = g.ny * g.dy;
  const double cx = g.x0 + 0.5 * wx, cy = g.y0 + 0.5 * wy;
  if (std::fabs(cx) > 1e-12 * wx || std::fabs(cy) > 1e-12 * wy ||
      std::fabs(wx - wy) > 1e-12 * wx)
    throw ConfigError("bench: symmetry check needs a centered square domain");
  const double rmax = 0.5 * wx - 0.5 * std::max(g.dx, g.dy);
  std::vector<double> out;
  out.reserve(radii.size());
  for (double r : radii) {
    if (!(r > 0.0) || r > rmax)
      throw ConfigError("bench: sample radius outside the domain");
    double lo = 0.0, hi = 0.0, sum = 0.0;
    for (int k = 0; k < n_angles; ++k) {
      const double th = 2.0 * kPi * k / n_angles;
      const double v =
          sample_bilinear(g, interior, cx + r * std::cos(th),
                          cy + r * std::sin(th));
      if (k == 0) lo = hi = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    const double mean = std::fabs(sum / n_angles);
    out.push_back((hi - lo) / std::max(mean, 1e-300));
  }
  return out;
}

std::vector<double> restrict_field(int fine_nx, int fine_ny,
                                   const std::vector<double>& fine, int nx,
                                   int ny) {
  if (fine.size() != static_cast<std::size_t>(fine_nx) * fine_ny)
    throw ConfigError("bench: fine field size does not match its grid");
  std::vector<double> out(static_cast<std::size_t>(nx) * ny);
  if (fine_nx == 2 * nx && fine_ny == 2 * ny) {
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const std::size_t b =
            static_cast<std::size_t>(2 * j) * fine_nx + 2 * i;
        out[static_cast<std::size_t>(j) * nx + i] =
            0.25 * (fine[b] + fine[b + 1] + fine[b + fine_nx] +
                    fine[b + fine_nx + 1]);
      }
  } else if (fine_nx == 2 * nx && fine_ny == ny) {
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const std::size_t b = static_cast<std::size_t>(j) * fine_nx + 2 * i;
        out[static_cast<std::size_t>(j) * nx + i] =
            0.5 * (fine[b] + fine[b + 1]);
      }
  } else {
    throw ConfigError("bench: fields are not 2:1 nested");
  }
  return out;
}

RunResult run_scenario(const Scenario& s, const RunOverrides& overrides) {
  ResolvedRun r = resolve(s, overrides);
  const AngularTables& tables = cached_tables(r.n_order, r.filter);
  Solver solver(r.g, &tables, r.bc, r.op, r.cfg);

  MomentState st = make_state(r.g, tables.K - 1);
  const PhysicsConstants& pc = r.cfg.constants;
  for (int j = 0; j < r.g.ny; ++j)
    for (int i = 0; i < r.g.nx; ++i) {
      const std::size_t idx = r.g.index(i, j);
      const double xc = r.g.xc(i), yc = r.g.yc(j);
      const double T = s.init_T(xc, yc);
      const double phi = pc.a * pc.c * T * T * T * T;
      const double rho = s.init_rho ? s.init_rho(xc, yc) : phi;
      st.T[idx] = T;
      st.rho[idx] = rho;
      st.phi[idx] = r.cfg.linear_transport ? rho : phi;
    }

  RunResult out;
  out.n_order = r.n_order;
  out.filter = r.filter;
  out.sigma_f = r.sigma_f;
  out.flux_mode = r.cfg.flux_mode;
  out.positivity = r.cfg.positivity;
  out.linear_transport = r.cfg.linear_transport;
  out.cfl = r.cfl;
  out.t_end = r.t_end;
  out.preset = r.preset;
  out.constants = pc;
  MetricReport& rep = out.report;

  for (const Probe& p : s.probes) {
    ProbeSeries ps;
    ps.name = p.name;
    ps.x = p.x;
    ps.y = p.y;
    rep.probes.push_back(std::move(ps));
  }
  auto sample_probes = [&](double t) {
    if (rep.probes.empty()) return;
    const std::vector<double> rho_i = interior_values(r.g, st.rho);
    const std::vector<double> t_i = interior_values(r.g, st.T);
    for (ProbeSeries& ps : rep.probes) {
      ps.t.push_back(t);
      ps.T.push_back(sample_bilinear(r.g, t_i, ps.x, ps.y));
      ps.Tr.push_back(radiation_temperature(
          sample_bilinear(r.g, rho_i, ps.x, ps.y), pc));
    }
  };

  // An explicit cfl override replaces the scenario's parabolic step rule.
  const double base_dt =
      r.dt_parabolic && overrides.cfl <= 0.0
          ? r.g.dx * r.g.dx
          : r.cfl * std::min(r.g.dx, r.g.dy) / (r.cfl_over_c ? pc.c : 1.0);

  std::vector<double> stops;
  for (double ts : s.snapshot_times)
    if (ts > 0.0 && ts < r.t_end * (1.0 - 1e-12)) stops.push_back(ts);
  std::sort(stops.begin(), stops.end());
  stops.push_back(r.t_end);

  const bool emit = !overrides.out_dir.empty();
  if (emit) std::filesystem::create_directories(overrides.out_dir);

  double t = 0.0;
  int steps = 0;
  double min_overall = interior_min(r.g, st.rho);
  sample_probes(0.0);
  if (overrides.observer) overrides.observer(0.0, r.g, st);

  for (std::size_t k = 0; k < stops.size(); ++k) {
    const double stop = stops[k];
    while (stop - t > 1e-12 * r.t_end) {
      const double cap = std::min(base_dt, stop - t);
      const double dt = solver.admissible_dt(st, cap);
      IterationReport ir = solver.advance(st, dt);
      t += dt;
      ++steps;
      if (stop - t <= 1e-12 * r.t_end) t = stop;
      min_overall = std::min(min_overall, ir.min_rho);
      if (s.record_min_rho) rep.min_rho_series.emplace_back(t, ir.min_rho);
      if (s.record_err_ap)
        rep.err_ap_series.emplace_back(t, err_ap_of(r.g, st, tables.K));
      sample_probes(t);
      if (overrides.observer) overrides.observer(t, r.g, st);
    }
    if (emit && k + 1 < stops.size())
      emit_fields(overrides.out_dir, time_tag(stop), r.g, st, pc,
                  s.lineout_diagonal);
  }

  rep.steps = steps;
  rep.t_final = t;
  rep.min_rho_overall = min_overall;
  rep.final_err_ap = err_ap_of(r.g, st, tables.K);
  if (!s.symmetry_radii.empty()) {
    const std::vector<double> devs =
        symmetry_metric(r.g, interior_values(r.g, st.rho), s.symmetry_radii);
    for (std::size_t k = 0; k < devs.size(); ++k)
      rep.symmetry.emplace_back(s.symmetry_radii[k], devs[k]);
  }

  out.grid = r.g;
  out.state = std::move(st);

  if (emit) {
    const std::string& dir = overrides.out_dir;
    emit_fields(dir, "final", out.grid, out.state, pc, s.lineout_diagonal);
    if (s.record_min_rho) {
      std::vector<double> ts(rep.min_rho_series.size()),
          vs(rep.min_rho_series.size());
      for (std::size_t k = 0; k < rep.min_rho_series.size(); ++k) {
        ts[k] = rep.min_rho_series[k].first;
        vs[k] = rep.min_rho_series[k].second;
      }
      write_series_csv(dir + "/min_rho.csv", {"t", "min_rho"}, {&ts, &vs});
    }
    if (s.record_err_ap) {
      std::vector<double> ts(rep.err_ap_series.size()),
          vs(rep.err_ap_series.size());
      for (std::size_t k = 0; k < rep.err_ap_series.size(); ++k) {
        ts[k] = rep.err_ap_series[k].first;
        vs[k] = rep.err_ap_series[k].second;
      }
      write_series_csv(dir + "/err_ap.csv", {"t", "err_ap"}, {&ts, &vs});
    }
    for (const ProbeSeries& ps : rep.probes)
      write_series_csv(dir + "/probe_" + ps.name + ".csv", {"t", "T", "Tr"},
                       {&ps.t, &ps.T, &ps.Tr});
    if (!rep.symmetry.empty()) {
      std::vector<double> rr(rep.symmetry.size()), dd(rep.symmetry.size());
      for (std::size_t k = 0; k < rep.symmetry.size(); ++k) {
        rr[k] = rep.symmetry[k].first;
        dd[k] = rep.symmetry[k].second;
      }
      write_series_csv(dir + "/symmetry.csv", {"radius", "deviation"},
                       {&rr, &dd});
    }
    write_manifest(dir + "/manifest.txt", s, out);
  }
  return out;
}

std::vector<OrderRow> convergence_study(const Scenario& s,
                                        const std::vector<int>& meshes,
                                        const RunOverrides& base) {
  if (meshes.size() < 3)
    throw ConfigError("bench: a convergence study needs at least three meshes");
  for (std::size_t k = 0; k + 1 < meshes.size(); ++k)
    if (meshes[k + 1] != 2 * meshes[k])
      throw ConfigError("bench: meshes must refine by factors of two");

  std::map<int, RunResult> runs;
  auto get = [&](int nx) -> const RunResult& {
    auto it = runs.find(nx);
    if (it == runs.end()) {
      RunOverrides o = base;
      o.nx = nx;
      o.ny = 0;
      o.out_dir.clear();
      it = runs.emplace(nx, run_scenario(s, o)).first;
    }
    return it->second;
  };

  auto errors = [](const std::vector<double>& u, const std::vector<double>& ref,
                   double& l2, double& linf) {
    double num = 0.0, den = 0.0, dmax = 0.0, rmax = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double d = u[k] - ref[k];
      num += d * d;
      den += ref[k] * ref[k];
      dmax = std::max(dmax, std::fabs(d));
      rmax = std::max(rmax, std::fabs(ref[k]));
    }
    l2 = std::sqrt(num / std::max(den, 1e-300));
    linf = dmax / std::max(rmax, 1e-300);
  };

  std::vector<OrderRow> rows;
  for (int nx : meshes) {
    const RunResult& coarse = get(nx);
    const RunResult& fine = get(2 * nx);
    const std::vector<double> ref_rho = restrict_field(
        fine.grid.nx, fine.grid.ny, interior_values(fine.grid, fine.state.rho),
        coarse.grid.nx, coarse.grid.ny);
    const std::vector<double> ref_T = restrict_field(
        fine.grid.nx, fine.grid.ny, interior_values(fine.grid, fine.state.T),
        coarse.grid.nx, coarse.grid.ny);
    OrderRow row;
    row.nx = nx;
    errors(interior_values(coarse.grid, coarse.state.rho), ref_rho, row.l2_rho,
           row.linf_rho);
    errors(interior_values(coarse.grid, coarse.state.T), ref_T, row.l2_T,
           row.linf_T);
    if (!rows.empty()) {
      const OrderRow& prev = rows.back();
      row.order_l2_rho = std::log2(prev.l2_rho / row.l2_rho);
      row.order_linf_rho = std::log2(prev.linf_rho / row.linf_rho);
      row.order_l2_T = std::log2(prev.l2_T / row.l2_T);
      row.order_linf_T = std::log2(prev.linf_T / row.linf_T);
    }
    rows.push_back(row);
  }
  return rows;
}

void write_lineout_csv(const std::string& path, const std::string& coord_name,
                       const std::vector<double>& coord,
                       const std::string& value_name,
                       const std::vector<double>& value) {
  if (coord.size() != value.size())
    throw ConfigError("bench: lineout columns differ in length");
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("bench: cannot open " + path);
  std::fprintf(f, "%s,%s\n", coord_name.c_str(), value_name.c_str());
  for (std::size_t k = 0; k < coord.size(); ++k)
    std::fprintf(f, "%.17g,%.17g\n", coord[k], value[k]);
  std::fclose(f);
}

void write_series_csv(const std::string& path,
                      const std::vector<std::string>& names,
                      const std::vector<const std::vector<double>*>& columns) {
  if (names.empty() || names.size() != columns.size())
    throw ConfigError("bench: series columns and names differ");
  const std::size_t rows = columns[0]->size();
  for (const auto* c : columns)
    if (c->size() != rows)
      throw ConfigError("bench: series columns differ in length");
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("bench: cannot open " + path);
  for (std::size_t k = 0; k < names.size(); ++k)
    std::fprintf(f, "%s%s", k ? "," : "", names[k].c_str());
  std::fprintf(f, "\n");
  for (std::size_t rw = 0; rw < rows; ++rw) {
    for (std::size_t k = 0; k < columns.size(); ++k)
      std::fprintf(f, "%s%.17g", k ? "," : "", (*columns[k])[rw]);
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

void write_order_table(const std::string& txt_path, const std::string& csv_path,
                       const std::vector<OrderRow>& rows) {
  std::FILE* f = std::fopen(txt_path.c_str(), "w");
  if (!f) throw ConfigError("bench: cannot open " + txt_path);
  std::fprintf(f, "%6s %12s %6s %12s %6s %12s %6s %12s %6s\n", "nx", "l2_rho",
               "ord", "linf_rho", "ord", "l2_T", "ord", "linf_T", "ord");
  for (const OrderRow& r : rows)
    std::fprintf(f,
                 "%6d %12.4e %6.2f %12.4e %6.2f %12.4e %6.2f %12.4e %6.2f\n",
                 r.nx, r.l2_rho, r.order_l2_rho, r.linf_rho, r.order_linf_rho,
                 r.l2_T, r.order_l2_T, r.linf_T, r.order_linf_T);
  std::fclose(f);

  f = std::fopen(csv_path.c_str(), "w");
  if (!f) throw ConfigError("bench: cannot open " + csv_path);
  std::fprintf(f,
               "nx,l2_rho,order_l2_rho,linf_rho,order_linf_rho,l2_T,order_l2_T,"
               "linf_T,order_linf_T\n");
  for (const OrderRow& r : rows)
    std::fprintf(
        f, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.nx,
        r.l2_rho, r.order_l2_rho, r.linf_rho, r.order_linf_rho, r.l2_T,
        r.order_l2_T, r.linf_T, r.order_linf_T);
  std::fclose(f);
}

void write_manifest(const std::string& path, const Scenario& s,
                    const RunResult& r) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("bench: cannot open " + path);
  std::fprintf(f, "scenario %s\n", s.name.c_str());
  std::fprintf(f, "version %s\n", library_version);
  std::fprintf(f, "preset %s\n", r.preset.c_str());
  std::fprintf(f, "nx %d\n", r.grid.nx);
  std::fprintf(f, "ny %d\n", r.grid.ny);
  std::fprintf(f, "x0 %.17g\n", r.grid.x0);
  std::fprintf(f, "x1 %.17g\n", r.grid.x0 + r.grid.nx * r.grid.dx);
  std::fprintf(f, "y0 %.17g\n", r.grid.y0);
  std::fprintf(f, "y1 %.17g\n", r.grid.y0 + r.grid.ny * r.grid.dy);
  std::fprintf(f, "t_end %.17g\n", r.t_end);
  std::fprintf(f, "steps %d\n", r.report.steps);
  std::fprintf(f, "n_order %d\n", r.n_order);
  const char* fname = r.filter == FilterKind::none
                          ? "none"
                          : r.filter == FilterKind::sspline ? "sspline"
                                                            : "lanczos";
  std::fprintf(f, "filter %s\n", fname);
  std::fprintf(f, "sigma_f %.17g\n", r.sigma_f);
  std::fprintf(f, "mode %s\n",
               r.flux_mode == FluxMode::full ? "ugks" : "sugks");
  std::fprintf(f, "pp %s\n", r.positivity ? "on" : "off");
  std::fprintf(f, "linear_transport %d\n", r.linear_transport ? 1 : 0);
  std::fprintf(f, "cfl %.17g\n", r.cfl);
  std::fprintf(f, "a %.17g\n", r.constants.a);
  std::fprintf(f, "c %.17g\n", r.constants.c);
  std::fprintf(f, "eps %.17g\n", r.constants.eps);
  std::fprintf(f, "C_v %.17g\n", r.constants.C_v);
  std::fprintf(f, "opacity_law %s\n",
               s.opacity_law == OpacityField::Law::constant ? "constant"
                                                            : "inverse_t3");
  std::fprintf(f, "min_rho %.17g\n", r.report.min_rho_overall);
  std::fprintf(f, "err_ap %.17g\n", r.report.final_err_ap);
  for (const Probe& p : s.probes)
    std::fprintf(f, "probe %s %.17g %.17g\n", p.name.c_str(), p.x, p.y);
  for (const auto& sym : r.report.symmetry)
    std::fprintf(f, "symmetry %.17g %.17g\n", sym.first, sym.second);
  for (double ts : s.snapshot_times) std::fprintf(f, "snapshot %.17g\n", ts);
  std::fclose(f);
}

}  // namespace ppfpn
