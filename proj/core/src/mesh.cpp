#include "ppfpn/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ppfpn/errors.hpp"

namespace ppfpn {

Grid2D make_grid(int nx, int ny, double xlo, double xhi, double ylo,
                 double yhi) {
  if (nx <= 0 || ny <= 0 || !(xhi > xlo) || !(yhi > ylo))
    throw ConfigError("make_grid: bad extents");
  Grid2D g;
  g.nx = nx;
  g.ny = ny;
  g.dx = (xhi - xlo) / nx;
  g.dy = (yhi - ylo) / ny;
  g.x0 = xlo;
  g.y0 = ylo;
  return g;
}

MomentState make_state(const Grid2D& g, int n_micro) {
  if (n_micro < 0) throw ConfigError("make_state: bad moment count");
  MomentState s;
  s.n_micro = n_micro;
  s.rho.assign(g.cells(), 0.0);
  s.T.assign(g.cells(), 0.0);
  s.phi.assign(g.cells(), 0.0);
  s.micro.assign(g.cells() * static_cast<std::size_t>(n_micro), 0.0);
  return s;
}

BoundaryCondition BoundaryCondition::uniform(BcKind kind, double T_b) {
  BcSegment seg;
  seg.kind = kind;
  seg.T_b = T_b;
  BoundaryCondition bc;
  bc.left = {seg};
  bc.right = {seg};
  bc.bottom = {seg};
  bc.top = {seg};
  return bc;
}

std::vector<double> parity_map_x(int N) {
  int K = basis_size(N);
  std::vector<double> p(K);
  for (int l = 0; l <= N; ++l) {
    for (int m = -l; m <= l; ++m) {
      int ma = m < 0 ? -m : m;
      double s;
      if (m >= 0)
        s = (ma % 2 == 0) ? 1.0 : -1.0;
      else
        s = (ma % 2 == 0) ? -1.0 : 1.0;
      p[flat_index(l, m)] = s;
    }
  }
  return p;
}

std::vector<double> parity_map_y(int N) {
  int K = basis_size(N);
  std::vector<double> p(K);
  for (int l = 0; l <= N; ++l)
    for (int m = -l; m <= l; ++m)
      p[flat_index(l, m)] = (m >= 0) ? 1.0 : -1.0;
  return p;
}

namespace {

// Clamp the segments of one edge to its span, then demand they tile it.
std::vector<BcSegment> normalize_edge(std::vector<BcSegment> segs,
                                      double span_lo, double span_hi,
                                      const char* edge_name) {
  double tol = 1e-9 * (span_hi - span_lo);
  for (auto& s : segs) {
    s.lo = std::max(s.lo, span_lo);
    s.hi = std::min(s.hi, span_hi);
  }
  segs.erase(std::remove_if(segs.begin(), segs.end(),
                            [&](const BcSegment& s) { return s.hi <= s.lo; }),
             segs.end());
  if (segs.empty())
    throw ConfigError(std::string("fill_ghosts: no boundary segments on ") +
                      edge_name);
  std::sort(segs.begin(), segs.end(),
            [](const BcSegment& a, const BcSegment& b) { return a.lo < b.lo; });
  if (segs.front().lo > span_lo + tol || segs.back().hi < span_hi - tol)
    throw ConfigError(std::string("fill_ghosts: segments leave a gap on ") +
                      edge_name);
  for (std::size_t k = 1; k < segs.size(); ++k) {
    if (std::fabs(segs[k].lo - segs[k - 1].hi) > tol)
      throw ConfigError(
          std::string("fill_ghosts: segments overlap or leave a gap on ") +
          edge_name);
  }
  return segs;
}

bool edge_is_periodic(const std::vector<BcSegment>& segs) {
  for (const auto& s : segs)
    if (s.kind == BcKind::periodic) return true;
  return false;
}

void check_periodic_pair(const std::vector<BcSegment>& a,
                         const std::vector<BcSegment>& b, const char* what) {
  bool pa = edge_is_periodic(a);
  bool pb = edge_is_periodic(b);
  if (pa != pb)
    throw ConfigError(std::string("fill_ghosts: periodic edges in ") + what +
                      " must come in pairs");
  if (pa && (a.size() != 1 || b.size() != 1))
    throw ConfigError(std::string("fill_ghosts: periodic edges in ") + what +
                      " cannot be segmented");
}

struct GhostSources {
  std::size_t ghost;
  std::size_t adjacent;  // nearest cell inward of the boundary face
  std::size_t mirror;    // reflection of the ghost across the face
  std::size_t wrap;      // periodic image
};

void fill_one(MomentState& s, const GhostSources& ix, const BcSegment& seg,
              const std::vector<double>& parity,
              const PhysicsConstants& consts) {
  int nm = s.n_micro;
  double* gm = s.micro_at(ix.ghost);
  switch (seg.kind) {
    case BcKind::vacuum: {
      s.rho[ix.ghost] = 0.0;
      for (int a = 0; a < nm; ++a) gm[a] = 0.0;
      s.phi[ix.ghost] = s.phi[ix.adjacent];
      s.T[ix.ghost] = s.T[ix.adjacent];
      break;
    }
    case BcKind::planckian: {
      double tb = seg.T_b;
      double phib = consts.a * consts.c * tb * tb * tb * tb;
      s.rho[ix.ghost] = phib;
      for (int a = 0; a < nm; ++a) gm[a] = 0.0;
      s.phi[ix.ghost] = phib;
      s.T[ix.ghost] = tb;
      break;
    }
    case BcKind::periodic: {
      s.rho[ix.ghost] = s.rho[ix.wrap];
      const double* wm = s.micro_at(ix.wrap);
      for (int a = 0; a < nm; ++a) gm[a] = wm[a];
      s.phi[ix.ghost] = s.phi[ix.wrap];
      s.T[ix.ghost] = s.T[ix.wrap];
      break;
    }
    case BcKind::reflective: {
      s.rho[ix.ghost] = s.rho[ix.mirror];
      const double* mm = s.micro_at(ix.mirror);
      for (int a = 0; a < nm; ++a) gm[a] = parity[a + 1] * mm[a];
      s.phi[ix.ghost] = s.phi[ix.mirror];
      s.T[ix.ghost] = s.T[ix.mirror];
      break;
    }
  }
}

}  // namespace

NormalizedBc normalize_bc(const BoundaryCondition& bc, const Grid2D& g) {
  double xlo = g.x0, xhi = g.x0 + g.nx * g.dx;
  double ylo = g.y0, yhi = g.y0 + g.ny * g.dy;
  NormalizedBc nb;
  nb.left = normalize_edge(bc.left, ylo, yhi, "left");
  nb.right = normalize_edge(bc.right, ylo, yhi, "right");
  nb.bottom = normalize_edge(bc.bottom, xlo, xhi, "bottom");
  nb.top = normalize_edge(bc.top, xlo, xhi, "top");
  check_periodic_pair(nb.left, nb.right, "x");
  check_periodic_pair(nb.bottom, nb.top, "y");
  return nb;
}

const BcSegment& bc_segment_at(const std::vector<BcSegment>& edge, double coord) {
  for (const auto& s : edge)
    if (coord < s.hi) return s;
  return edge.back();
}

void fill_ghosts(const Grid2D& g, MomentState& s, const BoundaryCondition& bc,
                 const AngularTables& tables, const PhysicsConstants& consts) {
  if (s.n_micro != tables.K - 1)
    throw ConfigError("fill_ghosts: moment count does not match tables");
  if (s.rho.size() != g.cells())
    throw ConfigError("fill_ghosts: state does not match grid");

  NormalizedBc nb = normalize_bc(bc, g);
  const auto& left = nb.left;
  const auto& right = nb.right;
  const auto& bottom = nb.bottom;
  const auto& top = nb.top;

  const std::vector<double>& px = tables.parity_x;
  const std::vector<double>& py = tables.parity_y;
  int gw = g.ghost_width;

  for (int j = 0; j < g.ny; ++j) {
    double yc = g.yc(j);
    const BcSegment& sl = bc_segment_at(left, yc);
    const BcSegment& sr = bc_segment_at(right, yc);
    for (int k = 0; k < gw; ++k) {
      GhostSources li{g.index(-1 - k, j), g.index(0, j), g.index(k, j),
                      g.index(g.nx - 1 - k, j)};
      fill_one(s, li, sl, px, consts);
      GhostSources ri{g.index(g.nx + k, j), g.index(g.nx - 1, j),
                      g.index(g.nx - 1 - k, j), g.index(k, j)};
      fill_one(s, ri, sr, px, consts);
    }
  }

  // The y sweep covers ghost columns too, so corner blocks become defined
  // combinations of the two edge conditions.
  const double xlo = g.x0, xhi = g.x0 + g.nx * g.dx;
  for (int i = -gw; i < g.nx + gw; ++i) {
    double xc = g.xc(i);
    double xq = std::min(std::max(xc, xlo), xhi);
    const BcSegment& sb = bc_segment_at(bottom, xq);
    const BcSegment& st = bc_segment_at(top, xq);
    for (int k = 0; k < gw; ++k) {
      GhostSources bi{g.index(i, -1 - k), g.index(i, 0), g.index(i, k),
                      g.index(i, g.ny - 1 - k)};
      fill_one(s, bi, sb, py, consts);
      GhostSources ti{g.index(i, g.ny + k), g.index(i, g.ny - 1),
                      g.index(i, g.ny - 1 - k), g.index(i, k)};
      fill_one(s, ti, st, py, consts);
    }
  }
}

void write_field_csv(const std::string& path, const Grid2D& g,
                     const std::vector<double>& field,
                     const std::string& name) {
  if (field.size() != g.cells())
    throw ConfigError("write_field_csv: field does not match grid");
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("write_field_csv: cannot open " + path);
  std::fprintf(f, "x,y,%s\n", name.c_str());
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      std::fprintf(f, "%.17g,%.17g,%.17g\n", g.xc(i), g.yc(j),
                   field[g.index(i, j)]);
  std::fclose(f);
}

std::vector<double> read_field_csv(const std::string& path, const Grid2D& g) {
  std::ifstream in(path);
  if (!in) throw ConfigError("read_field_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("read_field_csv: empty file " + path);
  std::vector<double> field(g.cells(), 0.0);
  std::size_t count = 0;
  std::size_t want = static_cast<std::size_t>(g.nx) * g.ny;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const char* p = line.c_str();
    char* end = nullptr;
    std::strtod(p, &end);
    if (end == p || *end != ',')
      throw ConfigError("read_field_csv: malformed row in " + path);
    p = end + 1;
    std::strtod(p, &end);
    if (end == p || *end != ',')
      throw ConfigError("read_field_csv: malformed row in " + path);
    p = end + 1;
    double v = std::strtod(p, &end);
    if (end == p) throw ConfigError("read_field_csv: malformed row in " + path);
    if (count >= want)
      throw ConfigError("read_field_csv: too many rows in " + path);
    int i = static_cast<int>(count % g.nx);
    int j = static_cast<int>(count / g.nx);
    field[g.index(i, j)] = v;
    ++count;
  }
  if (count != want)
    throw ConfigError("read_field_csv: wrong row count in " + path);
  return field;
}

void write_fields_vtk(
    const std::string& path, const Grid2D& g, const std::string& title,
    const std::vector<std::pair<std::string, const std::vector<double>*>>&
        fields) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("write_fields_vtk: cannot open " + path);
  std::fprintf(f, "# vtk DataFile Version 3.0\n%s\nASCII\n", title.c_str());
  std::fprintf(f, "DATASET STRUCTURED_POINTS\n");
  std::fprintf(f, "DIMENSIONS %d %d 1\n", g.nx + 1, g.ny + 1);
  std::fprintf(f, "ORIGIN %.17g %.17g 0\n", g.x0, g.y0);
  std::fprintf(f, "SPACING %.17g %.17g 1\n", g.dx, g.dy);
  std::fprintf(f, "CELL_DATA %d\n", g.nx * g.ny);
  for (const auto& nf : fields) {
    if (!nf.second || nf.second->size() != g.cells()) {
      std::fclose(f);
      throw ConfigError("write_fields_vtk: field does not match grid");
    }
    std::fprintf(f, "SCALARS %s double 1\nLOOKUP_TABLE default\n",
                 nf.first.c_str());
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        std::fprintf(f, "%.17g\n", (*nf.second)[g.index(i, j)]);
  }
  std::fclose(f);
}

}
