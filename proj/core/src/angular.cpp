#include "ppfpn/angular.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "ppfpn/errors.hpp"
#include "ppfpn/linalg.hpp"

namespace ppfpn {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// Associated Legendre P_l^m(mu) without the Condon-Shortley phase,
// m >= 0, standard three-term recurrence.
double assoc_legendre(int l, int m, double mu) {
  const double s = std::sqrt(std::max(0.0, 1.0 - mu * mu));
  double pmm = 1.0;
  for (int k = 1; k <= m; ++k) pmm *= (2.0 * k - 1.0) * s;
  if (l == m) return pmm;
  double pm1 = mu * (2.0 * m + 1.0) * pmm;
  if (l == m + 1) return pm1;
  double plm = 0.0;
  for (int ll = m + 2; ll <= l; ++ll) {
    plm = (mu * (2.0 * ll - 1.0) * pm1 - (ll + m - 1.0) * pmm) / (ll - m);
    pmm = pm1;
    pm1 = plm;
  }
  return plm;
}

// Orthonormalization constant; the sqrt(2) of the real basis is folded in.
double norm_constant(int l, int m_abs) {
  double ratio = 1.0;
  for (int k = l - m_abs + 1; k <= l + m_abs; ++k) ratio *= k;
  const double base = (2.0 * l + 1.0) / (4.0 * kPi) / ratio;
  return (m_abs == 0) ? std::sqrt(base) : std::sqrt(2.0 * base);
}

// Gauss-Legendre rule on (-1, 1), used as the auxiliary integrator when
// computing recurrence coefficients of nonclassical weights.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::fabs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    const double wi = 2.0 / ((1.0 - z * z) * pp * pp);
    w[i] = wi;
    w[n - 1 - i] = wi;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
}

// Eigen-decomposition of a symmetric tridiagonal matrix by QL with implicit
// shifts; returns eigenvalues in d and the first row of the eigenvector
// matrix in z (enough to recover Gauss weights).
void tridiag_eigen_first_row(std::vector<double>& d, std::vector<double>& e,
                             std::vector<double>& z) {
  const int n = static_cast<int>(d.size());
  z.assign(n, 0.0);
  z[0] = 1.0;
  if (n == 1) return;
  e.resize(n, 0.0);
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= 1e-16 * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw SolverFailure("tridiagonal eigensolver failed to converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        for (int i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          f = z[i + 1];
          z[i + 1] = s * z[i] + c * f;
          z[i] = c * z[i] - s * f;
        }
        if (r == 0.0 && m - 1 >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

// Gauss rule with n nodes for a symmetric positive weight on (-1, 1):
// recurrence coefficients by the discretized Stieltjes procedure, then the
// Jacobi-matrix eigenproblem.
template <class W>
void gauss_for_weight(W&& weight, int n, std::vector<double>& nodes, std::vector<double>& wts) {
  const int naux = std::max(320, 8 * n);
  std::vector<double> xa, wa;
  gauss_legendre(naux, xa, wa);
  std::vector<double> va(naux);
  for (int i = 0; i < naux; ++i) va[i] = weight(xa[i]) * wa[i];

  std::vector<double> beta(n, 0.0);
  std::vector<double> p_km1(naux, 0.0), p_k(naux, 1.0);
  long double nrm = 0.0L;
  for (int i = 0; i < naux; ++i) nrm += va[i];
  beta[0] = static_cast<double>(nrm);
  double bprev = 0.0;
  for (int k = 0; k + 1 < n; ++k) {
    std::vector<double> p_kp1(naux);
    for (int i = 0; i < naux; ++i) p_kp1[i] = xa[i] * p_k[i] - bprev * p_km1[i];
    long double nrm1 = 0.0L;
    for (int i = 0; i < naux; ++i) nrm1 += p_kp1[i] * p_kp1[i] * va[i];
    bprev = static_cast<double>(nrm1 / nrm);
    beta[k + 1] = bprev;
    p_km1.swap(p_k);
    p_k.swap(p_kp1);
    nrm = nrm1;
  }

  std::vector<double> d(n, 0.0), e(n, 0.0), z;
  for (int k = 1; k < n; ++k) e[k - 1] = std::sqrt(beta[k]);
  tridiag_eigen_first_row(d, e, z);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
  nodes.resize(n);
  wts.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = d[order[i]];
    wts[i] = beta[0] * z[order[i]] * z[order[i]];
  }
  // The weight is even, so the exact rule is symmetric; pin that down.
  for (int i = 0; i < n / 2; ++i) {
    const double xm = 0.5 * (nodes[n - 1 - i] - nodes[i]);
    nodes[i] = -xm;
    nodes[n - 1 - i] = xm;
    const double wm = 0.5 * (wts[i] + wts[n - 1 - i]);
    wts[i] = wts[n - 1 - i] = wm;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

struct PolarRule {
  std::vector<double> mu, w;
};

// Positive rule exact on {mu^k : k <= D} and {sqrt(1-mu^2) mu^k : k <= D-1}
// over (-1, 1).  In theta this span is the trigonometric polynomials of
// degree <= D against weight sin(theta); the half-angle map
// x = sin((theta - pi/2)/2) / sin(pi/4) carries it to an algebraic Gauss
// problem for the weight sqrt(2)(1-x^2)/sqrt(1-x^2/2).
PolarRule build_polar_rule(int D) {
  const int n = D + 1;
  std::vector<double> x, lam;
  gauss_for_weight(
      [](double t) { return std::sqrt(2.0) * (1.0 - t * t) / std::sqrt(1.0 - 0.5 * t * t); }, n, x,
      lam);
  PolarRule rule;
  rule.mu.resize(n);
  rule.w = lam;
  for (int i = 0; i < n; ++i) rule.mu[i] = x[i] * std::sqrt(2.0 - x[i] * x[i]);
  for (int i = 0; i < n / 2; ++i) rule.mu[i] = -rule.mu[n - 1 - i];
  if (n % 2 == 1) rule.mu[n / 2] = 0.0;
  return rule;
}

struct AzimRule {
  std::vector<double> phi, w;  // base quadrant (0, pi/2)
};

// Positive rule exact on trigonometric polynomials of degree <= D over
// (0, pi/2), by the same half-angle map with quarter-period opening.
AzimRule build_azim_rule(int D) {
  const int n = D + 1;
  const double s8 = std::sin(kPi / 8.0);
  std::vector<double> x, lam;
  gauss_for_weight([s8](double t) { return 2.0 * s8 / std::sqrt(1.0 - s8 * s8 * t * t); }, n, x,
                   lam);
  AzimRule rule;
  rule.phi.resize(n);
  rule.w = lam;
  for (int j = 0; j < n; ++j) rule.phi[j] = 0.25 * kPi + 2.0 * std::asin(s8 * x[j]);
  return rule;
}

void verify_rules(int D, const PolarRule& polar, const AzimRule& azim) {
  for (double w : polar.w)
    if (!(w > 0.0)) throw InvariantViolation("nonpositive polar quadrature weight");
  for (double w : azim.w)
    if (!(w > 0.0)) throw InvariantViolation("nonpositive azimuth quadrature weight");
  for (double m : polar.mu)
    if (!(std::fabs(m) < 1.0)) throw InvariantViolation("polar node off the open interval");
  for (double p : azim.phi)
    if (!(p > 0.0 && p < 0.5 * kPi)) throw InvariantViolation("azimuth node on a quadrant seam");

  double err = 0.0;
  for (int k = 0; k <= D; ++k) {
    long double accp = 0.0L, accs = 0.0L;
    for (std::size_t i = 0; i < polar.mu.size(); ++i) {
      const double t = std::cos(k * std::acos(std::clamp(polar.mu[i], -1.0, 1.0)));
      accp += polar.w[i] * t;
      if (k < D) accs += polar.w[i] * std::sqrt(1.0 - polar.mu[i] * polar.mu[i]) * t;
    }
    const double refp = (k % 2 == 0) ? 2.0 / (1.0 - double(k) * k) : 0.0;
    const double refs = (k == 0) ? kPi / 2.0 : ((k == 2) ? -kPi / 4.0 : 0.0);
    err = std::max(err, std::fabs(static_cast<double>(accp) - refp));
    if (k < D) err = std::max(err, std::fabs(static_cast<double>(accs) - refs));
  }
  for (int k = 0; k <= D; ++k) {
    long double accc = 0.0L, accs = 0.0L;
    for (std::size_t j = 0; j < azim.phi.size(); ++j) {
      accc += azim.w[j] * std::cos(k * azim.phi[j]);
      accs += azim.w[j] * std::sin(k * azim.phi[j]);
    }
    const double refc = (k == 0) ? kPi / 2.0 : std::sin(k * kPi / 2.0) / k;
    const double refs = (k == 0) ? 0.0 : (1.0 - std::cos(k * kPi / 2.0)) / k;
    err = std::max(err, std::fabs(static_cast<double>(accc) - refc));
    err = std::max(err, std::fabs(static_cast<double>(accs) - refs));
  }
  if (err > 1e-13) throw InvariantViolation("quadrature moment residual too large");
}

}  // namespace

BasisIndex unflat_index(int k) {
  int l = static_cast<int>(std::floor(std::sqrt(static_cast<double>(k))));
  while (l > 0 && l * l > k) --l;
  while ((l + 1) * (l + 1) <= k) ++l;
  return BasisIndex{l, k - l * (l + 1)};
}

double eval_harmonic(int l, int m, const Direction& dir) {
  if (l < 0 || std::abs(m) > l) throw ConfigError("harmonic index out of range");
  const int ma = std::abs(m);
  const double mu = dir.zeta;
  const double plm = assoc_legendre(l, ma, mu);
  const double norm = norm_constant(l, ma);
  if (m == 0) return norm * plm;
  const double phi = std::atan2(dir.eta, dir.xi);
  return norm * plm * ((m > 0) ? std::cos(ma * phi) : std::sin(ma * phi));
}

FilterKind parse_filter_kind(const std::string& name) {
  if (name == "none") return FilterKind::none;
  if (name == "sspline") return FilterKind::sspline;
  if (name == "lanczos") return FilterKind::lanczos;
  throw ConfigError("unknown filter kind: " + name);
}

std::string filter_kind_name(FilterKind kind) {
  switch (kind) {
    case FilterKind::none: return "none";
    case FilterKind::sspline: return "sspline";
    case FilterKind::lanczos: return "lanczos";
  }
  return "none";
}

double filter_log_factor(FilterKind kind, double lambda) {
  if (lambda <= 0.0) return 0.0;
  switch (kind) {
    case FilterKind::none:
      return 0.0;
    case FilterKind::sspline:
      return std::log1p(lambda * lambda * lambda * lambda);
    case FilterKind::lanczos:
      return -std::log(std::sin(lambda) / lambda);
  }
  return 0.0;
}

Direction SphereQuadrature::direction(std::size_t q) const {
  const std::size_t np = phi.size();
  const std::size_t ip = q / np, jp = q % np;
  const double s = std::sqrt(std::max(0.0, 1.0 - mu[ip] * mu[ip]));
  return Direction{s * std::cos(phi[jp]), s * std::sin(phi[jp]), mu[ip]};
}

double SphereQuadrature::weight(std::size_t q) const {
  const std::size_t np = phi.size();
  return wmu[q / np] * wphi[q % np];
}

int SphereQuadrature::quadrant(std::size_t q) const { return phi_quadrant[q % phi.size()]; }

bool region_contains_quadrant(AngularRegion region, int quadrant) {
  switch (region) {
    case AngularRegion::full: return true;
    case AngularRegion::xi_pos: return quadrant == 0 || quadrant == 3;
    case AngularRegion::xi_neg: return quadrant == 1 || quadrant == 2;
    case AngularRegion::eta_pos: return quadrant == 0 || quadrant == 1;
    case AngularRegion::eta_neg: return quadrant == 2 || quadrant == 3;
    case AngularRegion::q1: return quadrant == 0;
    case AngularRegion::q2: return quadrant == 1;
    case AngularRegion::q3: return quadrant == 2;
    case AngularRegion::q4: return quadrant == 3;
  }
  return false;
}

SphereQuadrature build_quadrature(int N) {
  if (N < 0) throw ConfigError("negative spherical-harmonics order");
  const int D = 2 * N + 3;
  const PolarRule polar = build_polar_rule(D);
  const AzimRule azim = build_azim_rule(D);
  verify_rules(D, polar, azim);

  SphereQuadrature quad;
  quad.order = N;
  quad.n_polar = static_cast<int>(polar.mu.size());
  quad.n_azim = static_cast<int>(azim.phi.size());
  quad.mu = polar.mu;
  quad.wmu = polar.w;
  quad.phi.reserve(4 * azim.phi.size());
  quad.wphi.reserve(4 * azim.phi.size());
  quad.phi_quadrant.reserve(4 * azim.phi.size());
  for (int q = 0; q < 4; ++q) {
    for (std::size_t j = 0; j < azim.phi.size(); ++j) {
      const double p = azim.phi[j];
      double mapped = p;
      if (q == 1) mapped = kPi - p;
      if (q == 2) mapped = kPi + p;
      if (q == 3) mapped = 2.0 * kPi - p;
      quad.phi.push_back(mapped);
      quad.wphi.push_back(azim.w[j]);
      quad.phi_quadrant.push_back(q);
    }
  }
  return quad;
}

std::vector<double> PackedBlock::dense(const std::vector<double>& values) const {
  std::vector<double> out(static_cast<std::size_t>(rows) * cols, 0.0);
  for (int r = 0; r < rows; ++r)
    for (int e = rptr[r]; e < rptr[r + 1]; ++e)
      out[static_cast<std::size_t>(r) * cols + cidx[e]] = values[e];
  return out;
}

namespace {

struct PairTables {
  // Separable factors: polar pair sums against s and s^2 in flat (a, b)
  // layout, azimuthal half-range pair sums in (ma + N, mb + N) layout.
  // Half-range azimuth sums come from base-quadrant sums times exact signs,
  // so the reflection relations between halves hold at bit level.
  int K = 0;
  int M = 0;  // 2N + 1
  std::vector<double> s1, s2;
  std::vector<double> cx_pos, cx_neg;
  std::vector<double> cxx_pos, cxx_neg;
  std::vector<double> sy_pos, sy_neg;
  std::vector<double> syy_pos, syy_neg;
};

PairTables build_pair_tables(int N, const SphereQuadrature& quad) {
  const int K = basis_size(N);
  const int M = 2 * N + 1;
  const std::size_t np = quad.mu.size();
  const std::size_t nb = static_cast<std::size_t>(quad.n_azim);  // base quadrant nodes

  std::vector<double> polar(static_cast<std::size_t>(K) * np);
  for (int k = 0; k < K; ++k) {
    const BasisIndex b = unflat_index(k);
    const int ma = std::abs(b.m);
    const double norm = norm_constant(b.l, ma);
    for (std::size_t i = 0; i < np; ++i)
      polar[k * np + i] = norm * assoc_legendre(b.l, ma, quad.mu[i]);
  }

  // Azimuth factors at base-quadrant nodes, one row per m = -N..N.
  std::vector<double> azv(static_cast<std::size_t>(M) * nb);
  for (int m = -N; m <= N; ++m)
    for (std::size_t j = 0; j < nb; ++j) {
      const double p = quad.phi[j];
      azv[(m + N) * nb + j] = (m >= 0) ? std::cos(m * p) : std::sin(-m * p);
    }

  std::vector<double> s(np), s2v(np);
  for (std::size_t i = 0; i < np; ++i) {
    s[i] = std::sqrt(std::max(0.0, 1.0 - quad.mu[i] * quad.mu[i]));
    s2v[i] = 1.0 - quad.mu[i] * quad.mu[i];
  }

  PairTables t;
  t.K = K;
  t.M = M;
  t.s1.assign(static_cast<std::size_t>(K) * K, 0.0);
  t.s2.assign(static_cast<std::size_t>(K) * K, 0.0);
  for (int a = 0; a < K; ++a)
    for (int b = a; b < K; ++b) {
      long double acc1 = 0.0L, acc2 = 0.0L;
      for (std::size_t i = 0; i < np; ++i) {
        const long double pp = static_cast<long double>(polar[a * np + i]) * polar[b * np + i] *
                               quad.wmu[i];
        acc1 += pp * s[i];
        acc2 += pp * s2v[i];
      }
      t.s1[a * K + b] = t.s1[b * K + a] = static_cast<double>(acc1);
      t.s2[a * K + b] = t.s2[b * K + a] = static_cast<double>(acc2);
    }

  const std::size_t MM = static_cast<std::size_t>(M) * M;
  t.cx_pos.assign(MM, 0.0);
  t.cx_neg.assign(MM, 0.0);
  t.cxx_pos.assign(MM, 0.0);
  t.cxx_neg.assign(MM, 0.0);
  t.sy_pos.assign(MM, 0.0);
  t.sy_neg.assign(MM, 0.0);
  t.syy_pos.assign(MM, 0.0);
  t.syy_neg.assign(MM, 0.0);

  // Per-branch reflection signs: px under phi -> pi - phi, py under phi -> -phi.
  auto px = [](int m) { return (m >= 0) ? ((m % 2 == 0) ? 1.0 : -1.0) : ((m % 2 == 0) ? -1.0 : 1.0); };
  auto py = [](int m) { return (m >= 0) ? 1.0 : -1.0; };

  for (int ma = -N; ma <= N; ++ma)
    for (int mb = ma; mb <= N; ++mb) {
      long double bc = 0.0L, bcc = 0.0L, bs = 0.0L, bss = 0.0L;
      for (std::size_t j = 0; j < nb; ++j) {
        const long double tt = static_cast<long double>(azv[(ma + N) * nb + j]) *
                               azv[(mb + N) * nb + j] * quad.wphi[j];
        const double c = std::cos(quad.phi[j]);
        const double sn = std::sin(quad.phi[j]);
        bc += tt * c;
        bcc += tt * c * c;
        bs += tt * sn;
        bss += tt * sn * sn;
      }
      const double pxa = px(ma) * px(mb);
      const double pya = py(ma) * py(mb);
      // Quadrant sums: q1 = base, q2 = (px signs, -cos, +sin),
      // q3 = (px*py signs, -cos, -sin), q4 = (py signs, +cos, -sin).
      const double cxp = static_cast<double>(bc) * (1.0 + pya);
      const double cxxp = static_cast<double>(bcc) * (1.0 + pya);
      const double syp = static_cast<double>(bs) * (1.0 + pxa);
      const double syyp = static_cast<double>(bss) * (1.0 + pxa);
      const std::size_t e1 = static_cast<std::size_t>(ma + N) * M + (mb + N);
      const std::size_t e2 = static_cast<std::size_t>(mb + N) * M + (ma + N);
      t.cx_pos[e1] = t.cx_pos[e2] = cxp;
      t.cx_neg[e1] = t.cx_neg[e2] = -pxa * cxp;
      t.cxx_pos[e1] = t.cxx_pos[e2] = cxxp;
      t.cxx_neg[e1] = t.cxx_neg[e2] = pxa * cxxp;
      t.sy_pos[e1] = t.sy_pos[e2] = syp;
      t.sy_neg[e1] = t.sy_neg[e2] = -pya * syp;
      t.syy_pos[e1] = t.syy_pos[e2] = syyp;
      t.syy_neg[e1] = t.syy_neg[e2] = pya * syyp;
    }
  return t;
}

PackedBlock pack_micro(int K, const std::vector<double>& p_m1, const std::vector<double>& n_m1,
                       const std::vector<double>& p_m2, const std::vector<double>& n_m2) {
  PackedBlock blk;
  blk.rows = K - 1;
  blk.cols = K;
  double scale = 0.0;
  for (int r = 1; r < K; ++r)
    for (int c = 0; c < K; ++c) {
      const std::size_t e = static_cast<std::size_t>(r) * K + c;
      scale = std::max({scale, std::fabs(p_m1[e]), std::fabs(n_m1[e]), std::fabs(p_m2[e]),
                        std::fabs(n_m2[e])});
    }
  const double cut = 1e-13 * scale;
  blk.rptr.reserve(K);
  blk.rptr.push_back(0);
  for (int r = 1; r < K; ++r) {
    for (int c = 0; c < K; ++c) {
      const std::size_t e = static_cast<std::size_t>(r) * K + c;
      const double mag = std::max({std::fabs(p_m1[e]), std::fabs(n_m1[e]), std::fabs(p_m2[e]),
                                   std::fabs(n_m2[e])});
      if (mag > cut) {
        blk.cidx.push_back(c);
        blk.m1_pos.push_back(p_m1[e]);
        blk.m1_neg.push_back(n_m1[e]);
        blk.m2_pos.push_back(p_m2[e]);
        blk.m2_neg.push_back(n_m2[e]);
      }
    }
    blk.rptr.push_back(static_cast<int>(blk.cidx.size()));
  }
  return blk;
}

}  // namespace

AngularTables build_tables(int N, FilterKind filter) {
  AngularTables tab;
  tab.N = N;
  tab.K = basis_size(N);
  tab.filter = filter;
  tab.quad = build_quadrature(N);
  const int K = tab.K;
  const PairTables pt = build_pair_tables(N, tab.quad);

  // Full K x K products for each direction/half/power, assembled from the
  // separable factors; row 0 (against psi_0^0) provides the macro vectors.
  const double inv_psi00 = 2.0 * std::sqrt(kPi);  // 1 / psi_0^0
  const int M = pt.M;
  std::vector<BasisIndex> idx(K);
  for (int k = 0; k < K; ++k) idx[k] = unflat_index(k);
  std::vector<double> xp1(K * K), xn1(K * K), xp2(K * K), xn2(K * K);
  std::vector<double> yp1(K * K), yn1(K * K), yp2(K * K), yn2(K * K);
  for (int a = 0; a < K; ++a)
    for (int b = 0; b < K; ++b) {
      const std::size_t e = static_cast<std::size_t>(a) * K + b;
      const std::size_t em = static_cast<std::size_t>(idx[a].m + N) * M + (idx[b].m + N);
      xp1[e] = pt.s1[e] * pt.cx_pos[em];
      xn1[e] = pt.s1[e] * pt.cx_neg[em];
      xp2[e] = pt.s2[e] * pt.cxx_pos[em];
      xn2[e] = pt.s2[e] * pt.cxx_neg[em];
      yp1[e] = pt.s1[e] * pt.sy_pos[em];
      yn1[e] = pt.s1[e] * pt.sy_neg[em];
      yp2[e] = pt.s2[e] * pt.syy_pos[em];
      yn2[e] = pt.s2[e] * pt.syy_neg[em];
    }

  auto row0 = [&](const std::vector<double>& full) {
    std::vector<double> v(K);
    for (int b = 0; b < K; ++b) v[b] = inv_psi00 * full[b];  // row a = 0
    return v;
  };
  tab.xi_pos_m1 = row0(xp1);
  tab.xi_neg_m1 = row0(xn1);
  tab.xi_pos_m2 = row0(xp2);
  tab.xi_neg_m2 = row0(xn2);
  tab.eta_pos_m1 = row0(yp1);
  tab.eta_neg_m1 = row0(yn1);
  tab.eta_pos_m2 = row0(yp2);
  tab.eta_neg_m2 = row0(yn2);

  tab.micro_x = pack_micro(K, xp1, xn1, xp2, xn2);
  tab.micro_y = pack_micro(K, yp1, yn1, yp2, yn2);

  tab.xi_micro_m1.resize(K - 1);
  tab.xi_micro_m2.resize(K - 1);
  tab.eta_micro_m1.resize(K - 1);
  tab.eta_micro_m2.resize(K - 1);
  for (int a = 1; a < K; ++a) {
    tab.xi_micro_m1[a - 1] = inv_psi00 * (xp1[a * K] + xn1[a * K]);
    tab.xi_micro_m2[a - 1] = inv_psi00 * (xp2[a * K] + xn2[a * K]);
    tab.eta_micro_m1[a - 1] = inv_psi00 * (yp1[a * K] + yn1[a * K]);
    tab.eta_micro_m2[a - 1] = inv_psi00 * (yp2[a * K] + yn2[a * K]);
  }

  tab.filter_diagonal.resize(K);
  tab.parity_x.resize(K);
  tab.parity_y.resize(K);
  tab.parity_z.resize(K);
  for (int k = 0; k < K; ++k) {
    const BasisIndex b = unflat_index(k);
    tab.filter_diagonal[k] = filter_log_factor(filter, static_cast<double>(b.l) / (N + 1));
    const int ma = std::abs(b.m);
    tab.parity_x[k] = (b.m >= 0) ? ((ma % 2 == 0) ? 1.0 : -1.0) : ((ma % 2 == 0) ? -1.0 : 1.0);
    tab.parity_y[k] = (b.m >= 0) ? 1.0 : -1.0;
    tab.parity_z[k] = ((b.l + ma) % 2 == 0) ? 1.0 : -1.0;
  }
  return tab;
}

namespace {

constexpr char kTableMagic[8] = {'P', 'P', 'F', 'N', 'T', 'A', 'B', '1'};

void write_vec_d(std::ofstream& out, const std::vector<double>& v) {
  const std::uint64_t n = v.size();
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
}

void write_vec_i(std::ofstream& out, const std::vector<int>& v) {
  const std::uint64_t n = v.size();
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(n * sizeof(int)));
}

std::vector<double> read_vec_d(std::ifstream& in) {
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  return v;
}

std::vector<int> read_vec_i(std::ifstream& in) {
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  std::vector<int> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(int)));
  return v;
}

void write_block(std::ofstream& out, const PackedBlock& b) {
  out.write(reinterpret_cast<const char*>(&b.rows), sizeof b.rows);
  out.write(reinterpret_cast<const char*>(&b.cols), sizeof b.cols);
  write_vec_i(out, b.rptr);
  write_vec_i(out, b.cidx);
  write_vec_d(out, b.m1_pos);
  write_vec_d(out, b.m1_neg);
  write_vec_d(out, b.m2_pos);
  write_vec_d(out, b.m2_neg);
}

PackedBlock read_block(std::ifstream& in) {
  PackedBlock b;
  in.read(reinterpret_cast<char*>(&b.rows), sizeof b.rows);
  in.read(reinterpret_cast<char*>(&b.cols), sizeof b.cols);
  b.rptr = read_vec_i(in);
  b.cidx = read_vec_i(in);
  b.m1_pos = read_vec_d(in);
  b.m1_neg = read_vec_d(in);
  b.m2_pos = read_vec_d(in);
  b.m2_neg = read_vec_d(in);
  return b;
}

}  // namespace

void dump_tables(const AngularTables& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open table cache for writing: " + path);
  out.write(kTableMagic, sizeof kTableMagic);
  const std::int32_t n = t.N, k = t.K, f = static_cast<std::int32_t>(t.filter);
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&k), sizeof k);
  out.write(reinterpret_cast<const char*>(&f), sizeof f);
  const std::int32_t npol = t.quad.n_polar, nazi = t.quad.n_azim, ord = t.quad.order;
  out.write(reinterpret_cast<const char*>(&ord), sizeof ord);
  out.write(reinterpret_cast<const char*>(&npol), sizeof npol);
  out.write(reinterpret_cast<const char*>(&nazi), sizeof nazi);
  write_vec_d(out, t.quad.mu);
  write_vec_d(out, t.quad.wmu);
  write_vec_d(out, t.quad.phi);
  write_vec_d(out, t.quad.wphi);
  write_vec_i(out, t.quad.phi_quadrant);
  for (const auto* v :
       {&t.xi_pos_m1, &t.xi_neg_m1, &t.xi_pos_m2, &t.xi_neg_m2, &t.eta_pos_m1, &t.eta_neg_m1,
        &t.eta_pos_m2, &t.eta_neg_m2, &t.xi_micro_m1, &t.xi_micro_m2, &t.eta_micro_m1,
        &t.eta_micro_m2, &t.filter_diagonal, &t.parity_x, &t.parity_y, &t.parity_z})
    write_vec_d(out, *v);
  write_block(out, t.micro_x);
  write_block(out, t.micro_y);
  if (!out) throw ConfigError("write failure on table cache: " + path);
}

AngularTables load_tables(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open table cache: " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (std::memcmp(magic, kTableMagic, sizeof magic) != 0)
    throw ConfigError("bad table cache header: " + path);
  AngularTables t;
  std::int32_t n, k, f, ord, npol, nazi;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(&k), sizeof k);
  in.read(reinterpret_cast<char*>(&f), sizeof f);
  in.read(reinterpret_cast<char*>(&ord), sizeof ord);
  in.read(reinterpret_cast<char*>(&npol), sizeof npol);
  in.read(reinterpret_cast<char*>(&nazi), sizeof nazi);
  t.N = n;
  t.K = k;
  t.filter = static_cast<FilterKind>(f);
  t.quad.order = ord;
  t.quad.n_polar = npol;
  t.quad.n_azim = nazi;
  t.quad.mu = read_vec_d(in);
  t.quad.wmu = read_vec_d(in);
  t.quad.phi = read_vec_d(in);
  t.quad.wphi = read_vec_d(in);
  t.quad.phi_quadrant = read_vec_i(in);
  for (auto* v :
       {&t.xi_pos_m1, &t.xi_neg_m1, &t.xi_pos_m2, &t.xi_neg_m2, &t.eta_pos_m1, &t.eta_neg_m1,
        &t.eta_pos_m2, &t.eta_neg_m2, &t.xi_micro_m1, &t.xi_micro_m2, &t.eta_micro_m1,
        &t.eta_micro_m2, &t.filter_diagonal, &t.parity_x, &t.parity_y, &t.parity_z})
    *v = read_vec_d(in);
  t.micro_x = read_block(in);
  t.micro_y = read_block(in);
  if (!in) throw ConfigError("truncated table cache: " + path);
  return t;
}

}
