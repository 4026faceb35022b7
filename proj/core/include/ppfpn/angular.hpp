#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ppfpn {

// Real orthonormal spherical harmonics psi_l^m on the unit sphere, flat index
// k = l*(l+1) + m with m = -l..l.  m >= 0 selects the cos(m phi) branch,
// m < 0 the sin(|m| phi) branch.  No Condon-Shortley phase.

struct BasisIndex {
  int l = 0;
  int m = 0;
};

constexpr int flat_index(int l, int m) { return l * (l + 1) + m; }
constexpr int basis_size(int N) { return (N + 1) * (N + 1); }
BasisIndex unflat_index(int k);

struct Direction {
  double xi = 0.0;
  double eta = 0.0;
  double zeta = 0.0;
};

// Value of psi_l^m at a unit direction.  Throws ConfigError for |m| > l or l < 0.
double eval_harmonic(int l, int m, const Direction& dir);

enum class FilterKind { none, sspline, lanczos };

struct FilterSpec {
  FilterKind kind = FilterKind::none;
};

FilterKind parse_filter_kind(const std::string& name);
std::string filter_kind_name(FilterKind kind);

// -ln f(lambda) for the chosen filter profile; 0 at lambda = 0.
double filter_log_factor(FilterKind kind, double lambda);

// Product quadrature over the sphere.  Polar nodes in mu = cos(theta) paired
// with four azimuthal panels, one per (xi, eta) sign quadrant; quadrant k
// covers phi in (k*pi/2, (k+1)*pi/2).  The rule integrates every polynomial
// in (xi, eta, zeta) of total degree <= 2N+3 exactly on each quadrant.
// Weights are positive and no node lies on a quadrant seam.
struct SphereQuadrature {
  int order = 0;    // N the rule was built for
  int n_polar = 0;  // polar node count
  int n_azim = 0;   // azimuth node count per quadrant

  std::vector<double> mu, wmu;      // polar nodes / weights
  std::vector<double> phi, wphi;    // azimuth nodes / weights, 4 quadrant blocks
  std::vector<int> phi_quadrant;    // quadrant label 0..3 per azimuth node

  std::size_t size() const { return mu.size() * phi.size(); }
  Direction direction(std::size_t q) const;
  double weight(std::size_t q) const;
  int quadrant(std::size_t q) const;  // quadrant of flattened node q
};

SphereQuadrature build_quadrature(int N);

enum class AngularRegion { full, xi_pos, xi_neg, eta_pos, eta_neg, q1, q2, q3, q4 };

bool region_contains_quadrant(AngularRegion region, int quadrant);

// Quadrature sum of f(direction) over a region.
template <class F>
double integrate(const SphereQuadrature& quad, AngularRegion region, F&& f) {
  double acc = 0.0;
  const std::size_t n_phi = quad.phi.size();
  for (std::size_t ip = 0; ip < quad.mu.size(); ++ip) {
    const double s = std::sqrt(std::max(0.0, 1.0 - quad.mu[ip] * quad.mu[ip]));
    double row = 0.0;
    for (std::size_t jp = 0; jp < n_phi; ++jp) {
      if (!region_contains_quadrant(region, quad.phi_quadrant[jp])) continue;
      Direction d{s * std::cos(quad.phi[jp]), s * std::sin(quad.phi[jp]), quad.mu[ip]};
      row += quad.wphi[jp] * f(d);
    }
    acc += quad.wmu[ip] * row;
  }
  return acc;
}

// Half-range moment matrices <w psi_a psi_b> for micro indices a = 1..K-1 and
// full indices b = 0..K-1, stored packed on a sparsity pattern shared by the
// four value arrays of one spatial direction (w in {xi, xi^2} or {eta, eta^2},
// positive and negative half each).
struct PackedBlock {
  int rows = 0;
  int cols = 0;
  std::vector<int> rptr;           // rows + 1 offsets
  std::vector<int> cidx;           // column indices
  std::vector<double> m1_pos;      // <w   psi_a psi_b>, w-positive half
  std::vector<double> m1_neg;      // <w   psi_a psi_b>, w-negative half
  std::vector<double> m2_pos;      // <w^2 psi_a psi_b>, w-positive half
  std::vector<double> m2_neg;      // <w^2 psi_a psi_b>, w-negative half

  std::vector<double> dense(const std::vector<double>& values) const;
};

struct AngularTables {
  int N = 0;
  int K = 0;  // (N+1)^2
  FilterKind filter = FilterKind::none;
  SphereQuadrature quad;

  // Macro flux vectors over the full basis, length K.
  std::vector<double> xi_pos_m1, xi_neg_m1;    // <xi  psi>, xi > 0 / xi < 0
  std::vector<double> xi_pos_m2, xi_neg_m2;    // <xi^2 psi>
  std::vector<double> eta_pos_m1, eta_neg_m1;  // <eta  psi>
  std::vector<double> eta_pos_m2, eta_neg_m2;  // <eta^2 psi>

  // Micro flux matrices, rows = micro components 1..K-1.
  PackedBlock micro_x, micro_y;

  // Full-sphere micro vectors, length K-1 (component 0 excluded).
  std::vector<double> xi_micro_m1, xi_micro_m2;
  std::vector<double> eta_micro_m1, eta_micro_m2;

  // Unscaled filter diagonal -ln f(l/(N+1)) per flat component; entry 0 is 0.
  std::vector<double> filter_diagonal;

  // Reflection signs per component under xi -> -xi, eta -> -eta, zeta -> -zeta.
  std::vector<double> parity_x, parity_y, parity_z;
};

// Builds quadrature and all moment tables for order N; immutable afterwards.
AngularTables build_tables(int N, FilterKind filter);

// Binary cache of a table set; reload reproduces every array bit-identically.
void dump_tables(const AngularTables& tables, const std::string& path);
AngularTables load_tables(const std::string& path);

}
