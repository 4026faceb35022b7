#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <vector>

#include "ppfpn/angular.hpp"
#include "ppfpn/errors.hpp"

using namespace ppfpn;

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// Closed-form moment of xi^a eta^b zeta^c over the first quadrant
// (xi > 0, eta > 0), from Beta-function integrals.
double quadrant_monomial_moment(int a, int b, int c) {
  if (c % 2 == 1) return 0.0;
  const double azim =
      std::exp(std::lgamma(0.5 * (a + 1)) + std::lgamma(0.5 * (b + 1)) -
               std::lgamma(0.5 * (a + b) + 1.0)) /
      2.0;
  const double polar = std::exp(std::lgamma(0.5 * (c + 1)) + std::lgamma(0.5 * (a + b) + 1.0) -
                                std::lgamma(0.5 * (c + 1) + 0.5 * (a + b) + 1.0));
  return azim * polar;
}

double monomial(const Direction& d, int a, int b, int c) {
  return std::pow(d.xi, a) * std::pow(d.eta, b) * std::pow(d.zeta, c);
}

}  // namespace

TEST_CASE("flat index round trip") {
  for (int l = 0; l <= 15; ++l)
    for (int m = -l; m <= l; ++m) {
      const int k = flat_index(l, m);
      const BasisIndex b = unflat_index(k);
      CHECK(b.l == l);
      CHECK(b.m == m);
    }
  CHECK(basis_size(3) == 16);
  CHECK(basis_size(11) == 144);
}

TEST_CASE("quadrature weights positive and on-seam free") {
  for (int N : {0, 1, 2, 3, 5, 7, 11}) {
    const SphereQuadrature q = build_quadrature(N);
    for (double w : q.wmu) CHECK(w > 0.0);
    for (double w : q.wphi) CHECK(w > 0.0);
    for (double p : q.phi) {
      const double r = std::fmod(p, 0.5 * kPi);
      CHECK(std::min(r, 0.5 * kPi - r) > 1e-6);
    }
    for (double m : q.mu) CHECK(std::fabs(m) < 1.0);
  }
}

TEST_CASE("quadrature exact on quadrant monomials") {
  const int N = 2;
  const SphereQuadrature q = build_quadrature(N);
  const int D = 2 * N + 3;
  for (int a = 0; a <= D; ++a)
    for (int b = 0; a + b <= D; ++b)
      for (int c = 0; a + b + c <= D; ++c) {
        const double ref = quadrant_monomial_moment(a, b, c);
        const double got1 =
            integrate(q, AngularRegion::q1, [&](const Direction& d) { return monomial(d, a, b, c); });
        const double got2 =
            integrate(q, AngularRegion::q2, [&](const Direction& d) { return monomial(d, a, b, c); });
        const double got3 =
            integrate(q, AngularRegion::q3, [&](const Direction& d) { return monomial(d, a, b, c); });
        const double got4 =
            integrate(q, AngularRegion::q4, [&](const Direction& d) { return monomial(d, a, b, c); });
        const double sa = (a % 2 == 0) ? 1.0 : -1.0;
        const double sb = (b % 2 == 0) ? 1.0 : -1.0;
        CHECK(std::fabs(got1 - ref) < 1e-12 * std::max(1.0, std::fabs(ref)));
        CHECK(std::fabs(got2 - sa * ref) < 1e-12 * std::max(1.0, std::fabs(ref)));
        CHECK(std::fabs(got3 - sa * sb * ref) < 1e-12 * std::max(1.0, std::fabs(ref)));
        CHECK(std::fabs(got4 - sb * ref) < 1e-12 * std::max(1.0, std::fabs(ref)));
      }
}

TEST_CASE("basic solid angle moments") {
  const SphereQuadrature q = build_quadrature(3);
  const double full = integrate(q, AngularRegion::full, [](const Direction&) { return 1.0; });
  CHECK(std::fabs(full - 4.0 * kPi) < 1e-12);
  const double half_flux =
      integrate(q, AngularRegion::xi_pos, [](const Direction& d) { return d.xi; });
  CHECK(std::fabs(half_flux - kPi) < 1e-12);
  const double q1_xy = integrate(q, AngularRegion::q1, [](const Direction& d) { return d.xi * d.eta; });
  CHECK(std::fabs(q1_xy - 2.0 / 3.0) < 1e-12);
}

TEST_CASE("harmonics are orthonormal under the rule") {
  const int N = 5;
  const SphereQuadrature q = build_quadrature(N);
  const int K = basis_size(N);
  for (int ka = 0; ka < K; ++ka)
    for (int kb = ka; kb < K; ++kb) {
      const BasisIndex a = unflat_index(ka), b = unflat_index(kb);
      const double g = integrate(q, AngularRegion::full, [&](const Direction& d) {
        return eval_harmonic(a.l, a.m, d) * eval_harmonic(b.l, b.m, d);
      });
      const double want = (ka == kb) ? 1.0 : 0.0;
      CHECK(std::fabs(g - want) < 1e-12);
    }
}

TEST_CASE("low order harmonics match explicit forms") {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    double x = u(rng), y = u(rng), z = u(rng);
    const double r = std::sqrt(x * x + y * y + z * z);
    if (r < 1e-3) continue;
    Direction d{x / r, y / r, z / r};
    CHECK(eval_harmonic(0, 0, d) == doctest::Approx(0.5 / std::sqrt(kPi)).epsilon(1e-13));
    CHECK(eval_harmonic(1, 0, d) == doctest::Approx(std::sqrt(3.0 / (4.0 * kPi)) * d.zeta).epsilon(1e-13));
    CHECK(eval_harmonic(1, 1, d) == doctest::Approx(std::sqrt(3.0 / (4.0 * kPi)) * d.xi).epsilon(1e-13));
    CHECK(eval_harmonic(1, -1, d) == doctest::Approx(std::sqrt(3.0 / (4.0 * kPi)) * d.eta).epsilon(1e-13));
    CHECK(eval_harmonic(2, 0, d) ==
          doctest::Approx(std::sqrt(5.0 / (16.0 * kPi)) * (3.0 * d.zeta * d.zeta - 1.0)).epsilon(1e-12));
    CHECK(eval_harmonic(2, 2, d) ==
          doctest::Approx(std::sqrt(15.0 / (16.0 * kPi)) * (d.xi * d.xi - d.eta * d.eta)).epsilon(1e-12));
    CHECK(eval_harmonic(2, -2, d) ==
          doctest::Approx(std::sqrt(15.0 / (4.0 * kPi)) * d.xi * d.eta).epsilon(1e-12));
  }
  CHECK_THROWS_AS(eval_harmonic(1, 2, Direction{0, 0, 1}), ConfigError);
  CHECK_THROWS_AS(eval_harmonic(-1, 0, Direction{0, 0, 1}), ConfigError);
}

TEST_CASE("parity vectors match direct evaluation") {
  const AngularTables t = build_tables(4, FilterKind::none);
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    double x = u(rng), y = u(rng), z = u(rng);
    const double r = std::sqrt(x * x + y * y + z * z);
    if (r < 1e-3) continue;
    Direction d{x / r, y / r, z / r};
    for (int k = 0; k < t.K; ++k) {
      const BasisIndex b = unflat_index(k);
      const double v = eval_harmonic(b.l, b.m, d);
      const double vx = eval_harmonic(b.l, b.m, Direction{-d.xi, d.eta, d.zeta});
      const double vy = eval_harmonic(b.l, b.m, Direction{d.xi, -d.eta, d.zeta});
      const double vz = eval_harmonic(b.l, b.m, Direction{d.xi, d.eta, -d.zeta});
      CHECK(vx == doctest::Approx(t.parity_x[k] * v).epsilon(1e-12));
      CHECK(vy == doctest::Approx(t.parity_y[k] * v).epsilon(1e-12));
      CHECK(vz == doctest::Approx(t.parity_z[k] * v).epsilon(1e-12));
    }
  }
}

TEST_CASE("macro half vectors carry the frozen transport moments") {
  const AngularTables t = build_tables(3, FilterKind::none);
  CHECK(std::fabs(t.xi_pos_m1[0] - std::sqrt(kPi) / 2.0) < 1e-13);
  CHECK(std::fabs(t.xi_neg_m1[0] + std::sqrt(kPi) / 2.0) < 1e-13);
  CHECK(std::fabs(t.eta_pos_m1[0] - std::sqrt(kPi) / 2.0) < 1e-13);
  CHECK(std::fabs(t.xi_pos_m2[0] + t.xi_neg_m2[0] - 2.0 / 3.0 * std::sqrt(kPi)) < 1e-13);

  const int k11 = flat_index(1, 1);
  const int k1m1 = flat_index(1, -1);
  for (int b = 0; b < t.K; ++b) {
    const double full_x = t.xi_pos_m1[b] + t.xi_neg_m1[b];
    const double full_y = t.eta_pos_m1[b] + t.eta_neg_m1[b];
    CHECK(std::fabs(full_x - (b == k11 ? std::sqrt(4.0 * kPi / 3.0) : 0.0)) < 1e-13);
    CHECK(std::fabs(full_y - (b == k1m1 ? std::sqrt(4.0 * kPi / 3.0) : 0.0)) < 1e-13);
  }
}

TEST_CASE("macro half vectors match direct integrals") {
  const int N = 4;
  const AngularTables t = build_tables(N, FilterKind::none);
  for (int b = 0; b < t.K; ++b) {
    const BasisIndex i = unflat_index(b);
    auto psi = [&](const Direction& d) { return eval_harmonic(i.l, i.m, d); };
    const double xp1 = integrate(t.quad, AngularRegion::xi_pos,
                                 [&](const Direction& d) { return d.xi * psi(d); });
    const double xn2 = integrate(t.quad, AngularRegion::xi_neg,
                                 [&](const Direction& d) { return d.xi * d.xi * psi(d); });
    const double yp1 = integrate(t.quad, AngularRegion::eta_pos,
                                 [&](const Direction& d) { return d.eta * psi(d); });
    const double yn2 = integrate(t.quad, AngularRegion::eta_neg,
                                 [&](const Direction& d) { return d.eta * d.eta * psi(d); });
    CHECK(std::fabs(t.xi_pos_m1[b] - xp1) < 1e-12);
    CHECK(std::fabs(t.xi_neg_m2[b] - xn2) < 1e-12);
    CHECK(std::fabs(t.eta_pos_m1[b] - yp1) < 1e-12);
    CHECK(std::fabs(t.eta_neg_m2[b] - yn2) < 1e-12);
  }
}

TEST_CASE("packed micro blocks reproduce direct integrals") {
  const int N = 3;
  const AngularTables t = build_tables(N, FilterKind::none);
  const int K = t.K;
  const std::vector<double> dx1p = t.micro_x.dense(t.micro_x.m1_pos);
  const std::vector<double> dx1n = t.micro_x.dense(t.micro_x.m1_neg);
  const std::vector<double> dx2p = t.micro_x.dense(t.micro_x.m2_pos);
  const std::vector<double> dy1p = t.micro_y.dense(t.micro_y.m1_pos);
  const std::vector<double> dy2n = t.micro_y.dense(t.micro_y.m2_neg);
  CHECK(t.micro_x.rows == K - 1);
  CHECK(t.micro_x.cols == K);
  for (int a = 1; a < K; ++a) {
    const BasisIndex ia = unflat_index(a);
    for (int b = 0; b < K; ++b) {
      const BasisIndex ib = unflat_index(b);
      auto pair = [&](const Direction& d) {
        return eval_harmonic(ia.l, ia.m, d) * eval_harmonic(ib.l, ib.m, d);
      };
      const double x1p = integrate(t.quad, AngularRegion::xi_pos,
                                   [&](const Direction& d) { return d.xi * pair(d); });
      const double x1n = integrate(t.quad, AngularRegion::xi_neg,
                                   [&](const Direction& d) { return d.xi * pair(d); });
      const double x2p = integrate(t.quad, AngularRegion::xi_pos,
                                   [&](const Direction& d) { return d.xi * d.xi * pair(d); });
      const double y1p = integrate(t.quad, AngularRegion::eta_pos,
                                   [&](const Direction& d) { return d.eta * pair(d); });
      const double y2n = integrate(t.quad, AngularRegion::eta_neg,
                                   [&](const Direction& d) { return d.eta * d.eta * pair(d); });
      const std::size_t e = static_cast<std::size_t>(a - 1) * K + b;
      CHECK(std::fabs(dx1p[e] - x1p) < 2e-12);
      CHECK(std::fabs(dx1n[e] - x1n) < 2e-12);
      CHECK(std::fabs(dx2p[e] - x2p) < 2e-12);
      CHECK(std::fabs(dy1p[e] - y1p) < 2e-12);
      CHECK(std::fabs(dy2n[e] - y2n) < 2e-12);
    }
  }
}

TEST_CASE("packed pattern is genuinely sparse") {
  const AngularTables t = build_tables(7, FilterKind::none);
  const std::size_t full = static_cast<std::size_t>(t.micro_x.rows) * t.micro_x.cols;
  CHECK(t.micro_x.cidx.size() < full / 2);
  CHECK(t.micro_y.cidx.size() < full / 2);
  for (std::size_t e = 0; e < t.micro_x.cidx.size(); ++e) {
    const double mag = std::max({std::fabs(t.micro_x.m1_pos[e]), std::fabs(t.micro_x.m1_neg[e]),
                                 std::fabs(t.micro_x.m2_pos[e]), std::fabs(t.micro_x.m2_neg[e])});
    CHECK(mag > 0.0);
  }
}

TEST_CASE("micro source vectors expose the first moment couplings") {
  const AngularTables t = build_tables(3, FilterKind::none);
  const int k11 = flat_index(1, 1), k1m1 = flat_index(1, -1);
  for (int a = 1; a < t.K; ++a) {
    const double want_x = (a == k11) ? std::sqrt(4.0 * kPi / 3.0) : 0.0;
    const double want_y = (a == k1m1) ? std::sqrt(4.0 * kPi / 3.0) : 0.0;
    CHECK(std::fabs(t.xi_micro_m1[a - 1] - want_x) < 1e-13);
    CHECK(std::fabs(t.eta_micro_m1[a - 1] - want_y) < 1e-13);
  }
  for (int a = 1; a < t.K; ++a) {
    const BasisIndex ia = unflat_index(a);
    const double ref = integrate(t.quad, AngularRegion::full, [&](const Direction& d) {
      return d.xi * d.xi * eval_harmonic(ia.l, ia.m, d);
    });
    CHECK(std::fabs(t.xi_micro_m2[a - 1] - ref) < 1e-12);
  }
}

TEST_CASE("filter factors") {
  CHECK(filter_log_factor(FilterKind::none, 0.7) == 0.0);
  CHECK(filter_log_factor(FilterKind::sspline, 0.0) == 0.0);
  CHECK(filter_log_factor(FilterKind::lanczos, 0.0) == 0.0);
  CHECK(filter_log_factor(FilterKind::sspline, 0.5) ==
        doctest::Approx(std::log(17.0 / 16.0)).epsilon(1e-14));
  CHECK(filter_log_factor(FilterKind::lanczos, 0.5) ==
        doctest::Approx(-std::log(std::sin(0.5) / 0.5)).epsilon(1e-14));
  double prev_s = 0.0, prev_l = 0.0;
  for (double lam = 0.1; lam < 1.0; lam += 0.1) {
    const double fs = filter_log_factor(FilterKind::sspline, lam);
    const double fl = filter_log_factor(FilterKind::lanczos, lam);
    CHECK(fs > prev_s);
    CHECK(fl > prev_l);
    prev_s = fs;
    prev_l = fl;
  }
  const AngularTables t = build_tables(2, FilterKind::sspline);
  CHECK(t.filter_diagonal[0] == 0.0);
  CHECK(t.filter_diagonal[flat_index(1, 0)] ==
        doctest::Approx(std::log1p(std::pow(1.0 / 3.0, 4))).epsilon(1e-14));
  CHECK(t.filter_diagonal[flat_index(2, 1)] ==
        doctest::Approx(std::log1p(std::pow(2.0 / 3.0, 4))).epsilon(1e-14));
  CHECK(parse_filter_kind("sspline") == FilterKind::sspline);
  CHECK(filter_kind_name(FilterKind::lanczos) == "lanczos");
  CHECK_THROWS_AS(parse_filter_kind("boxcar"), ConfigError);
}

TEST_CASE("table cache round trips bit identically") {
  const AngularTables t = build_tables(5, FilterKind::lanczos);
  const std::string path = (std::filesystem::temp_directory_path() / "ppfpn_tab_test.bin").string();
  dump_tables(t, path);
  const AngularTables r = load_tables(path);
  std::filesystem::remove(path);
  CHECK(r.N == t.N);
  CHECK(r.K == t.K);
  CHECK(r.filter == t.filter);
  REQUIRE(r.quad.mu.size() == t.quad.mu.size());
  for (std::size_t i = 0; i < t.quad.mu.size(); ++i) {
    CHECK(r.quad.mu[i] == t.quad.mu[i]);
    CHECK(r.quad.wmu[i] == t.quad.wmu[i]);
  }
  REQUIRE(r.quad.phi.size() == t.quad.phi.size());
  for (std::size_t i = 0; i < t.quad.phi.size(); ++i) {
    CHECK(r.quad.phi[i] == t.quad.phi[i]);
    CHECK(r.quad.wphi[i] == t.quad.wphi[i]);
    CHECK(r.quad.phi_quadrant[i] == t.quad.phi_quadrant[i]);
  }
  for (int b = 0; b < t.K; ++b) {
    CHECK(r.xi_pos_m1[b] == t.xi_pos_m1[b]);
    CHECK(r.eta_neg_m2[b] == t.eta_neg_m2[b]);
    CHECK(r.filter_diagonal[b] == t.filter_diagonal[b]);
    CHECK(r.parity_x[b] == t.parity_x[b]);
  }
  REQUIRE(r.micro_x.cidx.size() == t.micro_x.cidx.size());
  for (std::size_t e = 0; e < t.micro_x.cidx.size(); ++e) {
    CHECK(r.micro_x.cidx[e] == t.micro_x.cidx[e]);
    CHECK(r.micro_x.m1_pos[e] == t.micro_x.m1_pos[e]);
    CHECK(r.micro_x.m2_neg[e] == t.micro_x.m2_neg[e]);
  }
  CHECK_THROWS_AS(load_tables("/nonexistent/path/tables.bin"), ConfigError);
}

TEST_CASE("weights symmetric under reflection") {
  const SphereQuadrature q = build_quadrature(5);
  const int np = q.n_polar;
  for (int i = 0; i < np / 2; ++i) {
    CHECK(q.wmu[i] == q.wmu[np - 1 - i]);
    CHECK(q.mu[i] == -q.mu[np - 1 - i]);
  }
  const int na = q.n_azim;
  for (int j = 0; j < na / 2; ++j) CHECK(q.wphi[j] == q.wphi[na - 1 - j]);
}
