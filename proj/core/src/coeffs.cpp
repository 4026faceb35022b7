#include "ppfpn/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "ppfpn/errors.hpp"

namespace ppfpn {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// All four kernel primitives are smooth functions of x = nu*dt >= 0 whose
// closed forms cancel for small x. Below this cut the adaptive Taylor sums
// converge in a handful of terms and match the closed forms to better than
// 1e-12 relative at the switch itself.
constexpr double kSeriesCut = 0.02;
constexpr int kMaxTerms = 40;

// f1 = (1 - exp(-x))/x, f1(0) = 1.
double f1_of(double x) {
  if (x < kSeriesCut) {
    double sum = 1.0;
    double term = 1.0;
    for (int n = 1; n < kMaxTerms; ++n) {
      term *= -x / (n + 1);
      sum += term;
      if (std::fabs(term) <= 1e-17 * std::fabs(sum)) break;
    }
    return sum;
  }
  return -std::expm1(-x) / x;
}

// f2 = (1 - exp(-x) - x*exp(-x))/x^2, f2(0) = 1/2.
double f2_of(double x) {
  if (x < kSeriesCut) {
    double sum = 0.5;
    double term = 0.5;
    for (int n = 1; n < kMaxTerms; ++n) {
      term *= -x * (n + 1) / (static_cast<double>(n) * (n + 2));
      sum += term;
      if (std::fabs(term) <= 1e-17 * std::fabs(sum)) break;
    }
    return sum;
  }
  double e = std::exp(-x);
  return (-std::expm1(-x) - x * e) / (x * x);
}

// g = 1 - f1 = (x - 1 + exp(-x))/x, g(0) = 0.
double g_of(double x) {
  if (x < kSeriesCut) {
    double sum = 0.5 * x;
    double term = 0.5 * x;
    for (int n = 2; n < kMaxTerms; ++n) {
      term *= -x / (n + 1);
      sum += term;
      if (std::fabs(term) <= 1e-17 * std::fabs(sum)) break;
    }
    return sum;
  }
  return 1.0 + std::expm1(-x) / x;
}

// h/x with h = 1 + exp(-x) - 2*f1; h(0) = 0 quadratically, so h/x starts
// at x/6 and stays finite for all x >= 0.
double hox_of(double x) {
  if (x < kSeriesCut) {
    double sum = x / 6.0;
    double term = x / 6.0;
    for (int n = 2; n < kMaxTerms; ++n) {
      term *= -x * n / (static_cast<double>(n - 1) * (n + 2));
      sum += term;
      if (std::fabs(term) <= 1e-17 * std::fabs(sum)) break;
    }
    return sum;
  }
  return (1.0 + std::exp(-x) - 2.0 * f1_of(x)) / x;
}

}  // namespace

double planck_beta(double T, const PhysicsConstants& k) {
  return 4.0 * k.a * k.c * T * T * T / k.C_v;
}

double imc_kappa(double dt, double eps, double beta_val, double sigma) {
  double e2 = eps * eps;
  return e2 / (e2 + dt * beta_val * sigma);
}

UgksCoefficients ugks_kernels(double dt, double eps, double sigma,
                              const PhysicsConstants& k) {
  UgksCoefficients u;
  double c = k.c;
  double e2 = eps * eps;
  u.nu = c * sigma / e2;
  double x = u.nu * dt;
  u.alpha = (c / eps) * f1_of(x);
  u.b = -(c * c * dt / e2) * f2_of(x);
  u.cc = (c / (4.0 * kPi * eps)) * g_of(x);
  u.d = -(c * c * dt / (4.0 * kPi * e2)) * hox_of(x);
  return u;
}

double interface_sigma(double sigma_left, double sigma_right) {
  if (sigma_left <= 0.0 || sigma_right <= 0.0) return 0.0;
  return 2.0 * sigma_left * sigma_right / (sigma_left + sigma_right);
}

namespace {

// The three positivity conditions are each monotone increasing in dt at
// fixed opacity, so the admissible set is an interval [0, dt_max] and
// bisection is exact. Only the distinct (face, cell) opacity pairs matter;
// piecewise constant scenarios produce a handful of them.
struct TimestepProblem {
  double c = 0.0;
  double eps = 0.0;
  double bound_alpha = 0.0;
  double bound_d = 0.0;
  double bound_slope = 0.0;
  double sigma_min = 0.0;
  std::vector<std::pair<double, double>> pairs;  // (sigma_face, sigma_cell)
};

bool timestep_ok(const TimestepProblem& p, double dt) {
  double e2 = p.eps * p.eps;
  double x_min = p.c * p.sigma_min / e2 * dt;
  if (dt * (p.c / p.eps) * f1_of(x_min) > p.bound_alpha) return false;
  for (const auto& pr : p.pairs) {
    double sf = pr.first;
    double sc = pr.second;
    double xf = p.c * sf / e2 * dt;
    double minus_d = (p.c * p.c * dt / (4.0 * kPi * e2)) * hox_of(xf);
    double ratio;
    if (sc > 0.0) {
      ratio = minus_d / sc;
    } else {
      // Vacuum cell: -d/sigma has the finite limit c^3 dt^2/(24 pi eps^4).
      ratio = p.c * p.c * p.c * dt * dt / (24.0 * kPi * e2 * e2);
    }
    if (ratio > p.bound_d) return false;
    double f1v = f1_of(xf);
    double slope = (p.c * dt / p.eps) * (f2_of(xf) / f1v);
    if (slope > p.bound_slope) return false;
  }
  return true;
}

}  // namespace

double max_timestep(int nx, int ny, double dx, double dy,
                    const std::vector<double>& sigma_cell,
                    const PhysicsConstants& k, double dt_cap,
                    TimestepMode mode) {
  if (nx <= 0 || ny <= 0 || dx <= 0.0 || dy <= 0.0 || dt_cap <= 0.0 ||
      sigma_cell.size() != static_cast<size_t>(nx) * static_cast<size_t>(ny))
    throw ConfigError("max_timestep: bad grid shape");
  for (double s : sigma_cell)
    if (!std::isfinite(s) || s < 0.0)
      throw InvariantViolation("max_timestep: nonfinite or negative opacity");
  if (!std::isfinite(dt_cap) || !std::isfinite(k.eps) || k.eps <= 0.0 ||
      k.c <= 0.0)
    throw ConfigError("max_timestep: bad constants");

  if (mode == TimestepMode::cfl_only) return dt_cap;

  TimestepProblem p;
  p.c = k.c;
  p.eps = k.eps;
  p.bound_alpha = dx * dy / (2.0 * (dx + dy));
  double area = dx * dy;
  p.bound_d = 3.0 * k.c * area * area /
              (8.0 * kPi * k.eps * k.eps * (dx * dx + dy * dy));
  p.bound_slope = std::min(dx, dy);
  p.sigma_min = sigma_cell[0];
  for (double s : sigma_cell) p.sigma_min = std::min(p.sigma_min, s);

  auto at = [&](int i, int j) { return sigma_cell[static_cast<size_t>(j) * nx + i]; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      double sc = at(i, j);
      double sl = (i > 0) ? interface_sigma(at(i - 1, j), sc) : sc;
      double sr = (i + 1 < nx) ? interface_sigma(sc, at(i + 1, j)) : sc;
      double sb = (j > 0) ? interface_sigma(at(i, j - 1), sc) : sc;
      double st = (j + 1 < ny) ? interface_sigma(sc, at(i, j + 1)) : sc;
      p.pairs.push_back({sl, sc});
      p.pairs.push_back({sr, sc});
      p.pairs.push_back({sb, sc});
      p.pairs.push_back({st, sc});
    }
  }
  std::sort(p.pairs.begin(), p.pairs.end());
  p.pairs.erase(std::unique(p.pairs.begin(), p.pairs.end()), p.pairs.end());

  if (timestep_ok(p, dt_cap)) return dt_cap;

  double lo = 0.0;
  double hi = dt_cap;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    if (timestep_ok(p, mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}
