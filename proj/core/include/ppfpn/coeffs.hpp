#pragma once

#include <vector>

namespace ppfpn {

// Physical constants for the gray radiative transfer model. Units follow the
// scenario definitions: a is the radiation constant, c the speed of light,
// eps the scaling parameter, C_v the heat capacity.
struct PhysicsConstants {
  double a = 1.0;
  double c = 1.0;
  double eps = 1.0;
  double C_v = 1.0;
};

// Interface coefficients of the integral-solution flux at a cell face.
//   alpha multiplies the upwind reconstruction of the intensity moments,
//   b multiplies their spatial slope,
//   cc multiplies the interface value of the material emission phi,
//   d multiplies the spatial slope of phi.
// nu = c*sigma/eps^2 is the collision frequency used to form them, and
// kappa is the implicit emission weight at the face (set by imc_kappa;
// kappa = 0 is the instantly equilibrated limit phi^{n+1} = rho^{n+1},
// kappa = 1 freezes the emission at phi^n).
struct UgksCoefficients {
  double alpha = 0.0;
  double b = 0.0;
  double cc = 0.0;
  double d = 0.0;
  double nu = 0.0;
  double kappa = 1.0;
};

// 4*a*c*T^3 / C_v, the linearization coefficient of the emission update.
double planck_beta(double T, const PhysicsConstants& k);

// eps^2 / (eps^2 + dt*beta*sigma): weight of the old emission in the
// implicit update phi^{n+1} = kappa*phi^n + (1-kappa)*rho^{n+1}.
double imc_kappa(double dt, double eps, double beta_val, double sigma);

// Evaluate the four interface coefficients for time step dt, scaling eps
// and face opacity sigma. Uses closed forms built on expm1 for moderate
// arguments and adaptive series below x = nu*dt = 0.02 so that both
// branches agree to near machine precision at the switch.
UgksCoefficients ugks_kernels(double dt, double eps, double sigma,
                              const PhysicsConstants& k);

// Harmonic mean of the two adjacent cell opacities; zero if either side
// vanishes. Used for the face opacity entering ugks_kernels.
double interface_sigma(double sigma_left, double sigma_right);

enum class TimestepMode {
  pp_strict,
  cfl_only,
};

// Largest admissible time step on a uniform nx*ny grid with spacings dx, dy
// and per-cell opacities sigma_cell (row-major, j*nx + i). dt_cap is the
// scenario's CFL-type bound; cfl_only returns it unchanged, pp_strict
// bisects below it for the largest dt satisfying the positivity conditions:
//   dt*alpha(dt, sigma_min)          <= dx*dy / (2*(dx+dy)),
//   max over cells and their faces
//     of -d(dt, sigma_face)/sigma_cell <= 3*c*(dx*dy)^2
//                                         / (8*pi*eps^2*(dx^2+dy^2)),
//   max over faces of -b/alpha       <= min(dx, dy).
// Face opacities are harmonic means of the neighbouring cells; boundary
// faces reuse the interior cell value.
double max_timestep(int nx, int ny, double dx, double dy,
                    const std::vector<double>& sigma_cell,
                    const PhysicsConstants& k, double dt_cap,
                    TimestepMode mode);

}
