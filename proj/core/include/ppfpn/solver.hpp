#pragma once

#include <string>
#include <vector>

#include "ppfpn/angular.hpp"
#include "ppfpn/coeffs.hpp"
#include "ppfpn/fluxes.hpp"
#include "ppfpn/mesh.hpp"
#include "ppfpn/recon.hpp"

namespace ppfpn {

// Per-cell opacity model: a constant coefficient per cell, or the Marshak
// style coeff / max(T, T_floor)^3 law.
struct OpacityField {
  enum class Law { constant, inverse_t3 };

  Law law = Law::constant;
  std::vector<double> coeff;  // interior cells, row major j*nx + i
  double T_floor = 1e-6;

  double value(std::size_t cell, double T) const;
  static OpacityField uniform(int nx, int ny, double sigma);
};

struct SolverConfig {
  PhysicsConstants constants;
  FluxMode flux_mode = FluxMode::full;
  bool positivity = true;         // apply the scaling limiters and clamp noise
  bool linear_transport = false;  // emission slaved to rho, no material update
  double sigma_f = 0.0;           // filter strength
  double tol_outer = 1e-10;
  int max_sweeps = 200;
  double lin_tol = 1e-12;
  int lin_cap = 0;  // 0 selects an automatic cap
  // Per-cell overrides (interior, row major); empty means the uniform
  // values above apply everywhere.
  std::vector<double> cv_cells;       // volumetric heat capacity
  std::vector<double> sigma_f_cells;  // filter strength
};

// Five-point linear system for the implicit radiation energy update. The
// neighbor fields hold the coefficient toward the lower/higher cell along
// each axis; wrap flags mark periodic closure, and entries on faces folded
// into the diagonal or moved to the right side are zero. The right side is
// kept split into the transport part (old intensity moments) and the
// emission part.
struct MacroSystem {
  int nx = 0, ny = 0;
  bool wrap_x = false, wrap_y = false;
  std::vector<double> diag, west, east, south, north;
  std::vector<double> rhs_I, rhs_phi;

  std::vector<double> rhs() const;
};

void macro_matvec(const MacroSystem& sys, const std::vector<double>& v,
                  std::vector<double>& out);

struct LinearSolveReport {
  int iters = 0;
  double residual = 0.0;  // final infinity norm of b - A x
};

// Jacobi-preconditioned conjugate gradient on the five-point system. x is
// the initial guess on entry and the solution on return; the residual
// infinity norm is driven below tol_rel * max(1e-300, ||rhs||_inf). Throws
// SolverFailure when the iteration cap is hit.
LinearSolveReport solve_macro(const MacroSystem& sys, std::vector<double>& x,
                              double tol_rel, int cap);

struct IterationReport {
  int sweeps = 0;
  std::vector<int> linear_iters;
  double final_change = 0.0;
  double min_lambda1 = 1.0;
  double min_lambda_x = 1.0;
  double min_lambda_y = 1.0;
  double min_rho = 0.0;
  double min_phi = 0.0;
};

// One full scheme instance on a fixed grid: limiter application, the source
// iteration for the coupled radiation-material update, and the micro moment
// update. The staging methods are public so the assembled pieces can be
// verified in isolation; advance runs them in order.
class Solver {
 public:
  Solver(const Grid2D& g, const AngularTables* tables, BoundaryCondition bc,
         OpacityField opacity, SolverConfig cfg);

  // Full time step; mutates state in place, ghosts left at the old level.
  IterationReport advance(MomentState& state, double dt);

  // Steps 1.1-1.3 only: updates rho, phi, T of state and leaves the micro
  // moments at the old time level.
  IterationReport source_iteration(MomentState& state, double dt);

  // Largest admissible dt at the state's temperatures, capped by dt_cap.
  double admissible_dt(const MomentState& state, double dt_cap) const;

  // Stage 0: fill ghosts, compute slopes, fix dt for the step.
  void begin_step(MomentState& state, double dt);
  // Evaluate per-cell and face coefficients and the limited snapshot at the
  // iterate temperatures T_iter (interior, row major).
  void prepare_sweep(const MomentState& state, const std::vector<double>& T_iter);
  // Build the linear system of the current sweep from the prepared arrays.
  MacroSystem assemble_macro(const MomentState& state) const;
  // Step 2: micro fluxes with the converged rho^{n+1} and the closed-form
  // moment relaxation; commits every field of state to the new level.
  void micro_update(MomentState& state, const std::vector<double>& rho_new,
                    const std::vector<double>& phi_new,
                    const std::vector<double>& T_new);

  // Cell coefficients of the most recent prepare_sweep, interior sized.
  const std::vector<double>& cell_sigma() const { return sigma_int_; }
  const std::vector<double>& cell_kappa() const { return kappa_int_; }

  const Grid2D& grid() const { return grid_; }
  const SolverConfig& config() const { return cfg_; }

 private:
  struct FaceBc {
    int cls = 0;  // 0 interior, 1 wrap, 2 fold, 3 drop, 4 dirichlet
    double rho_bc = 0.0;
  };

  void check_state(const MomentState& state) const;
  void extend_scalar_ghosts(std::vector<double>& field) const;
  std::vector<double> ghost_extended_rho(const std::vector<double>& rho_new) const;
  void limiter_pass(const MomentState& state);
  void macro_flux_pass(const MomentState& state);
  void residual_check(const MomentState& state, const MacroSystem& sys,
                      const std::vector<double>& rho_new) const;
  IterationReport run_sweeps(MomentState& state);

  Grid2D grid_;
  const AngularTables* tables_;
  BoundaryCondition bc_;
  NormalizedBc nbc_;
  OpacityField opacity_;
  SolverConfig cfg_;
  int K_;

  FaceBc left_bc_(int j) const;
  FaceBc right_bc_(int j) const;
  FaceBc bottom_bc_(int i) const;
  FaceBc top_bc_(int i) const;

  double dt_ = 0.0;
  SlopeField slopes_;

  // ghosted scalar scratch
  std::vector<double> sigma_g_, beta_g_, kappa_g_, kphi_g_;
  // interior coefficient views of the last prepare_sweep
  std::vector<double> sigma_int_, kappa_int_;
  // limited snapshot, ghosted
  std::vector<double> micro_lim_, sx_lim_, sy_lim_;
  // face coefficients and macro flux parts
  std::vector<UgksCoefficients> fcx_, fcy_;
  std::vector<double> mfx_in_, mfx_ph_, mfx_rl_, mfx_rh_;
  std::vector<double> mfy_in_, mfy_ph_, mfy_rl_, mfy_rh_;
  // iteration buffers
  std::vector<double> rho_new_, phi_new_, T_new_;
  // limiter statistics of the last prepare_sweep
  double stat_l1_ = 1.0, stat_lx_ = 1.0, stat_ly_ = 1.0;
};

// Versioned binary snapshot of a state, ghosts included; a write/read pair
// reproduces every array bit for bit. read returns the stored time.
void write_checkpoint(const std::string& path, const Grid2D& g,
                      const MomentState& state, double time);
double read_checkpoint(const std::string& path, const Grid2D& g,
                       MomentState& state);

// Backward-Euler finite volume step of the equilibrium diffusion equation
//   C_v dT/dt + a d(T^4)/dt = div (a c / (3 sigma)) grad T^4,
// Newton iteration on the quartic with the opacity lagged at the current
// iterate. T holds interior cell temperatures; returns Newton steps taken.
int diffusion_advance(const Grid2D& g, const BoundaryCondition& bc,
                      const OpacityField& opacity, const PhysicsConstants& pc,
                      double dt, std::vector<double>& T, double tol = 1e-12,
                      int cap = 100);

// Linear variant, one implicit step of d(rho)/dt = div (c/(3 sigma)) grad rho.
void diffusion_advance_linear(const Grid2D& g, const BoundaryCondition& bc,
                              const OpacityField& opacity,
                              const PhysicsConstants& pc, double dt,
                              std::vector<double>& rho);

}
