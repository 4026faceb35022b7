#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ppfpn/angular.hpp"
#include "ppfpn/coeffs.hpp"
#include "ppfpn/fluxes.hpp"
#include "ppfpn/mesh.hpp"
#include "ppfpn/solver.hpp"

namespace ppfpn {

struct Probe {
  std::string name;
  double x = 0.0;
  double y = 0.0;
};

// Mesh and horizon of one named resolution tier. cfl = 0 falls back to the
// scenario default.
struct ScenarioPreset {
  int nx = 0;
  int ny = 0;
  double t_end = 0.0;
  double cfl = 0.0;
};

// Complete description of one benchmark problem. The spatial callbacks
// receive cell center coordinates; heat_capacity, filter_strength and
// init_rho may be left empty to use the uniform constant, the uniform
// sigma_f, and the equilibrium a c T^4 respectively.
struct Scenario {
  std::string name;
  std::string summary;

  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  // Quasi one dimensional runs keep two square cells in y: the y extent is
  // recomputed as 2 dx whenever the resolution changes.
  bool y_tracks_dx = false;

  ScenarioPreset paper;
  ScenarioPreset desk;

  PhysicsConstants constants;
  int n_order = 7;
  FilterKind filter = FilterKind::none;
  double sigma_f = 0.0;
  FluxMode flux_mode = FluxMode::full;
  bool positivity = true;
  bool linear_transport = false;

  double cfl = 0.5;
  double cfl_simplified = 0.0;  // replaces cfl under the simplified fluxes
  bool cfl_over_c = false;      // interpret cfl against dx / c instead of dx
  bool dt_parabolic = false;    // base step dx^2 for accuracy studies

  OpacityField::Law opacity_law = OpacityField::Law::constant;
  std::function<double(double, double)> opacity_coeff;
  std::function<double(double, double)> heat_capacity;
  std::function<double(double, double)> filter_strength;
  std::function<double(double, double)> init_T;
  std::function<double(double, double)> init_rho;
  std::function<BoundaryCondition()> boundary;

  std::vector<Probe> probes;
  std::vector<double> symmetry_radii;
  bool record_err_ap = false;
  bool record_min_rho = false;
  bool lineout_diagonal = false;
  std::vector<double> snapshot_times;
};

// Command line style adjustments on top of a scenario. Zero and negative
// sentinels mean "keep the scenario value".
struct RunOverrides {
  int nx = 0;
  int ny = 0;
  int n_order = 0;
  bool has_filter = false;
  FilterKind filter = FilterKind::none;
  double sigma_f = -1.0;
  bool has_mode = false;
  FluxMode mode = FluxMode::full;
  int positivity = -1;  // -1 keep, 0 off, 1 on
  double cfl = 0.0;
  double t_end = -1.0;
  double eps = 0.0;
  std::string preset = "desk";
  std::string out_dir;
  // Called on the initial state and after every committed step.
  std::function<void(double t, const Grid2D&, const MomentState&)> observer;
};

struct ProbeSeries {
  std::string name;
  double x = 0.0, y = 0.0;
  std::vector<double> t, T, Tr;
};

struct MetricReport {
  int steps = 0;
  double t_final = 0.0;
  double min_rho_overall = 0.0;
  double final_err_ap = 0.0;
  std::vector<std::pair<double, double>> err_ap_series;   // (t, err)
  std::vector<std::pair<double, double>> min_rho_series;  // (t, min rho)
  std::vector<ProbeSeries> probes;
  std::vector<std::pair<double, double>> symmetry;  // (radius, deviation)
};

// Completed run: final state plus the resolved configuration so manifests
// and follow-up comparisons see exactly what was executed.
struct RunResult {
  Grid2D grid;
  MomentState state;
  MetricReport report;

  int n_order = 0;
  FilterKind filter = FilterKind::none;
  double sigma_f = 0.0;
  FluxMode flux_mode = FluxMode::full;
  bool positivity = true;
  bool linear_transport = false;
  double cfl = 0.0;
  double t_end = 0.0;
  std::string preset;
  PhysicsConstants constants;
};

const std::vector<Scenario>& scenario_registry();
const Scenario& find_scenario(const std::string& name);

// March the scenario to its horizon recording the requested series. When
// overrides.out_dir is set the final fields, line-outs, series and the
// manifest are written there (and at each snapshot time).
RunResult run_scenario(const Scenario& s, const RunOverrides& overrides);

struct OrderRow {
  int nx = 0;
  double l2_rho = 0.0, linf_rho = 0.0;
  double l2_T = 0.0, linf_T = 0.0;
  double order_l2_rho = 0.0, order_linf_rho = 0.0;
  double order_l2_T = 0.0, order_linf_T = 0.0;
};

// Self convergence against the once-refined run of each mesh; meshes must
// be at least two resolutions in ascending 2:1 steps. Shared resolutions
// between rows are computed once.
std::vector<OrderRow> convergence_study(const Scenario& s,
                                        const std::vector<int>& meshes,
                                        const RunOverrides& base);

// Average a fine interior field down to a coarse mesh. Supports exact 2x2
// block averaging and the quasi one dimensional case of paired columns at
// equal row count.
std::vector<double> restrict_field(int fine_nx, int fine_ny,
                                   const std::vector<double>& fine, int nx,
                                   int ny);

// Bilinear interpolation of an interior cell-centered field, clamped to
// the cell center hull.
double sample_bilinear(const Grid2D& g, const std::vector<double>& interior,
                       double x, double y);

// Relative spread (max - min) / |mean| of the field sampled on circles
// about the domain center, one value per radius.
std::vector<double> symmetry_metric(const Grid2D& g,
                                    const std::vector<double>& interior,
                                    const std::vector<double>& radii,
                                    int n_angles = 360);

double radiation_temperature(double rho, const PhysicsConstants& pc);

void write_lineout_csv(const std::string& path, const std::string& coord_name,
                       const std::vector<double>& coord,
                       const std::string& value_name,
                       const std::vector<double>& value);
void write_series_csv(const std::string& path,
                      const std::vector<std::string>& names,
                      const std::vector<const std::vector<double>*>& columns);
void write_order_table(const std::string& txt_path,
                       const std::string& csv_path,
                       const std::vector<OrderRow>& rows);
void write_manifest(const std::string& path, const Scenario& s,
                    const RunResult& r);

}  // namespace ppfpn
