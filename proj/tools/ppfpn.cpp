#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "ppfpn/bench.hpp"
#include "ppfpn/errors.hpp"
#include "ppfpn/version.hpp"

using namespace ppfpn;

namespace {

struct Opts {
  std::string scenario;
  int nx = 0;
  int ny = 0;
  int n_order = 0;
  std::string filter;
  double sigma_f = -1.0;
  std::string mode;
  std::string pp;
  double cfl = 0.0;
  double t_end = -1.0;
  double eps = 0.0;
  std::string preset = "desk";
  std::string out_dir;
  std::string meshes;
};

FilterKind parse_filter(const std::string& name) {
  if (name == "none") return FilterKind::none;
  if (name == "sspline") return FilterKind::sspline;
  if (name == "lanczos") return FilterKind::lanczos;
  throw ConfigError("unknown filter " + name);
}

RunOverrides build_overrides(const Opts& o) {
  RunOverrides r;
  r.nx = o.nx;
  r.ny = o.ny;
  r.n_order = o.n_order;
  if (!o.filter.empty()) {
    r.has_filter = true;
    r.filter = parse_filter(o.filter);
  }
  r.sigma_f = o.sigma_f;
  if (!o.mode.empty()) {
    r.has_mode = true;
    r.mode = o.mode == "sugks" ? FluxMode::simplified : FluxMode::full;
  }
  if (!o.pp.empty()) r.positivity = o.pp == "on" ? 1 : 0;
  r.cfl = o.cfl;
  r.t_end = o.t_end;
  r.eps = o.eps;
  r.preset = o.preset;
  r.out_dir = o.out_dir;
  return r;
}

std::vector<int> parse_meshes(const std::string& list) {
  if (list.empty())
    throw ConfigError("converge needs --meshes, e.g. --meshes 20,40,80");
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const std::size_t next = list.find(',', pos);
    const std::string tok =
        list.substr(pos, next == std::string::npos ? next : next - pos);
    try {
      out.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw ConfigError("bad mesh entry '" + tok + "' in --meshes");
    }
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

const char* filter_name(FilterKind f) {
  switch (f) {
    case FilterKind::none: return "none";
    case FilterKind::sspline: return "sspline";
    default: return "lanczos";
  }
}

int do_run(const Opts& o) {
  if (o.scenario.empty()) throw ConfigError("run needs --scenario");
  const Scenario& s = find_scenario(o.scenario);
  RunResult r = run_scenario(s, build_overrides(o));
  std::printf("scenario %s preset %s grid %dx%d order %d filter %s\n",
              s.name.c_str(), r.preset.c_str(), r.grid.nx, r.grid.ny,
              r.n_order, filter_name(r.filter));
  std::printf("mode %s pp %s steps %d t_final %.17g\n",
              r.flux_mode == FluxMode::full ? "ugks" : "sugks",
              r.positivity ? "on" : "off", r.report.steps, r.report.t_final);
  std::printf("min_rho %.17g err_ap %.17g\n", r.report.min_rho_overall,
              r.report.final_err_ap);
  for (const auto& sym : r.report.symmetry)
    std::printf("symmetry r %.17g deviation %.17g\n", sym.first, sym.second);
  for (const ProbeSeries& ps : r.report.probes)
    std::printf("probe %s T %.17g Tr %.17g\n", ps.name.c_str(), ps.T.back(),
                ps.Tr.back());
  if (!o.out_dir.empty()) std::printf("wrote %s\n", o.out_dir.c_str());
  return 0;
}

int do_converge(const Opts& o) {
  if (o.scenario.empty()) throw ConfigError("converge needs --scenario");
  const Scenario& s = find_scenario(o.scenario);
  RunOverrides base = build_overrides(o);
  base.out_dir.clear();
  const std::vector<int> meshes = parse_meshes(o.meshes);
  const std::vector<OrderRow> rows = convergence_study(s, meshes, base);
  std::printf("%6s %12s %6s %12s %6s %12s %6s %12s %6s\n", "nx", "l2_rho",
              "ord", "linf_rho", "ord", "l2_T", "ord", "linf_T", "ord");
  for (const OrderRow& r : rows)
    std::printf("%6d %12.4e %6.2f %12.4e %6.2f %12.4e %6.2f %12.4e %6.2f\n",
                r.nx, r.l2_rho, r.order_l2_rho, r.linf_rho, r.order_linf_rho,
                r.l2_T, r.order_l2_T, r.linf_T, r.order_linf_T);
  if (!o.out_dir.empty()) {
    std::filesystem::create_directories(o.out_dir);
    write_order_table(o.out_dir + "/orders.txt", o.out_dir + "/orders.csv",
                      rows);
    std::printf("wrote %s\n", o.out_dir.c_str());
  }
  return 0;
}

int do_list() {
  for (const Scenario& s : scenario_registry())
    std::printf("%-12s desk %dx%d to t=%g, paper %dx%d to t=%g: %s\n",
                s.name.c_str(), s.desk.nx, s.desk.ny, s.desk.t_end, s.paper.nx,
                s.paper.ny, s.paper.t_end, s.summary.c_str());
  return 0;
}

int do_describe(const Opts& o) {
  if (o.scenario.empty()) throw ConfigError("describe needs --scenario");
  const Scenario& s = find_scenario(o.scenario);
  std::printf("name %s\n", s.name.c_str());
  std::printf("summary %s\n", s.summary.c_str());
  std::printf("domain [%g,%g]x[%g,%g]%s\n", s.x0, s.x1, s.y0, s.y1,
              s.y_tracks_dx ? " (y extent tracks 2 dx)" : "");
  std::printf("desk %dx%d t_end %g cfl %g\n", s.desk.nx, s.desk.ny,
              s.desk.t_end, s.desk.cfl > 0.0 ? s.desk.cfl : s.cfl);
  std::printf("paper %dx%d t_end %g cfl %g\n", s.paper.nx, s.paper.ny,
              s.paper.t_end, s.paper.cfl > 0.0 ? s.paper.cfl : s.cfl);
  std::printf("constants a %g c %g eps %g C_v %g\n", s.constants.a,
              s.constants.c, s.constants.eps, s.constants.C_v);
  std::printf("order %d filter %s sigma_f %g\n", s.n_order,
              filter_name(s.filter), s.sigma_f);
  std::printf("mode %s pp %s linear_transport %d\n",
              s.flux_mode == FluxMode::full ? "ugks" : "sugks",
              s.positivity ? "on" : "off", s.linear_transport ? 1 : 0);
  std::printf("dt %s%s\n", s.dt_parabolic ? "dx^2" : "cfl*min(dx,dy)",
              !s.dt_parabolic && s.cfl_over_c ? "/c" : "");
  if (s.cfl_simplified > 0.0)
    std::printf("cfl_simplified %g\n", s.cfl_simplified);
  std::printf("opacity %s\n", s.opacity_law == OpacityField::Law::constant
                                  ? "constant coefficient"
                                  : "coefficient / T^3");
  for (const Probe& p : s.probes)
    std::printf("probe %s %.17g %.17g\n", p.name.c_str(), p.x, p.y);
  for (double r : s.symmetry_radii) std::printf("symmetry_radius %g\n", r);
  for (double t : s.snapshot_times) std::printf("snapshot %g\n", t);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite volume benchmarks for filtered spherical harmonics "
               "radiative transfer"};
  app.set_version_flag("--version", library_version);
  app.set_config("--config", "", "key=value file mirroring the flags");
  app.require_subcommand(1);

  Opts o;
  app.add_option("--scenario", o.scenario, "registered scenario name");
  app.add_option("--nx", o.nx, "cells in x");
  app.add_option("--ny", o.ny, "cells in y");
  app.add_option("--n-order", o.n_order, "spherical harmonics order");
  app.add_option("--filter", o.filter, "angular filter")
      ->check(CLI::IsMember({"none", "sspline", "lanczos"}));
  app.add_option("--sigma-f", o.sigma_f, "filter strength");
  app.add_option("--mode", o.mode, "interface flux family")
      ->check(CLI::IsMember({"ugks", "sugks"}));
  app.add_option("--pp", o.pp, "positivity limiters")
      ->check(CLI::IsMember({"on", "off"}));
  app.add_option("--cfl", o.cfl, "time step factor");
  app.add_option("--t-end", o.t_end, "end time");
  app.add_option("--eps", o.eps, "scaling parameter");
  app.add_option("--preset", o.preset, "resolution tier")
      ->check(CLI::IsMember({"paper", "desk"}));
  app.add_option("--out-dir", o.out_dir, "directory for CSV and manifest output");
  app.add_option("--meshes", o.meshes, "comma separated mesh ladder");

  CLI::App* run = app.add_subcommand("run", "march one scenario");
  CLI::App* conv =
      app.add_subcommand("converge", "mesh refinement study on a scenario");
  CLI::App* list = app.add_subcommand("list", "list registered scenarios");
  CLI::App* desc =
      app.add_subcommand("describe", "print a scenario's full definition");
  for (CLI::App* sub : {run, conv, list, desc}) sub->fallthrough();

  try {
    app.parse(argc, argv);
    if (run->parsed()) return do_run(o);
    if (conv->parsed()) return do_converge(o);
    if (list->parsed()) return do_list();
    return do_describe(o);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const SolverFailure& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return 3;
  } catch (const InvariantViolation& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return 4;
  }
}
