#pragma once

#include <vector>

#include "ppfpn/angular.hpp"
#include "ppfpn/coeffs.hpp"

namespace ppfpn {

enum class FluxMode { full, simplified };

// One adjacent cell as seen from a face: moments at the old time level, the
// limited slope of the full moment vector along the face normal, and the
// cell's kappa^{n+1} phi^n product.
struct FluxCellView {
  double rho = 0.0;
  const double* micro = nullptr;  // K-1 entries
  const double* slope = nullptr;  // K entries, component 0 included
  double kphi = 0.0;
};

// Interface flux split for the implicit macro coupling.  The realized flux is
//   from_In + from_phin + rho_lo * rho^{n+1}_lo + rho_hi * rho^{n+1}_hi
// where lo/hi are the lower/higher-index cells along the face normal.  Macro
// fluxes carry one entry, micro fluxes K-1 entries.
struct FaceFluxParts {
  std::vector<double> from_In;
  std::vector<double> from_phin;
  std::vector<double> rho_lo;
  std::vector<double> rho_hi;
};

// Interface fluxes on a vertical face (normal along x) or a horizontal face
// (normal along y).  The coefficients k, including the emission weight
// k.kappa, are evaluated at the face opacity.  The simplified mode drops the
// slope relaxation block, and in the micro flux also the isotropic emission
// block.
FaceFluxParts macro_flux_x(const FluxCellView& left, const FluxCellView& right,
                           const UgksCoefficients& k, double dx,
                           const AngularTables& tables, FluxMode mode);
FaceFluxParts macro_flux_y(const FluxCellView& bottom, const FluxCellView& top,
                           const UgksCoefficients& k, double dy,
                           const AngularTables& tables, FluxMode mode);
FaceFluxParts micro_flux_x(const FluxCellView& left, const FluxCellView& right,
                           const UgksCoefficients& k, double dx,
                           const AngularTables& tables, FluxMode mode);
FaceFluxParts micro_flux_y(const FluxCellView& bottom, const FluxCellView& top,
                           const UgksCoefficients& k, double dy,
                           const AngularTables& tables, FluxMode mode);

}
