#include "ppfpn/fluxes.hpp"

namespace ppfpn {

namespace {

constexpr double kInvTwoSqrtPi = 0.28209479177387814347403972578039;
constexpr double kFourPiOver3 = 4.1887902047863909846168578443727;

struct AxisTables {
  const std::vector<double>& pos_m1;
  const std::vector<double>& neg_m1;
  const std::vector<double>& pos_m2;
  const std::vector<double>& neg_m2;
  const PackedBlock& micro_blk;
  const std::vector<double>& micro_m1;
  const std::vector<double>& micro_m2;
};

AxisTables axis_x(const AngularTables& t) {
  return {t.xi_pos_m1, t.xi_neg_m1,   t.xi_pos_m2, t.xi_neg_m2,
          t.micro_x,   t.xi_micro_m1, t.xi_micro_m2};
}

AxisTables axis_y(const AngularTables& t) {
  return {t.eta_pos_m1, t.eta_neg_m1,   t.eta_pos_m2, t.eta_neg_m2,
          t.micro_y,    t.eta_micro_m1, t.eta_micro_m2};
}

// Upwind-side face values of the full moment vector, lower cell extrapolated
// forward by h/2 and upper cell backward.
void face_values(const FluxCellView& lo, const FluxCellView& hi, int K, double h,
                 std::vector<double>& vlo, std::vector<double>& vhi) {
  vlo.resize(K);
  vhi.resize(K);
  vlo[0] = lo.rho * kInvTwoSqrtPi + 0.5 * h * lo.slope[0];
  vhi[0] = hi.rho * kInvTwoSqrtPi - 0.5 * h * hi.slope[0];
  for (int b = 1; b < K; ++b) {
    vlo[b] = lo.micro[b - 1] + 0.5 * h * lo.slope[b];
    vhi[b] = hi.micro[b - 1] - 0.5 * h * hi.slope[b];
  }
}

FaceFluxParts macro_flux(const AxisTables& ax, const FluxCellView& lo,
                         const FluxCellView& hi, const UgksCoefficients& k,
                         double h, int K, FluxMode mode) {
  std::vector<double> vlo, vhi;
  face_values(lo, hi, K, h, vlo, vhi);

  double adv = 0.0;
  for (int b = 0; b < K; ++b) adv += ax.pos_m1[b] * vlo[b] + ax.neg_m1[b] * vhi[b];
  double from_in = k.alpha * adv;
  if (mode == FluxMode::full) {
    double spread = 0.0;
    for (int b = 0; b < K; ++b)
      spread += ax.pos_m2[b] * lo.slope[b] + ax.neg_m2[b] * hi.slope[b];
    from_in += k.b * spread;
  }

  const double dkphi = (hi.kphi - lo.kphi) / h;
  const double r = k.d * kFourPiOver3 * (1.0 - k.kappa) / h;

  FaceFluxParts out;
  out.from_In.assign(1, from_in);
  out.from_phin.assign(1, k.d * kFourPiOver3 * dkphi);
  out.rho_lo.assign(1, -r);
  out.rho_hi.assign(1, r);
  return out;
}

FaceFluxParts micro_flux(const AxisTables& ax, const FluxCellView& lo,
                         const FluxCellView& hi, const UgksCoefficients& k,
                         double h, int K, FluxMode mode) {
  std::vector<double> vlo, vhi;
  face_values(lo, hi, K, h, vlo, vhi);

  FaceFluxParts out;
  out.from_In.assign(K - 1, 0.0);
  out.from_phin.assign(K - 1, 0.0);
  out.rho_lo.assign(K - 1, 0.0);
  out.rho_hi.assign(K - 1, 0.0);

  const bool full = mode == FluxMode::full;
  const PackedBlock& blk = ax.micro_blk;
  for (int row = 0; row < blk.rows; ++row) {
    double adv = 0.0;
    double spread = 0.0;
    for (int p = blk.rptr[row]; p < blk.rptr[row + 1]; ++p) {
      const int b = blk.cidx[p];
      adv += blk.m1_pos[p] * vlo[b] + blk.m1_neg[p] * vhi[b];
      if (full) spread += blk.m2_pos[p] * lo.slope[b] + blk.m2_neg[p] * hi.slope[b];
    }
    out.from_In[row] = k.alpha * adv + k.b * spread;
  }

  const double kphi_face = 0.5 * (lo.kphi + hi.kphi);
  const double dkphi = (hi.kphi - lo.kphi) / h;
  const double one_minus = 1.0 - k.kappa;
  for (int a = 0; a + 1 < K; ++a) {
    const double grad = k.d * ax.micro_m2[a];
    double src = grad * dkphi;
    double clo = -grad * one_minus / h;
    double chi = grad * one_minus / h;
    if (full) {
      const double emit = k.cc * ax.micro_m1[a];
      src += emit * kphi_face;
      clo += 0.5 * emit * one_minus;
      chi += 0.5 * emit * one_minus;
    }
    out.from_phin[a] = src;
    out.rho_lo[a] = clo;
    out.rho_hi[a] = chi;
  }
  return out;
}

}  // namespace

FaceFluxParts macro_flux_x(const FluxCellView& left, const FluxCellView& right,
                           const UgksCoefficients& k, double dx,
                           const AngularTables& tables, FluxMode mode) {
  return macro_flux(axis_x(tables), left, right, k, dx, tables.K, mode);
}

FaceFluxParts macro_flux_y(const FluxCellView& bottom, const FluxCellView& top,
                           const UgksCoefficients& k, double dy,
                           const AngularTables& tables, FluxMode mode) {
  return macro_flux(axis_y(tables), bottom, top, k, dy, tables.K, mode);
}

FaceFluxParts micro_flux_x(const FluxCellView& left, const FluxCellView& right,
                           const UgksCoefficients& k, double dx,
                           const AngularTables& tables, FluxMode mode) {
  return micro_flux(axis_x(tables), left, right, k, dx, tables.K, mode);
}

FaceFluxParts micro_flux_y(const FluxCellView& bottom, const FluxCellView& top,
                           const UgksCoefficients& k, double dy,
                           const AngularTables& tables, FluxMode mode) {
  return micro_flux(axis_y(tables), bottom, top, k, dy, tables.K, mode);
}

}
