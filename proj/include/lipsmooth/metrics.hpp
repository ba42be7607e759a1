#ifndef LIPSMOOTH_METRICS_HPP
#define LIPSMOOTH_METRICS_HPP

#include <string>
#include <vector>

#include "lipsmooth/curvature.hpp"
#include "lipsmooth/defining.hpp"

namespace lipsmooth {

// Symmetric Hausdorff distance between two sampled boundaries, plus the
// sampling-resolution bound that must be added when comparing against
// analytic estimates.
struct HausdorffResult {
  double value = 0;
  double sampling_error = 0;  // half the max sample spacing of either set
};
HausdorffResult hausdorff_boundaries(const std::vector<VecN>& a, const std::vector<VecN>& b,
                                     int dim, double spacing_a = 0, double spacing_b = 0);

// Boundary sampling of the extracted surface: world points of every unmasked
// extraction node with |y'| <= R/8 * margin (so the union over charts covers
// the whole surface without leaving the certified windows).
std::vector<VecN> extracted_boundary_points(const std::vector<ExtractedChart>& charts,
                                            const DomainAtlas& atlas, double window_limit);
std::vector<VecN> base_boundary_points(const DomainAtlas& atlas, int res, double window_limit);

// Lebesgue measure of {region} via classification on a uniform grid.
enum class GapRegion { outer_minus_domain, domain_minus_inner };
struct LebesgueGap {
  double measure = 0;
  double cell_error = 0;  // one-cell error bar: (#boundary-adjacent cells) h^n
  long cells_counted = 0;
};
LebesgueGap lebesgue_gap(const DefiningTriple& triple, GapRegion region, double resolution);

// ||psi_m - phi||_{W^{k,p}} on the extraction window by midpoint quadrature of
// the grid jets (derivatives are the implicit-formula fields).
double sobolev_error(const ExtractedChart& ec, const LipschitzChart& base, int k, double p);

struct MeasuredCharacteristic {
  double L_m = 0;
  double R_m = 0;
};
MeasuredCharacteristic measure_characteristic(const std::vector<ExtractedChart>& charts,
                                              const DomainAtlas& atlas);

struct ConvergenceRow {
  int m = 0;
  int m0 = 0;
  double hausdorff_outer = 0, hausdorff_inner = 0, hausdorff_sampling = 0;
  double hausdorff_bound = 0;  // 12 L sqrt(1+L^2)/m
  double lebesgue_outer = 0, lebesgue_inner = 0;
  double sup_chart_gap = 0;    // max_i ||psi_m^i - phi^i||_inf
  double sup_chart_bound = 0;  // 6 L sqrt(1+L^2)/m
  double min_margin = 0;       // min vertical derivative
  double margin_floor = 0;     // 1/(2 sqrt(1+L^2))
  double L_m = 0, R_m = 0;
  double diam_outer = 0, diam_inner = 0;
  double w12 = 0, w14 = 0, w21 = 0, w22 = 0;  // Sobolev errors, max over charts
  double curv_total_q1 = 0, curv_total_q2 = 0;  // boundary curvature integrals
};

struct ConvergenceReport {
  std::string shape;
  int dim = 2;
  double L = 0, R = 0, eps0 = 0, diameter = 0;
  double cover_beta = 0;
  int charts = 0;
  int chart_res = 0;
  double vol_res = 0;
  std::vector<ConvergenceRow> rows;

  std::string to_csv() const;
  std::string to_json() const;  // includes the pinned-constant table
};

}  // namespace lipsmooth

#endif
