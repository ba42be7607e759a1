#ifndef LIPSMOOTH_DEFINING_HPP
#define LIPSMOOTH_DEFINING_HPP

#include <memory>
#include <mutex>
#include <vector>

#include "lipsmooth/mollify.hpp"
#include "lipsmooth/partition.hpp"

namespace lipsmooth {

enum class FieldKind { exact, outer, inner };

// Boundary defining function F(x) = sum_j f^j(x) xi_j(x) - xi_0(x) with
// f^j = z_n - phi^j(z'), z = T^j x; the outer/inner variants substitute the
// mollified charts phi_m^j / phi~_m^j. Chart terms are built lazily.
class DefiningField {
 public:
  DefiningField(const DomainAtlas& atlas, const BumpFamily& bumps, FieldKind kind, int m = 0);

  FieldKind kind() const { return kind_; }
  int m() const { return m_; }
  const DomainAtlas& atlas() const { return *atlas_; }
  const BumpFamily& bumps() const { return *bumps_; }

  double value(const VecN& x) const;
  // sigma(x) = sum of boundary xi_j; the sandwich bounds are sigma-weighted
  double value_and_sigma(const VecN& x, double& sigma) const;

  struct Jet {
    double value = 0;
    VecN grad{};
    MatN hess{};
  };
  // world-coordinate derivatives; valid on the eta0 plateaus (in particular on
  // the boundary band for m >= m0)
  Jet jet(const VecN& x, bool with_hessian = true) const;
  double vertical_derivative(const VecN& x, const ReferenceFrame& frame) const;

  const MollifiedChart& term(int j) const;  // j in [0, N)

 private:
  double chart_value(int j, const VecC& zp) const;
  const DomainAtlas* atlas_;
  const BumpFamily* bumps_;
  FieldKind kind_;
  int m_;
  mutable std::vector<std::unique_ptr<MollifiedChart>> terms_;
  mutable std::mutex terms_mu_;
};

// The F_m < F < F~_m triple.
struct DefiningTriple {
  DefiningField exact, outer, inner;
  DefiningTriple(const DomainAtlas& atlas, const BumpFamily& bumps, int m)
      : exact(atlas, bumps, FieldKind::exact),
        outer(atlas, bumps, FieldKind::outer, m),
        inner(atlas, bumps, FieldKind::inner, m) {}
};

enum class Region { core, inner_shell, outer_shell, outside };

struct Classification {
  Region region = Region::outside;
  bool boundary_band = false;  // F_m < 0 < F~_m
  bool in_domain = false;      // x in W (some bump positive)
  double F = 0, Fm = 0, Ftm = 0;
};
Classification classify(const DefiningTriple& t, const VecN& x);

struct SandwichStats {
  long samples = 0;
  long outside = 0;
  long order_violations = 0;       // F_m <= F <= F~_m failures
  long band_violations = 0;        // sigma-weighted L/m band failures
  long containment_violations = 0; // sign-based omega_m <= Omega <= Omega_m
  double max_band_defect = 0;
};
SandwichStats sandwich_check(const DefiningTriple& t, long n_samples, uint64_t seed = 1);

// Smooth implicit chart of {F_m = 0} (or {F~_m = 0}) over B'_{R-2eps0} in the
// frame of chart i.
struct ExtractedChart {
  int chart_index = -1;
  int m = 0;
  bool outer = true;
  int dim = 2;       // ambient
  double window = 0; // R - 2 eps0
  int res = 0;
  std::vector<double> psi;
  std::vector<VecC> grad;
  std::vector<MatC> hess;
  std::vector<uint8_t> mask;  // 1 where |y'| <= window (n=3 grid corners masked)
  double vertical_margin = 2.0;   // min dF/dy_n along the zero set
  double sup_gap_vs_base = 0;     // max |psi - phi| over the grid
  double grid_h = 0;

  std::function<double(const VecC&)> solve;  // point re-solve of the root

  int nx() const { return res; }
  int ny() const { return dim == 3 ? res : 1; }
  int idx(int i, int j) const { return j * res + i; }
  VecC node(int i, int j = 0) const {
    return {-window + 2 * window * i / (res - 1),
            dim == 3 ? -window + 2 * window * j / (res - 1) : 0.0};
  }
};

ExtractedChart extract_chart(const DefiningField& df, int chart_index, int res);

struct BandCheckReport {
  long samples = 0;
  long cover_violations = 0;  // band point outside every B_{R/8}(x^i)
  long xi0_violations = 0;    // band point with eta0 > 0
};
// checks the containment of {|F| <= 3L/m} in the covering and away from xi_0
BandCheckReport hausdorff_band_check(const DefiningField& exact_field, int m,
                                     int nodes_per_chart = 33, int chart_stride = 1);

struct M0Report {
  int m0 = 0;         // smallest m with band containment AND margins (0 = none)
  int margin_m0 = 0;  // smallest m where extraction succeeds with valid margins;
                      // the chart and Hausdorff bounds hold from here (the
                      // paper states (3.4) for all m), while the band
                      // containment (6.22) may need larger m
  std::vector<int> tried;
  std::vector<bool> band_ok;
  std::vector<bool> margin_ok;
};
// scans m in {4, 8, 16, ...} up to max_m; margin checks run on every
// `stride`-th chart at a coarse extraction resolution
M0Report detect_m0(const DomainAtlas& atlas, const BumpFamily& bumps, int max_m = 256,
                   int stride = 1, int coarse_res = 9);

}  // namespace lipsmooth

#endif
