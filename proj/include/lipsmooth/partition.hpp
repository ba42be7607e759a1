#ifndef LIPSMOOTH_PARTITION_HPP
#define LIPSMOOTH_PARTITION_HPP

#include <vector>

#include "lipsmooth/geom.hpp"
#include "lipsmooth/quadrature.hpp"

namespace lipsmooth {

// Radial profile P(s) of a mollified ball indicator: (rho~_t * chi_{B_b})(s e1).
// P == 1 for s <= b - t and == 0 for s >= b + t (enforced exactly); spline in
// between.
struct RadialProfile {
  double t = 0, b = 0;  // kernel radius, ball radius
  CubicSpline spline;
  double value(double s) const;
  double deriv(double s) const;
  double deriv2(double s) const;
};
RadialProfile bump_profile(int dim, double kernel_radius, double ball_radius);

// Partition of unity subordinate to the R/8-ball covering plus the interior
// bump: eta_i = rho~_{R/32} * chi_{B_{3R/16}(x^i)}, eta_0 = rho~_{R/64} *
// chi_{Omega_{3R/64}}, xi_i = eta_i / sum eta_j.
class BumpFamily {
 public:
  BumpFamily() = default;
  static BumpFamily build(const DomainAtlas& atlas);

  const DomainAtlas& atlas() const { return *atlas_; }

  // bump values; i in [0, N], 0 is the interior bump
  double eta(int i, const VecN& x) const;
  double eta0(const VecN& x) const;
  double sum_eta(const VecN& x) const;  // includes eta0
  double xi(int i, const VecN& x) const;

  // support radii (reported)
  double boundary_support() const { return prof_.b + prof_.t; }  // 7R/32
  double eta0_zero_below() const;   // eta0 == 0 where sdf <= this (R/32)
  double eta0_one_above() const;    // eta0 == 1 where sdf >= this

  // Analytic first and second derivatives of every active xi at x, in world
  // coordinates. Requires eta0 to sit on a plateau at x (0 or 1): in the
  // transition shell the interior bump has no closed-form derivatives. This is
  // exactly the regime the defining-function jets need, since the boundary
  // band is disjoint from supp xi_0 for m >= m0.
  struct XiJet {
    std::vector<int> active;          // boundary chart indices with eta > 0
    std::vector<double> value;        // xi_i
    std::vector<VecN> grad;           // grad xi_i
    std::vector<MatN> hess;           // hess xi_i
    double xi0 = 0;                   // xi_0 value (plateau)
    double sum = 0;                   // sum eta
    double sigma = 0;                 // sum of boundary xi_i = 1 - xi0
  };
  XiJet xi_jet(const VecN& x) const;

  struct BoundReport {
    double sup_grad_scaled = 0;   // max |grad xi_i| * R
    double sup_hess_scaled = 0;   // max |hess xi_i| * R^2
    int samples = 0;
  };
  // measured on band samples around the boundary (analytic jets)
  BoundReport measure_derivative_bounds(int per_chart = 8) const;

 private:
  const DomainAtlas* atlas_ = nullptr;
  RadialProfile prof_;
  double eta0_t_ = 0;      // R/64
  double eta0_erode_ = 0;  // 3R/64
  double ramp_w_ = 0;      // R/512 indicator smoothing (quadrature path)
  CubicSpline eta0_flat_;  // cumulative kernel marginal (smooth-sdf path)
};

}  // namespace lipsmooth

#endif
