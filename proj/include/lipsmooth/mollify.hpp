#ifndef LIPSMOOTH_MOLLIFY_HPP
#define LIPSMOOTH_MOLLIFY_HPP

#include <functional>
#include <vector>

#include "lipsmooth/geom.hpp"

namespace lipsmooth {

// Normalized smooth bump: rho(x) = c_rho exp(-1/(1-|x|^2)) on |x|<1, zero
// outside, with the integral over R^dim equal to 1. rho_m(x) = m^dim rho(m x).
class MollifierKernel {
 public:
  explicit MollifierKernel(int dim);
  int dim() const { return dim_; }
  double normalization() const { return c_rho_; }

  double rho_radial(double r) const;    // any dim
  double rho(const VecC& x) const;      // dims 1-2 (chart kernels)
  double rho_m(int m, const VecC& x) const;
  VecC grad_rho(const VecC& x) const;
  MatC hess_rho(const VecC& x) const;

 private:
  int dim_;
  double c_rho_;
};

const MollifierKernel& kernel(int dim);

// Tensorized Gauss-Legendre discretization of the unit kernel on [-1,1]^dim.
// Value weights are renormalized to unit mass, so the discrete M_m is a
// positive average supported in B_{1/m}: it inherits the contraction,
// Lipschitz-preservation and transversality lemmas exactly.
struct KernelTable {
  int dim = 1;
  int points_per_axis = 32;
  std::vector<VecC> nodes;       // w_k in [-1,1]^dim
  std::vector<double> w_value;   // sums to 1
  std::vector<VecC> w_grad;      // multiply result by m
  std::vector<MatC> w_hess;      // multiply result by m^2
};
const KernelTable& kernel_table(int dim, int points_per_axis = 32);

using ScalarFieldC = std::function<double(const VecC&)>;

// M_m(phi)(x) by quadrature; x must be >= 1/m away from the rim of the
// field's domain (the caller guarantees evaluability of phi on B_{1/m}(x)).
double mollify_value(const ScalarFieldC& phi, int dim, int m, const VecC& x);
VecC mollify_grad(const ScalarFieldC& phi, int dim, int m, const VecC& x);
MatC mollify_hess(const ScalarFieldC& phi, int dim, int m, const VecC& x);

// phi_m^i = M_m(phi^i) +/- (||M_m(phi^i) - phi^i||_inf + L/m) on B'_{R-1/m}.
class MollifiedChart {
 public:
  MollifiedChart(const LipschitzChart& base, int m, bool outer);
  double window() const { return window_; }  // R - 1/m
  int m() const { return m_; }
  bool outer() const { return outer_; }
  double offset() const { return c_m_; }     // signed c_m
  double sup_gap() const { return sup_gap_; }  // ||M_m phi - phi||_inf

  double value(const VecC& yp) const;   // includes the offset
  double smoothed(const VecC& yp) const;  // M_m(phi) without the offset
  VecC grad(const VecC& yp) const;
  MatC hess(const VecC& yp) const;

 private:
  void check(const VecC& yp) const;
  const LipschitzChart* base_;
  int m_;
  bool outer_;
  double window_, sup_gap_, c_m_;
};

// Fields on R^n for the slab operators of the capacity section.
struct FieldN {
  std::function<double(const VecN&)> value;
  std::function<VecN(const VecN&)> grad;  // optional for slab_mollify
};

// Convolution in the first n-1 variables only.
FieldN slab_mollify(const FieldN& v, int dim_n, int m);

// sqrt(M~_m(v^2)) with its a.e. gradient; throws if the quadrature produces
// M~_m(v^2) < -1e-14.
FieldN sqrt_slab(const FieldN& v, int dim_n, int m);

}  // namespace lipsmooth

#endif
