#ifndef LIPSMOOTH_QUADRATURE_HPP
#define LIPSMOOTH_QUADRATURE_HPP

#include <functional>
#include <vector>

namespace lipsmooth {

// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int k);

// integral of f over [a, b] with a k-point rule
double gauss_integrate(const std::function<double(double)>& f, double a, double b, int k = 32);

// Adaptive Simpson to absolute tolerance; used for kernel normalization and
// test oracles, not in inner loops.
double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-12);

// Natural cubic spline through uniformly spaced samples on [x0, x0 + (n-1)h].
// Evaluations clamp to the sample range.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(double x0, double h, std::vector<double> values);
  double value(double x) const;
  double deriv(double x) const;
  double deriv2(double x) const;
  double x_min() const { return x0_; }
  double x_max() const { return x0_ + h_ * (static_cast<double>(y_.size()) - 1.0); }

 private:
  void locate(double x, int& i, double& t) const;
  double x0_ = 0.0, h_ = 1.0;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at knots
};

}  // namespace lipsmooth

#endif
