#include "lipsmooth/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "lipsmooth/common.hpp"

namespace lipsmooth {

static GaussRule compute_gauss(int k) {
  GaussRule rule;
  rule.nodes.resize(k);
  rule.weights.resize(k);
  // Newton iteration on Legendre P_k, Chebyshev initial guesses.
  for (int i = 0; i < (k + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (k + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= k; ++j) {
        double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      pp = k * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.nodes[i] = -x;
    rule.nodes[k - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[k - 1 - i] = w;
  }
  if (k % 2 == 1) rule.nodes[k / 2] = 0.0;
  return rule;
}

const GaussRule& gauss_legendre(int k) {
  static std::map<int, GaussRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(k);
  if (it == cache.end()) it = cache.emplace(k, compute_gauss(k)).first;
  return it->second;
}

double gauss_integrate(const std::function<double(double)>& f, double a, double b, int k) {
  const GaussRule& rule = gauss_legendre(k);
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return s * half;
}

namespace {
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double b, double fa, double fm,
             double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double fl = f(0.5 * (a + m)), fr = f(0.5 * (m + b));
  double left = simpson(f, a, m, fa, fl, fm);
  double right = simpson(f, m, b, fm, fr, fb);
  double delta = left + right - whole;
  if (depth > 60 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adapt(f, a, m, fa, fl, fm, left, 0.5 * tol, depth + 1) +
         adapt(f, m, b, fm, fr, fb, right, 0.5 * tol, depth + 1);
}
}  // namespace

double adaptive_integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return adapt(f, a, b, fa, fm, fb, simpson(f, a, b, fa, fm, fb), tol, 0);
}

CubicSpline::CubicSpline(double x0, double h, std::vector<double> values)
    : x0_(x0), h_(h), y_(std::move(values)) {
  const int n = static_cast<int>(y_.size());
  if (n < 3) throw Error("CubicSpline: need at least 3 samples");
  m_.assign(n, 0.0);
  // Thomas solve for natural spline second derivatives (uniform spacing).
  std::vector<double> c(n, 0.0), d(n, 0.0);
  c[0] = 0.0;
  d[0] = 0.0;
  for (int i = 1; i < n - 1; ++i) {
    double rhs = 6.0 * (y_[i - 1] - 2.0 * y_[i] + y_[i + 1]) / (h_ * h_);
    double denom = 4.0 - c[i - 1];
    c[i] = 1.0 / denom;
    d[i] = (rhs - d[i - 1]) / denom;
  }
  for (int i = n - 2; i >= 1; --i) m_[i] = d[i] - c[i] * m_[i + 1];
}

void CubicSpline::locate(double x, int& i, double& t) const {
  const int n = static_cast<int>(y_.size());
  double u = (x - x0_) / h_;
  if (u <= 0.0) {
    i = 0;
    t = 0.0;
    return;
  }
  if (u >= n - 1) {
    i = n - 2;
    t = 1.0;
    return;
  }
  i = static_cast<int>(u);
  t = u - i;
}

double CubicSpline::value(double x) const {
  int i;
  double t;
  locate(x, i, t);
  double a = y_[i], b = y_[i + 1];
  double ma = m_[i], mb = m_[i + 1];
  double h2 = h_ * h_;
  return a * (1 - t) + b * t +
         h2 / 6.0 * ((std::pow(1 - t, 3) - (1 - t)) * ma + (t * t * t - t) * mb);
}

double CubicSpline::deriv(double x) const {
  int i;
  double t;
  locate(x, i, t);
  double a = y_[i], b = y_[i + 1];
  double ma = m_[i], mb = m_[i + 1];
  return (b - a) / h_ + h_ / 6.0 * ((3 * t * t - 1) * mb - (3 * (1 - t) * (1 - t) - 1) * ma);
}

double CubicSpline::deriv2(double x) const {
  int i;
  double t;
  locate(x, i, t);
  return m_[i] * (1 - t) + m_[i + 1] * t;
}

}  // namespace lipsmooth
