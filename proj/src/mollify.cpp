#include "lipsmooth/mollify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "lipsmooth/quadrature.hpp"

namespace lipsmooth {

MollifierKernel::MollifierKernel(int dim) : dim_(dim) {
  if (dim < 1 || dim > 3) throw Error("MollifierKernel: dim must be 1..3");
  auto profile = [](double t) {
    double s = 1.0 - t * t;
    return s > 0 ? std::exp(-1.0 / s) : 0.0;
  };
  double mass;
  if (dim == 1)
    mass = adaptive_integrate(profile, -1.0, 1.0, 1e-14);
  else if (dim == 2)
    mass = 2.0 * M_PI * adaptive_integrate([&](double r) { return profile(r) * r; }, 0.0, 1.0, 1e-14);
  else
    mass = 4.0 * M_PI *
           adaptive_integrate([&](double r) { return profile(r) * r * r; }, 0.0, 1.0, 1e-14);
  c_rho_ = 1.0 / mass;
}

double MollifierKernel::rho_radial(double r) const {
  double s = 1.0 - r * r;
  return s > 0 ? c_rho_ * std::exp(-1.0 / s) : 0.0;
}

double MollifierKernel::rho(const VecC& x) const {
  if (dim_ > 2) throw Error("rho(VecC): use rho_radial for dim 3");
  return rho_radial(normc(x));
}

double MollifierKernel::rho_m(int m, const VecC& x) const {
  if (m < 1) throw Error("rho_m: m must be >= 1");
  VecC mx{m * x[0], m * x[1]};
  return std::pow(static_cast<double>(m), dim_) * rho(mx);
}

VecC MollifierKernel::grad_rho(const VecC& x) const {
  double s = 1.0;
  for (int k = 0; k < dim_; ++k) s -= x[k] * x[k];
  VecC g{};
  if (s <= 0) return g;
  double r = rho(x);
  double inv2 = 1.0 / (s * s);
  for (int k = 0; k < dim_; ++k) g[k] = -2.0 * x[k] * inv2 * r;
  return g;
}

MatC MollifierKernel::hess_rho(const VecC& x) const {
  MatC h{};
  double s = 1.0;
  for (int k = 0; k < dim_; ++k) s -= x[k] * x[k];
  if (s <= 0) return h;
  double r = rho(x);
  double i2 = 1.0 / (s * s), i3 = i2 / s, i4 = i2 * i2;
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b) {
      double gg = 4.0 * x[a] * x[b] * i4;          // grad g grad g^T
      double hg = -8.0 * x[a] * x[b] * i3;         // d2 g / ds2 part
      double diag = a == b ? -2.0 * i2 : 0.0;      // dg/ds * d2 s
      h[a][b] = r * (gg + hg + diag);
    }
  return h;
}

const MollifierKernel& kernel(int dim) {
  static MollifierKernel k1(1), k2(2), k3(3);
  switch (dim) {
    case 1: return k1;
    case 2: return k2;
    case 3: return k3;
  }
  throw Error("kernel: dim must be 1..3");
}

static KernelTable compute_table(int dim, int k) {
  const MollifierKernel& ker = kernel(dim);
  const GaussRule& rule = gauss_legendre(k);
  KernelTable t;
  t.dim = dim;
  t.points_per_axis = k;
  double mass = 0;
  int ny = dim == 2 ? k : 1;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < k; ++i) {
      VecC w{rule.nodes[i], dim == 2 ? rule.nodes[j] : 0.0};
      double gw = rule.weights[i] * (dim == 2 ? rule.weights[j] : 1.0);
      double val = gw * ker.rho(w);
      if (val == 0.0) continue;  // outside the support ball
      t.nodes.push_back(w);
      t.w_value.push_back(val);
      VecC g = ker.grad_rho(w);
      t.w_grad.push_back(VecC{gw * g[0], gw * g[1]});
      MatC h = ker.hess_rho(w);
      MatC wh{};
      for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) wh[a][b] = gw * h[a][b];
      t.w_hess.push_back(wh);
      mass += val;
    }
  // discrete unit mass: the discrete M_m becomes a positive average
  for (double& v : t.w_value) v /= mass;
  return t;
}

const KernelTable& kernel_table(int dim, int points_per_axis) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, KernelTable> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(dim, points_per_axis);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, compute_table(dim, points_per_axis)).first;
  return it->second;
}

double mollify_value(const ScalarFieldC& phi, int dim, int m, const VecC& x) {
  const KernelTable& t = kernel_table(dim);
  double inv = 1.0 / m;
  double s = 0;
  for (std::size_t k = 0; k < t.nodes.size(); ++k)
    s += t.w_value[k] * phi(VecC{x[0] - t.nodes[k][0] * inv, x[1] - t.nodes[k][1] * inv});
  return s;
}

VecC mollify_grad(const ScalarFieldC& phi, int dim, int m, const VecC& x) {
  const KernelTable& t = kernel_table(dim);
  double inv = 1.0 / m;
  VecC s{};
  for (std::size_t k = 0; k < t.nodes.size(); ++k) {
    double p = phi(VecC{x[0] - t.nodes[k][0] * inv, x[1] - t.nodes[k][1] * inv});
    s[0] += t.w_grad[k][0] * p;
    s[1] += t.w_grad[k][1] * p;
  }
  return VecC{s[0] * m, s[1] * m};
}

MatC mollify_hess(const ScalarFieldC& phi, int dim, int m, const VecC& x) {
  const KernelTable& t = kernel_table(dim);
  double inv = 1.0 / m;
  MatC s{};
  for (std::size_t k = 0; k < t.nodes.size(); ++k) {
    double p = phi(VecC{x[0] - t.nodes[k][0] * inv, x[1] - t.nodes[k][1] * inv});
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) s[a][b] += t.w_hess[k][a][b] * p;
  }
  double m2 = static_cast<double>(m) * m;
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) s[a][b] *= m2;
  return s;
}

// --- MollifiedChart ---------------------------------------------------------

MollifiedChart::MollifiedChart(const LipschitzChart& base, int m, bool outer)
    : base_(&base), m_(m), outer_(outer) {
  if (m < 1) throw Error("MollifiedChart: m must be >= 1");
  window_ = base.radius - 1.0 / m;
  if (window_ <= 0)
    throw Error("MollifiedChart: m = " + std::to_string(m) +
                " too small for chart radius " + std::to_string(base.radius));
  const int d = base.cdim();
  ScalarFieldC phi = [this](const VecC& y) { return base_->fn.value(y); };

  // sup of |M_m(phi) - phi| over B'_{R-1/m}: coarse grid + local refinement
  auto gap = [&](const VecC& y) { return std::abs(mollify_value(phi, d, m_, y) - base_->fn.value(y)); };
  double best = 0;
  VecC arg{};
  if (d == 1) {
    const int grid = 1025;
    for (int i = 0; i < grid; ++i) {
      VecC y{-window_ + 2 * window_ * i / (grid - 1), 0};
      double g = gap(y);
      if (g > best) {
        best = g;
        arg = y;
      }
    }
  } else {
    const int grid = 65;
    for (int j = 0; j < grid; ++j)
      for (int i = 0; i < grid; ++i) {
        VecC y{-window_ + 2 * window_ * i / (grid - 1), -window_ + 2 * window_ * j / (grid - 1)};
        if (normc(y) > window_) continue;
        double g = gap(y);
        if (g > best) {
          best = g;
          arg = y;
        }
      }
  }
  // coordinate-wise ternary refinement around the grid argmax
  double step = d == 1 ? 2 * window_ / 1024.0 : 2 * window_ / 64.0;
  for (int round = 0; round < 4; ++round) {
    for (int c = 0; c < d; ++c) {
      double lo = arg[c] - step, hi = arg[c] + step;
      for (int it = 0; it < 60; ++it) {
        double m1 = lo + (hi - lo) / 3, m2v = hi - (hi - lo) / 3;
        VecC y1 = arg, y2 = arg;
        y1[c] = m1;
        y2[c] = m2v;
        bool ok1 = normc(y1) <= window_, ok2 = normc(y2) <= window_;
        double g1 = ok1 ? gap(y1) : -1, g2 = ok2 ? gap(y2) : -1;
        if (g1 < g2)
          lo = m1;
        else
          hi = m2v;
      }
      arg[c] = std::clamp(0.5 * (lo + hi), -window_, window_);
      if (normc(arg) > window_) arg = scalec(arg, window_ / normc(arg));
      best = std::max(best, gap(arg));
    }
    step *= 0.25;
  }
  sup_gap_ = best;
  c_m_ = (sup_gap_ + base.lipschitz / m) * (outer ? 1.0 : -1.0);
}

void MollifiedChart::check(const VecC& yp) const {
  if (normc(yp) > window_ * (1.0 + 1e-12) + 1e-15)
    throw Error("MollifiedChart: query outside B'_{R-1/m}");
}

double MollifiedChart::smoothed(const VecC& yp) const {
  check(yp);
  return mollify_value([this](const VecC& y) { return base_->fn.value(y); }, base_->cdim(), m_, yp);
}

double MollifiedChart::value(const VecC& yp) const { return smoothed(yp) + c_m_; }

VecC MollifiedChart::grad(const VecC& yp) const {
  check(yp);
  return mollify_grad([this](const VecC& y) { return base_->fn.value(y); }, base_->cdim(), m_, yp);
}

MatC MollifiedChart::hess(const VecC& yp) const {
  check(yp);
  return mollify_hess([this](const VecC& y) { return base_->fn.value(y); }, base_->cdim(), m_, yp);
}

// --- slab operators -----------------------------------------------------------

FieldN slab_mollify(const FieldN& v, int dim_n, int m) {
  if (dim_n < 2 || dim_n > 3) throw Error("slab_mollify: dim must be 2 or 3");
  const int d = dim_n - 1;
  auto val = v.value;
  FieldN out;
  out.value = [val, d, m, dim_n](const VecN& z) {
    const KernelTable& t = kernel_table(d);
    double inv = 1.0 / m;
    double s = 0;
    for (std::size_t k = 0; k < t.nodes.size(); ++k) {
      VecN q = z;
      q[0] -= t.nodes[k][0] * inv;
      if (d == 2) q[1] -= t.nodes[k][1] * inv;
      s += t.w_value[k] * val(q);
    }
    return s;
  };
  return out;
}

FieldN sqrt_slab(const FieldN& v, int dim_n, int m) {
  if (!v.grad) throw Error("sqrt_slab: field gradient required");
  const int d = dim_n - 1;
  auto val = v.value;
  auto grd = v.grad;

  auto msq = [val, d, m](const VecN& z) {
    const KernelTable& t = kernel_table(d);
    double inv = 1.0 / m;
    double s = 0;
    for (std::size_t k = 0; k < t.nodes.size(); ++k) {
      VecN q = z;
      q[0] -= t.nodes[k][0] * inv;
      if (d == 2) q[1] -= t.nodes[k][1] * inv;
      double f = val(q);
      s += t.w_value[k] * f * f;
    }
    return s;
  };

  FieldN out;
  out.value = [msq](const VecN& z) {
    double s = msq(z);
    if (s < -1e-14) throw Error("sqrt_slab: negative quadrature value");
    return std::sqrt(std::max(0.0, s));
  };
  out.grad = [msq, val, grd, d, m, dim_n](const VecN& z) {
    const KernelTable& t = kernel_table(d);
    double inv = 1.0 / m;
    // in-plane components via kernel derivatives, vertical via M~(d(v^2)/dz_n)
    VecN g{};
    for (std::size_t k = 0; k < t.nodes.size(); ++k) {
      VecN q = z;
      q[0] -= t.nodes[k][0] * inv;
      if (d == 2) q[1] -= t.nodes[k][1] * inv;
      double f = val(q);
      VecN df = grd(q);
      g[0] += t.w_grad[k][0] * f * f;
      if (d == 2) g[1] += t.w_grad[k][1] * f * f;
      g[dim_n - 1] += t.w_value[k] * 2.0 * f * df[dim_n - 1];
    }
    g[0] *= m;
    if (d == 2) g[1] *= m;
    double s = msq(z);
    if (s < -1e-14) throw Error("sqrt_slab: negative quadrature value");
    double root = std::sqrt(std::max(s, 1e-300));
    return scale(g, 0.5 / root);
  };
  return out;
}

}  // namespace lipsmooth
