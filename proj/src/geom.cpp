#include "lipsmooth/geom.hpp"

#include <algorithm>
#include <cmath>

namespace lipsmooth {

double ReferenceFrame::orthogonality_defect() const {
  MatN g = matmul(rotation, transpose(rotation));
  double worst = 0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) worst = std::max(worst, std::abs(g[i][j] - (i == j ? 1.0 : 0.0)));
  return worst;
}

LipschitzCharacteristic LipschitzCharacteristic::make(double L, double R, double diameter) {
  if (!(L > 0)) throw Error("LipschitzCharacteristic: L must be > 0");
  if (!(R > 0 && R < 1)) throw Error("LipschitzCharacteristic: R must be in (0,1)");
  if (!(diameter > 0)) throw Error("LipschitzCharacteristic: diameter must be > 0");
  LipschitzCharacteristic c;
  c.L = L;
  c.R = R;
  c.ell = R * (1.0 + L);
  c.diameter = diameter;
  return c;
}

double LipschitzChart::eval(const VecC& yp) const {
  if (normc(yp) > radius * (1.0 + 1e-9))
    throw Error("chart evaluated outside B'_R (|y'|=" + std::to_string(normc(yp)) +
                ", R=" + std::to_string(radius) + ")");
  return fn.value(yp);
}

VecC LipschitzChart::grad(const VecC& yp) const {
  if (fn.grad) return fn.grad(yp);
  double h = radius * 1e-6;
  VecC g{};
  for (int k = 0; k < cdim(); ++k) {
    VecC a = yp, b = yp;
    a[k] += h;
    b[k] -= h;
    g[k] = (fn.value(a) - fn.value(b)) / (2 * h);
  }
  return g;
}

MatC LipschitzChart::hess(const VecC& yp) const {
  if (fn.hess) return fn.hess(yp);
  double h = radius * 1e-4;
  MatC H{};
  const int d = cdim();
  double f0 = fn.value(yp);
  for (int k = 0; k < d; ++k) {
    VecC a = yp, b = yp;
    a[k] += h;
    b[k] -= h;
    H[k][k] = (fn.value(a) - 2 * f0 + fn.value(b)) / (h * h);
  }
  if (d == 2) {
    VecC pp = yp, pm = yp, mp = yp, mm = yp;
    pp[0] += h; pp[1] += h;
    pm[0] += h; pm[1] -= h;
    mp[0] -= h; mp[1] += h;
    mm[0] -= h; mm[1] -= h;
    H[0][1] = H[1][0] = (fn.value(pp) - fn.value(pm) - fn.value(mp) + fn.value(mm)) / (4 * h * h);
  }
  return H;
}

VecN LipschitzChart::surface_point(const VecC& yp) const {
  VecN y{};
  y[0] = yp[0];
  if (cdim() == 2) y[1] = yp[1];
  y[frame.dim - 1] = eval(yp);
  return frame.inverse(y);
}

// --- GridChart -----------------------------------------------------------

GridChart::GridChart(int cdim, VecC lo, double h, int nx, int ny, std::vector<double> values)
    : cdim_(cdim), nx_(nx), ny_(cdim == 2 ? ny : 1), lo_(lo), h_(h), v_(std::move(values)) {
  if (static_cast<int>(v_.size()) != nx_ * ny_) throw Error("GridChart: size mismatch");
}

namespace {
// Catmull-Rom weights for parameter t in [0,1]
inline void cr_weights(double t, double w[4]) {
  double t2 = t * t, t3 = t2 * t;
  w[0] = 0.5 * (-t3 + 2 * t2 - t);
  w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
  w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
  w[3] = 0.5 * (t3 - t2);
}
}  // namespace

double GridChart::value1(double x) const {
  double u = (x - lo_[0]) / h_;
  u = std::clamp(u, 0.0, static_cast<double>(nx_ - 1));
  int i = std::clamp(static_cast<int>(u), 0, nx_ - 2);
  double t = u - i;
  double w[4];
  cr_weights(t, w);
  auto at = [&](int k) { return v_[std::clamp(k, 0, nx_ - 1)]; };
  return w[0] * at(i - 1) + w[1] * at(i) + w[2] * at(i + 1) + w[3] * at(i + 2);
}

double GridChart::value2(double x, double y) const {
  double u = std::clamp((x - lo_[0]) / h_, 0.0, static_cast<double>(nx_ - 1));
  double v = std::clamp((y - lo_[1]) / h_, 0.0, static_cast<double>(ny_ - 1));
  int i = std::clamp(static_cast<int>(u), 0, nx_ - 2);
  int j = std::clamp(static_cast<int>(v), 0, ny_ - 2);
  double wu[4], wv[4];
  cr_weights(u - i, wu);
  cr_weights(v - j, wv);
  double s = 0;
  for (int b = 0; b < 4; ++b) {
    int jj = std::clamp(j - 1 + b, 0, ny_ - 1);
    double row = 0;
    for (int a = 0; a < 4; ++a) {
      int ii = std::clamp(i - 1 + a, 0, nx_ - 1);
      row += wu[a] * v_[idx(ii, jj)];
    }
    s += wv[b] * row;
  }
  return s;
}

double GridChart::value(const VecC& p) const {
  return cdim_ == 1 ? value1(p[0]) : value2(p[0], p[1]);
}

ChartFn GridChart::as_fn() const {
  GridChart copy = *this;
  ChartFn fn;
  fn.value = [copy](const VecC& p) { return copy.value(p); };
  return fn;
}

// --- SpatialChartIndex ----------------------------------------------------

SpatialChartIndex::SpatialChartIndex(const std::vector<VecN>& centers, double reach, int dim)
    : cell_(std::max(reach, 1e-12)), reach_(reach), dim_(dim) {
  auto cell_of = [&](double v) { return static_cast<int64_t>(std::floor(v / cell_)); };
  for (int idx = 0; idx < static_cast<int>(centers.size()); ++idx) {
    const VecN& c = centers[idx];
    int64_t zlo = dim_ == 3 ? cell_of(c[2] - reach_) : 0;
    int64_t zhi = dim_ == 3 ? cell_of(c[2] + reach_) : 0;
    for (int64_t gx = cell_of(c[0] - reach_); gx <= cell_of(c[0] + reach_); ++gx)
      for (int64_t gy = cell_of(c[1] - reach_); gy <= cell_of(c[1] + reach_); ++gy)
        for (int64_t gz = zlo; gz <= zhi; ++gz) {
          int64_t k = ((gx * 73856093) ^ (gy * 19349663) ^ (gz * 83492791));
          cells_[k].push_back(idx);
        }
  }
}

int64_t SpatialChartIndex::key(const VecN& x) const {
  auto cell_of = [&](double v) { return static_cast<int64_t>(std::floor(v / cell_)); };
  int64_t gx = cell_of(x[0]), gy = cell_of(x[1]), gz = dim_ == 3 ? cell_of(x[2]) : 0;
  return ((gx * 73856093) ^ (gy * 19349663) ^ (gz * 83492791));
}

void SpatialChartIndex::query(const VecN& x, std::vector<int>& out) const {
  out.clear();
  auto it = cells_.find(key(x));
  if (it == cells_.end()) return;
  out = it->second;
}

// --- DomainAtlas ----------------------------------------------------------

void DomainAtlas::build_index() {
  index_ = SpatialChartIndex(centers, 7.0 * R() / 32.0 + 1e-12, dim);
}

void DomainAtlas::active_charts(const VecN& x, std::vector<int>& out) const {
  index_.query(x, out);
  double reach2 = index_.reach() * index_.reach();
  out.erase(std::remove_if(out.begin(), out.end(),
                           [&](int i) {
                             VecN d = sub(x, centers[i]);
                             return dot(d, d) > reach2;
                           }),
            out.end());
  std::sort(out.begin(), out.end());
  // hash-bucket collisions can list an index more than once
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

void DomainAtlas::validate(int pairs_per_chart) const {
  const double Lc = L();
  for (int i = 0; i < size(); ++i) {
    const LipschitzChart& ch = charts[i];
    if (ch.frame.orthogonality_defect() > 1e-12)
      throw Error("atlas: frame " + std::to_string(i) + " not orthogonal");
    if (std::abs(ch.eval(VecC{})) > 1e-12)
      throw Error("atlas: chart " + std::to_string(i) + " has phi(0') != 0");
    VecN y0 = ch.frame.forward(centers[i]);
    if (norm(y0) > 1e-10)
      throw Error("atlas: center " + std::to_string(i) + " not at frame origin");

    Rng rng(0x5eed0 + i);
    const int d = ch.cdim();
    for (int p = 0; p < pairs_per_chart; ++p) {
      VecC a{}, b{};
      for (int k = 0; k < d; ++k) {
        a[k] = rng.uniform(-1, 1);
        b[k] = rng.uniform(-1, 1);
      }
      double ra = normc(a), rb = normc(b);
      if (ra > 1e-12) a = scalec(a, rng.uniform() * ch.radius / ra);
      if (rb > 1e-12) b = scalec(b, rng.uniform() * ch.radius / rb);
      ra = normc(a);
      double fa = ch.eval(a), fb = ch.eval(b);
      double gap = normc(subc(a, b));
      if (std::abs(fa - fb) > Lc * gap * (1.0 + 1e-9) + 1e-14)
        throw Error("atlas: chart " + std::to_string(i) + " violates L-Lipschitz bound");
      if (std::abs(fa) > Lc * ra * (1.0 + 1e-9) + 1e-14)
        throw Error("atlas: chart " + std::to_string(i) + " violates |phi| <= L|y'|");
      if (std::abs(fa) >= characteristic.ell)
        throw Error("atlas: chart " + std::to_string(i) + " exits (-ell, ell)");
    }
  }
  // covering: every boundary sample within R/8 of some center
  double r8 = R() / 8.0;
  std::vector<int> act;
  for (const VecN& b : boundary_samples) {
    active_charts(b, act);  // reach 7R/32 > R/8
    bool covered = false;
    for (int ci : act)
      if (dist(b, centers[ci]) <= r8) {
        covered = true;
        break;
      }
    if (!covered) throw Error("atlas: covering violated at a boundary sample");
  }
  double dR = characteristic.diameter / R();
  double bound = 64.0 * std::pow(dR, dim);
  if (size() > bound) throw Error("atlas: cardinality exceeds 64 (d/R)^n");
  if (!(eps0 > 0 && eps0 < R() / 4.0)) throw Error("atlas: eps0 out of (0, R/4)");
}

// --- operations -----------------------------------------------------------

double transversality_margin(const LipschitzChart& chart, const VecN& direction,
                             int samples_per_axis) {
  double dn = norm(direction);
  if (dn < 1e-14) throw Error("transversality_margin: zero direction");
  if (samples_per_axis < 3) throw Error("transversality_margin: need >= 3 samples per axis");
  VecN n = scale(direction, 1.0 / dn);
  const int d = chart.cdim();
  // interior grid; stay one step away from the rim so FD gradients fit
  double r = chart.radius * 0.995;
  double best = 2.0;
  int ny = d == 2 ? samples_per_axis : 1;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < samples_per_axis; ++i) {
      VecC yp{};
      yp[0] = -r + 2.0 * r * i / (samples_per_axis - 1);
      if (d == 2) yp[1] = -r + 2.0 * r * j / (samples_per_axis - 1);
      if (normc(yp) > r) continue;
      VecC g = chart.grad(yp);
      double s = std::sqrt(1.0 + dotc(g, g));
      double m = (-g[0] * n[0] - (d == 2 ? g[1] * n[1] : 0.0) + n[chart.frame.dim - 1]) / s;
      best = std::min(best, m);
    }
  return best;
}

LipschitzChart regraph(const LipschitzChart& chart, const ReferenceFrame& iso, VecC window_lo,
                       VecC window_hi, int res) {
  const int n = chart.frame.dim;
  const int d = n - 1;
  VecN vert = iso.vertical();  // target vertical axis in source coordinates
  double kappa = transversality_margin(chart, vert);
  // kappa > 0 guarantees a unique monotone crossing (rate >= kappa, eq-style
  // lower bound on d ftilde/d z_n). A marginal chart (kappa == 0, e.g. a corner
  // arm turning vertical) is still accepted where the crossing is unique; the
  // per-node scan below enforces uniqueness either way.

  const double ell = chart.radius * (1.0 + chart.lipschitz) * 2.0;
  auto ftilde = [&](const VecC& zp, double zn) {
    VecN z{};
    z[0] = zp[0];
    if (d == 2) z[1] = zp[1];
    z[n - 1] = zn;
    VecN y = iso.inverse(z);  // source chart coordinates
    VecC ypp{y[0], d == 2 ? y[1] : 0.0};
    if (normc(ypp) > chart.radius)
      throw Error("regraph: window exits the source cylinder");
    return y[n - 1] - chart.fn.value(ypp);
  };

  int nx = res, ny = d == 2 ? res : 1;
  double hx = (window_hi[0] - window_lo[0]) / (nx - 1);
  if (d == 2 && std::abs((window_hi[1] - window_lo[1]) / (ny - 1) - hx) > 1e-12 * hx)
    throw Error("regraph: window must be square");
  std::vector<double> vals(static_cast<size_t>(nx) * ny);
  const int scan = 256;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      VecC zp{window_lo[0] + hx * i, d == 2 ? window_lo[1] + hx * j : 0.0};
      double lo = 0, hi = 0;
      int crossings = 0;
      double prev_t = -ell, prev_f = ftilde(zp, prev_t);
      for (int s = 1; s <= scan; ++s) {
        double t = -ell + 2.0 * ell * s / scan;
        double f = ftilde(zp, t);
        if ((prev_f <= 0 && f > 0) || (prev_f >= 0 && f < 0)) {
          ++crossings;
          lo = prev_t;
          hi = t;
        }
        prev_t = t;
        prev_f = f;
      }
      if (crossings == 0)
        throw Error(kappa > 0 ? "regraph: no root in the vertical segment"
                              : "regraph: margin <= 0 and no crossing (not graphical)");
      if (crossings > 1 && !(kappa > 0))
        throw Error("regraph: margin <= 0, multiple crossings (not graphical in target frame)");
      double flo = ftilde(zp, lo);
      for (int it = 0; it < 90 && hi - lo > 1e-15 * ell; ++it) {
        double mid = 0.5 * (lo + hi), fm = ftilde(zp, mid);
        if ((flo <= 0 && fm > 0) || (flo >= 0 && fm < 0)) {
          hi = mid;
        } else {
          lo = mid;
          flo = fm;
        }
      }
      vals[static_cast<size_t>(j) * nx + i] = 0.5 * (lo + hi);
    }

  // sqrt(1-k^2)/k equals L when k = 1/sqrt(1+L^2); for marginal charts fall
  // back to the measured grid slope
  double out_L;
  if (kappa > 1e-12) {
    out_L = std::sqrt(std::max(0.0, 1.0 - kappa * kappa)) / kappa;
  } else {
    double worst = 0;
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i + 1 < nx; ++i)
        worst = std::max(worst, std::abs(vals[static_cast<size_t>(j) * nx + i + 1] -
                                         vals[static_cast<size_t>(j) * nx + i]) /
                                    hx);
    if (d == 2)
      for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i < nx; ++i)
          worst = std::max(worst, std::abs(vals[static_cast<size_t>(j + 1) * nx + i] -
                                           vals[static_cast<size_t>(j) * nx + i]) /
                                      hx);
    out_L = worst;
  }

  GridChart grid(d, window_lo, hx, nx, ny, std::move(vals));
  LipschitzChart out;
  out.frame.dim = n;
  // z = iso.rotation (y - iso.base), y = R_src (x - base_src), so the world
  // frame is Rot = iso.rotation R_src with base x0 = base_src + R_src^T iso.base.
  out.frame.rotation = matmul(iso.rotation, chart.frame.rotation);
  out.frame.base = add(chart.frame.base, matvecT(chart.frame.rotation, iso.base));
  out.lipschitz = out_L;
  // honest eval domain: the ball inscribed in the window
  double r = std::min(std::abs(window_lo[0]), std::abs(window_hi[0]));
  if (d == 2) r = std::min({r, std::abs(window_lo[1]), std::abs(window_hi[1])});
  out.radius = r;
  out.fn = grid.as_fn();
  return out;
}

TransitionResult transition_eval(const DomainAtlas& atlas, int i, int j, const VecC& yp) {
  if (i < 0 || i >= atlas.size() || j < 0 || j >= atlas.size())
    throw Error("transition_eval: chart index out of range");
  const LipschitzChart& ci = atlas.charts[i];
  const LipschitzChart& cj = atlas.charts[j];
  double win = atlas.R() - 2.0 * atlas.eps0;
  if (normc(yp) > win)
    throw Error("transition_eval: y' outside B'_{R-2eps0}");
  VecN x = ci.surface_point(yp);
  VecN z = cj.frame.forward(x);
  VecC zp{z[0], atlas.dim == 3 ? z[1] : 0.0};
  if (normc(zp) > atlas.R())
    throw Error("transition_eval: mapped point exits B'_R of chart j");
  double mismatch = std::abs(z[atlas.dim - 1] - cj.eval(zp));
  if (mismatch > 1e-6 * atlas.ell())
    throw Error("transition_eval: y' outside V^{i,j} (graphs disagree)");
  return TransitionResult{zp, x, mismatch};
}

std::vector<int> greedy_cover(const std::vector<VecN>& samples, double radius) {
  const int s = static_cast<int>(samples.size());
  if (s == 0) throw Error("greedy_cover: empty sample set");
  std::vector<int> picked;
  std::vector<double> mind(s, 1e300);
  // Samples with mind <= radius are covered for good; they can never become
  // the farthest point again, so they are dropped from the scan.
  std::vector<int> active(s);
  for (int i = 0; i < s; ++i) active[i] = i;
  int next = 0;
  for (;;) {
    picked.push_back(next);
    const VecN& c = samples[next];
    double worst = 0;
    int arg = -1;
    std::size_t w = 0;
    for (std::size_t r = 0; r < active.size(); ++r) {
      int k = active[r];
      double dk = dist(samples[k], c);
      if (dk < mind[k]) mind[k] = dk;
      if (mind[k] <= radius) continue;  // covered, retire
      active[w++] = k;
      if (mind[k] > worst) {
        worst = mind[k];
        arg = k;
      }
    }
    active.resize(w);
    if (arg < 0) break;
    next = arg;
  }
  return picked;
}

}  // namespace lipsmooth
