#include "lipsmooth/partition.hpp"

#include <algorithm>
#include <cmath>

#include "lipsmooth/mollify.hpp"

namespace lipsmooth {

double RadialProfile::value(double s) const {
  if (s >= b + t) return 0.0;
  if (s <= b - t) return 1.0;
  return std::clamp(spline.value(s), 0.0, 1.0);
}
double RadialProfile::deriv(double s) const {
  if (s >= b + t || s <= b - t) return 0.0;
  return spline.deriv(s);
}
double RadialProfile::deriv2(double s) const {
  if (s >= b + t || s <= b - t) return 0.0;
  return spline.deriv2(s);
}

RadialProfile bump_profile(int dim, double kernel_radius, double ball_radius) {
  const double t = kernel_radius, b = ball_radius;
  const MollifierKernel& ker = kernel(dim);
  const double full = dim == 2 ? 2.0 * M_PI : 4.0 * M_PI;
  auto dens = [&](double r) { return ker.rho_radial(r / t) / std::pow(t, dim); };
  // angular measure of {theta : |s e1 - y| <= b} on the sphere |y| = r
  auto slice = [&](double r, double s) {
    double c = (s * s + r * r - b * b) / (2.0 * s * r);
    if (c <= -1.0) return full;
    if (c >= 1.0) return 0.0;
    return dim == 2 ? 2.0 * std::acos(c) : 2.0 * M_PI * (1.0 - c);
  };
  // The slice is kinked in r where the kernel sphere meets the ball rim
  // (r = |s - b|); integrating across the kink would leave quadrature noise
  // that the spline's second derivative amplifies. Split there: below the
  // kink the slice is constant (full or zero).
  auto profile_at = [&](double s) {
    double rstar = std::min(std::abs(s - b), t);
    double acc = 0;
    if (s < b && rstar > 0)
      acc += full * gauss_integrate([&](double r) { return dens(r) * std::pow(r, dim - 1); },
                                    0.0, rstar, 64);
    if (rstar < t)
      acc += gauss_integrate(
          [&](double r) { return dens(r) * std::pow(r, dim - 1) * slice(r, s); }, rstar, t, 64);
    return acc;
  };

  const int samples = 1025;
  double lo = std::max(0.0, b - t), hi = b + t;
  double h = (hi - lo) / (samples - 1);
  std::vector<double> vals(samples);
  for (int i = 0; i < samples; ++i) vals[i] = profile_at(lo + h * i);

  RadialProfile prof;
  prof.t = t;
  prof.b = b;
  prof.spline = CubicSpline(lo, h, std::move(vals));
  return prof;
}

BumpFamily BumpFamily::build(const DomainAtlas& atlas) {
  if (!atlas.sdf) throw Error("build_bumps: atlas has no signed distance evaluator");
  const double R = atlas.R();
  BumpFamily fam;
  fam.atlas_ = &atlas;
  fam.prof_ = bump_profile(atlas.dim, R / 32.0, 3.0 * R / 16.0);
  fam.eta0_t_ = R / 64.0;
  fam.eta0_erode_ = 3.0 * R / 64.0;
  fam.ramp_w_ = R / 512.0;

  // cumulative marginal q(u) = integral over {w . e1 < u} of the unit kernel:
  // the exact profile of a mollified half-space indicator, used when the sdf
  // is smooth across the transition shell
  {
    const MollifierKernel& ker = kernel(atlas.dim);
    const int samples = 2049;
    std::vector<double> marg(samples);
    for (int i = 0; i < samples; ++i) {
      double a = -1.0 + 2.0 * i / (samples - 1);
      double span = std::sqrt(std::max(0.0, 1.0 - a * a));
      if (atlas.dim == 2)
        marg[i] = 2.0 * gauss_integrate(
                            [&](double b) { return ker.rho_radial(std::hypot(a, b)); }, 0.0,
                            span, 48);
      else
        marg[i] = 2.0 * M_PI *
                  gauss_integrate(
                      [&](double r) { return ker.rho_radial(std::hypot(a, r)) * r; }, 0.0, span,
                      48);
    }
    // cumulative trapezoid, normalized to end exactly at 1
    std::vector<double> cum(samples, 0.0);
    double h = 2.0 / (samples - 1);
    for (int i = 1; i < samples; ++i) cum[i] = cum[i - 1] + 0.5 * h * (marg[i - 1] + marg[i]);
    double total = cum.back();
    for (double& v : cum) v /= total;
    fam.eta0_flat_ = CubicSpline(-1.0, h, std::move(cum));
  }

  // covering check
  std::vector<int> act;
  for (const VecN& bpt : atlas.boundary_samples) {
    atlas.active_charts(bpt, act);
    bool ok = false;
    for (int i : act)
      if (dist(bpt, atlas.centers[i]) <= R / 8.0) {
        ok = true;
        break;
      }
    if (!ok) throw Error("build_bumps: covering violated at a boundary sample");
  }
  // erosion nonempty: probe the sample centroid and an inward-normal point
  VecN centroid{};
  for (const VecN& bpt : atlas.boundary_samples) centroid = add(centroid, bpt);
  centroid = scale(centroid, 1.0 / static_cast<double>(atlas.boundary_samples.size()));
  VecN inward = sub(atlas.centers.front(),
                    scale(atlas.charts.front().frame.vertical(), R / 12.0));
  if (atlas.sdf(centroid) <= R / 16.0 && atlas.sdf(inward) <= R / 16.0)
    throw Error("build_bumps: erosion empty (domain thinner than R/16 at the probes)");
  return fam;
}

double BumpFamily::eta(int i, const VecN& x) const {
  if (i == 0) return eta0(x);
  if (i < 1 || i > atlas_->size()) throw Error("eta: index out of range");
  return prof_.value(dist(x, atlas_->centers[i - 1]));
}

double BumpFamily::eta0_zero_below() const { return eta0_erode_ - eta0_t_; }
double BumpFamily::eta0_one_above() const { return eta0_erode_ + eta0_t_ + ramp_w_; }

double BumpFamily::eta0(const VecN& x) const {
  double d = atlas_->sdf(x);
  if (d <= eta0_zero_below()) return 0.0;
  if (d >= eta0_one_above()) return 1.0;
  if (atlas_->sdf_smooth_in_shell) {
    // exact flat-boundary profile: the kernel's cumulative marginal at the
    // (rescaled) signed distance past the erosion level
    double u = (d - eta0_erode_) / eta0_t_;
    return std::clamp(eta0_flat_.value(u), 0.0, 1.0);
  }
  // quadrature of the mollifier against the (ramped) eroded indicator
  const int n = atlas_->dim;
  const int K = n == 2 ? 32 : 16;
  const GaussRule& rule = gauss_legendre(K);
  const MollifierKernel& ker = kernel(n);
  double mass = 0, acc = 0;
  int nz = n == 3 ? K : 1;
  for (int c = 0; c < nz; ++c)
    for (int b = 0; b < K; ++b)
      for (int a = 0; a < K; ++a) {
        VecN w{rule.nodes[a], rule.nodes[b], n == 3 ? rule.nodes[c] : 0.0};
        double r = norm(w);
        double rho = ker.rho_radial(r);
        if (rho == 0.0) continue;
        double gw = rule.weights[a] * rule.weights[b] * (n == 3 ? rule.weights[c] : 1.0);
        mass += gw * rho;
        VecN y = sub(x, scale(w, eta0_t_));
        double u = (atlas_->sdf(y) - eta0_erode_) / ramp_w_;
        double ind = u <= 0 ? 0.0 : (u >= 1 ? 1.0 : u * u * (3.0 - 2.0 * u));
        acc += gw * rho * ind;
      }
  return acc / mass;
}

double BumpFamily::sum_eta(const VecN& x) const {
  std::vector<int> act;
  atlas_->active_charts(x, act);
  double s = eta0(x);
  for (int i : act) s += prof_.value(dist(x, atlas_->centers[i]));
  return s;
}

double BumpFamily::xi(int i, const VecN& x) const {
  double s = sum_eta(x);
  if (s <= 1e-12) throw Error("xi: sum of bumps vanishes (x outside W)");
  return eta(i, x) / s;
}

BumpFamily::XiJet BumpFamily::xi_jet(const VecN& x) const {
  const int n = atlas_->dim;
  double d = atlas_->sdf(x);
  double x0;
  if (d <= eta0_zero_below())
    x0 = 0.0;
  else if (d >= eta0_one_above())
    x0 = 1.0;
  else
    throw Error("xi_jet: x lies in the interior bump's transition shell");

  XiJet jet;
  atlas_->active_charts(x, jet.active);
  double S = x0;
  VecN gS{};
  MatN hS{};
  std::vector<double> ev;
  std::vector<VecN> gv;
  std::vector<MatN> hv;
  std::vector<int> kept;
  for (int i : jet.active) {
    VecN delta = sub(x, atlas_->centers[i]);
    double s = norm(delta);
    double v = prof_.value(s);
    if (v == 0.0 && prof_.deriv(s) == 0.0) continue;
    VecN u = s > 1e-14 ? scale(delta, 1.0 / s) : VecN{1, 0, 0};
    double p1 = prof_.deriv(s), p2 = prof_.deriv2(s);
    VecN g = scale(u, p1);
    MatN h{};
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double uu = u[a] * u[b];
        h[a][b] = p2 * uu + (s > 1e-14 ? p1 * (((a == b) ? 1.0 : 0.0) - uu) / s : 0.0);
      }
    kept.push_back(i);
    ev.push_back(v);
    gv.push_back(g);
    hv.push_back(h);
    S += v;
    gS = add(gS, g);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) hS[a][b] += h[a][b];
  }
  if (S <= 1e-12) throw Error("xi_jet: sum of bumps vanishes (x outside W)");

  jet.active = kept;
  jet.sum = S;
  jet.xi0 = x0 / S;
  jet.sigma = 1.0 - jet.xi0;
  const double S2 = S * S, S3 = S2 * S;
  for (std::size_t k = 0; k < kept.size(); ++k) {
    jet.value.push_back(ev[k] / S);
    VecN g{};
    for (int a = 0; a < n; ++a) g[a] = gv[k][a] / S - ev[k] * gS[a] / S2;
    jet.grad.push_back(g);
    MatN h{};
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        h[a][b] = hv[k][a][b] / S - (gv[k][a] * gS[b] + gS[a] * gv[k][b]) / S2 -
                  ev[k] * hS[a][b] / S2 + 2.0 * ev[k] * gS[a] * gS[b] / S3;
    jet.hess.push_back(h);
  }
  return jet;
}

BumpFamily::BoundReport BumpFamily::measure_derivative_bounds(int per_chart) const {
  const double R = atlas_->R();
  BoundReport rep;
  Rng rng(0xb0bb1e5);
  for (int i = 0; i < atlas_->size(); ++i) {
    for (int p = 0; p < per_chart; ++p) {
      // points near the chart center, pushed slightly off the boundary along
      // the frame vertical so they sit in the band (eta0 == 0 there)
      const LipschitzChart& ch = atlas_->charts[i];
      VecC yp{};
      for (int k = 0; k < ch.cdim(); ++k) yp[k] = rng.uniform(-R / 8, R / 8);
      if (normc(yp) > R / 8) yp = scalec(yp, R / 8 / normc(yp));
      double off = rng.uniform(-R / 64, R / 64);
      VecN y{yp[0], ch.cdim() == 2 ? yp[1] : 0.0, 0};
      y[atlas_->dim - 1] = ch.eval(yp) + off;
      VecN x = ch.frame.inverse(y);
      if (std::abs(atlas_->sdf(x)) >= eta0_zero_below()) continue;
      XiJet jet = xi_jet(x);
      for (std::size_t k = 0; k < jet.active.size(); ++k) {
        rep.sup_grad_scaled = std::max(rep.sup_grad_scaled, norm(jet.grad[k]) * R);
        double fr = 0;
        for (int a = 0; a < atlas_->dim; ++a)
          for (int b = 0; b < atlas_->dim; ++b) fr += jet.hess[k][a][b] * jet.hess[k][a][b];
        rep.sup_hess_scaled = std::max(rep.sup_hess_scaled, std::sqrt(fr) * R * R);
      }
      ++rep.samples;
    }
  }
  return rep;
}

}  // namespace lipsmooth
