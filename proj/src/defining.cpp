#include "lipsmooth/defining.hpp"

#include <algorithm>
#include <cmath>

namespace lipsmooth {

DefiningField::DefiningField(const DomainAtlas& atlas, const BumpFamily& bumps, FieldKind kind,
                             int m)
    : atlas_(&atlas), bumps_(&bumps), kind_(kind), m_(m) {
  if (kind != FieldKind::exact && m < 1) throw Error("DefiningField: variant requires m >= 1");
  if (kind != FieldKind::exact) terms_.resize(atlas.size());
}

const MollifiedChart& DefiningField::term(int j) const {
  if (kind_ == FieldKind::exact) throw Error("term: exact field has no mollified terms");
  if (j < 0 || j >= atlas_->size()) throw Error("term: chart index out of range");
  {
    std::lock_guard<std::mutex> lock(terms_mu_);
    if (!terms_[j])
      terms_[j] = std::make_unique<MollifiedChart>(atlas_->charts[j], m_,
                                                   kind_ == FieldKind::outer);
  }
  return *terms_[j];
}

double DefiningField::chart_value(int j, const VecC& zp) const {
  if (kind_ == FieldKind::exact) return atlas_->charts[j].eval(zp);
  return term(j).value(zp);
}

double DefiningField::value(const VecN& x) const {
  double sigma;
  return value_and_sigma(x, sigma);
}

double DefiningField::value_and_sigma(const VecN& x, double& sigma) const {
  std::vector<int> act;
  atlas_->active_charts(x, act);
  double eta0 = bumps_->eta0(x);
  double S = eta0, acc = 0;
  double win = kind_ == FieldKind::exact ? atlas_->R() : atlas_->R() - 1.0 / m_;
  for (int j : act) {
    double e = bumps_->eta(j + 1, x);
    if (e == 0.0) continue;
    VecN z = atlas_->charts[j].frame.forward(x);
    VecC zp{z[0], atlas_->dim == 3 ? z[1] : 0.0};
    if (normc(zp) > win)
      throw Error("defining: chart term " + std::to_string(j) +
                  " needs z' outside its window while xi_j > 0");
    acc += (z[atlas_->dim - 1] - chart_value(j, zp)) * e;
    S += e;
  }
  if (S <= 1e-12) throw Error("defining: x outside W (all bumps vanish)");
  sigma = (S - eta0) / S;
  return (acc - eta0) / S;
}

DefiningField::Jet DefiningField::jet(const VecN& x, bool with_hessian) const {
  const int n = atlas_->dim;
  BumpFamily::XiJet xis = bumps_->xi_jet(x);
  double win = kind_ == FieldKind::exact ? atlas_->R() : atlas_->R() - 1.0 / m_;

  Jet out;
  out.value = -xis.xi0;
  for (std::size_t k = 0; k < xis.active.size(); ++k) {
    int j = xis.active[k];
    const LipschitzChart& ch = atlas_->charts[j];
    VecN z = ch.frame.forward(x);
    VecC zp{z[0], n == 3 ? z[1] : 0.0};
    if (normc(zp) > win)
      throw Error("defining: chart term " + std::to_string(j) +
                  " needs z' outside its window while xi_j > 0");

    double phi;
    VecC gphi;
    MatC hphi{};
    if (kind_ == FieldKind::exact) {
      phi = ch.eval(zp);
      gphi = ch.grad(zp);
      if (with_hessian) hphi = ch.hess(zp);
    } else {
      const MollifiedChart& mc = term(j);
      phi = mc.value(zp);
      gphi = mc.grad(zp);
      if (with_hessian) hphi = mc.hess(zp);
    }
    double f = z[n - 1] - phi;

    // world gradient of f^j: (R^j)^T (-grad phi, 1); gphi[1] is 0 when d = 1
    VecN gf_local{-gphi[0], -gphi[1], 0.0};
    gf_local[n - 1] = 1.0;
    VecN gf = matvecT(ch.frame.rotation, gf_local);

    out.value += f * xis.value[k];
    for (int a = 0; a < n; ++a)
      out.grad[a] += gf[a] * xis.value[k] + f * xis.grad[k][a];

    if (with_hessian) {
      // world hessian of f^j: -(R^j)^T_{s.} Hphi_{st} (R^j)_{t.}
      MatN hf{};
      const int d = n - 1;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          double s = 0;
          for (int p = 0; p < d; ++p)
            for (int q = 0; q < d; ++q)
              s += hphi[p][q] * ch.frame.rotation[p][a] * ch.frame.rotation[q][b];
          hf[a][b] = -s;
        }
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          out.hess[a][b] += hf[a][b] * xis.value[k] + gf[a] * xis.grad[k][b] +
                            xis.grad[k][a] * gf[b] + f * xis.hess[k][a][b];
    }
  }
  return out;
}

double DefiningField::vertical_derivative(const VecN& x, const ReferenceFrame& frame) const {
  Jet j = jet(x, false);
  return dot(j.grad, frame.vertical());
}

Classification classify(const DefiningTriple& t, const VecN& x) {
  Classification c;
  double sigma;
  try {
    c.F = t.exact.value_and_sigma(x, sigma);
  } catch (const Error&) {
    // outside W entirely: either deep outside (no bump) -> outside Omega_m
    c.region = Region::outside;
    c.in_domain = false;
    return c;
  }
  c.in_domain = true;
  c.Fm = t.outer.value(x);
  c.Ftm = t.inner.value(x);
  c.boundary_band = c.Fm < 0 && c.Ftm > 0;
  if (c.Ftm < 0)
    c.region = Region::core;
  else if (c.F < 0)
    c.region = Region::inner_shell;
  else if (c.Fm < 0)
    c.region = Region::outer_shell;
  else
    c.region = Region::outside;
  return c;
}

SandwichStats sandwich_check(const DefiningTriple& t, long n_samples, uint64_t seed) {
  const DomainAtlas& atlas = t.exact.atlas();
  // bounding box of the boundary samples, padded by R/2
  VecN lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  for (const VecN& b : atlas.boundary_samples)
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], b[a]);
      hi[a] = std::max(hi[a], b[a]);
    }
  for (int a = 0; a < atlas.dim; ++a) {
    lo[a] -= atlas.R() / 2;
    hi[a] += atlas.R() / 2;
  }
  const double Lm = atlas.L() / t.outer.m();
  SandwichStats st;
  Rng rng(seed);
  for (long s = 0; s < n_samples; ++s) {
    VecN x{};
    for (int a = 0; a < atlas.dim; ++a) x[a] = rng.uniform(lo[a], hi[a]);
    ++st.samples;
    double sigma;
    double F, Fm, Ftm;
    try {
      F = t.exact.value_and_sigma(x, sigma);
      Fm = t.outer.value(x);
      Ftm = t.inner.value(x);
    } catch (const Error&) {
      ++st.outside;
      continue;
    }
    if (!(Fm <= F && F <= Ftm)) ++st.order_violations;
    double dlo = (F - Fm) - sigma * Lm;            // must be >= 0
    double dhi = 3.0 * sigma * Lm - (F - Fm);      // must be >= 0
    double dlo2 = (Ftm - F) - sigma * Lm;
    double dhi2 = 3.0 * sigma * Lm - (Ftm - F);
    double defect = std::min({dlo, dhi, dlo2, dhi2});
    if (defect < -1e-12) {
      ++st.band_violations;
      st.max_band_defect = std::max(st.max_band_defect, -defect);
    }
    bool omega_in = Ftm < 0, Om = F < 0, OM = Fm < 0;
    if ((omega_in && !Om) || (Om && !OM)) ++st.containment_violations;
  }
  return st;
}

// --- extraction ---------------------------------------------------------------

namespace {

struct RootSolve {
  double t = 0;
  bool found = false;
};

// Finds the unique zero of kind-field along the vertical of frame i above or
// below phi^i(y').
RootSolve solve_vertical(const DefiningField& df, const LipschitzChart& ch, const VecC& yp) {
  const DomainAtlas& atlas = df.atlas();
  const int n = atlas.dim;
  const double L = atlas.L();
  const double ell = atlas.ell();
  const bool outer = df.kind() == FieldKind::outer;
  const double dir = outer ? 1.0 : -1.0;

  auto field_at = [&](double tt) {
    VecN y{yp[0], n == 3 ? yp[1] : 0.0, 0.0};
    y[n - 1] = tt;
    return df.value(ch.frame.inverse(y));
  };

  double t0 = ch.eval(yp);
  double f0 = field_at(t0);
  // at the base graph the variant has sign -dir (F=0 there, band offset)
  if (f0 * dir > 0) throw Error("extract: field has unexpected sign on the base graph");

  double reach = 12.0 * L * std::sqrt(1.0 + L * L) / df.m();
  double step = std::max(reach / 8.0, 1e-3 * ell);
  double prev_t = t0, prev_f = f0, bracket_lo = 0, bracket_hi = 0;
  bool found = false;
  for (double tt = t0 + dir * step;; tt += dir * step) {
    if (std::abs(tt) >= ell)
      throw Error("extract: no sign change inside (-ell, ell) (m below m0?)");
    double f = field_at(tt);
    if (f * dir >= 0) {
      bracket_lo = std::min(prev_t, tt);
      bracket_hi = std::max(prev_t, tt);
      found = true;
      break;
    }
    prev_t = tt;
    prev_f = f;
  }
  (void)prev_f;
  if (!found) throw Error("extract: bracket not found");

  // bisection to 1e-3 ell
  double lo = bracket_lo, hi = bracket_hi;
  double flo = field_at(lo);
  while (hi - lo > 1e-3 * ell) {
    double mid = 0.5 * (lo + hi), fm = field_at(mid);
    if ((flo <= 0 && fm > 0) || (flo > 0 && fm <= 0))
      hi = mid;
    else {
      lo = mid;
      flo = fm;
    }
  }
  // safeguarded Newton with the analytic vertical derivative
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 60; ++it) {
    VecN y{yp[0], n == 3 ? yp[1] : 0.0, 0.0};
    y[n - 1] = t;
    VecN x = ch.frame.inverse(y);
    double f = df.value(x);
    double dv = df.vertical_derivative(x, ch.frame);
    if (!(dv > 1e-12)) throw Error("extract: vanishing vertical derivative during Newton");
    double tn = t - f / dv;
    if (tn <= lo || tn >= hi) tn = 0.5 * (lo + hi);  // fall back to bisection
    double fn = field_at(tn);
    if ((flo <= 0 && fn > 0) || (flo > 0 && fn <= 0))
      hi = tn;
    else {
      lo = tn;
      flo = fn;
    }
    if (std::abs(tn - t) < 1e-12 * ell) {
      t = tn;
      break;
    }
    t = tn;
  }
  return RootSolve{t, true};
}

}  // namespace

ExtractedChart extract_chart(const DefiningField& df, int chart_index, int res) {
  if (df.kind() == FieldKind::exact) throw Error("extract_chart: variant field required");
  const DomainAtlas& atlas = df.atlas();
  if (chart_index < 0 || chart_index >= atlas.size())
    throw Error("extract_chart: chart index out of range");
  if (res < 3) throw Error("extract_chart: res must be >= 3");
  const LipschitzChart& ch = atlas.charts[chart_index];
  const int n = atlas.dim;
  const double L = atlas.L();
  const double margin_floor = 1.0 / (2.0 * std::sqrt(1.0 + L * L));

  ExtractedChart ec;
  ec.chart_index = chart_index;
  ec.m = df.m();
  ec.outer = df.kind() == FieldKind::outer;
  ec.dim = n;
  ec.window = atlas.R() - 2.0 * atlas.eps0;
  ec.res = res;
  ec.grid_h = 2.0 * ec.window / (res - 1);
  const int ny = n == 3 ? res : 1;
  ec.psi.assign(static_cast<size_t>(res) * ny, 0.0);
  ec.grad.assign(static_cast<size_t>(res) * ny, VecC{});
  ec.hess.assign(static_cast<size_t>(res) * ny, MatC{});
  ec.mask.assign(static_cast<size_t>(res) * ny, 0);

  const DefiningField* dfp = &df;
  const LipschitzChart* chp = &ch;
  ec.solve = [dfp, chp](const VecC& yp) { return solve_vertical(*dfp, *chp, yp).t; };

  std::vector<double> margins(static_cast<size_t>(res) * ny, 2.0);
  std::vector<std::string> errors;
  std::mutex err_mu;

  parallel_for(static_cast<size_t>(res) * ny, [&](std::size_t begin, std::size_t end) {
    for (std::size_t node = begin; node < end; ++node) {
      int i = static_cast<int>(node % res), j = static_cast<int>(node / res);
      VecC yp = ec.node(i, j);
      if (normc(yp) > ec.window) continue;
      try {
        double t = solve_vertical(df, ch, yp).t;
        VecN y{yp[0], n == 3 ? yp[1] : 0.0, 0.0};
        y[n - 1] = t;
        VecN x = ch.frame.inverse(y);
        DefiningField::Jet jet = df.jet(x, true);
        // rotate to chart-i frame coordinates
        VecN gi = matvec(ch.frame.rotation, jet.grad);
        MatN hi_full{};
        {
          MatN tmp = matmul(ch.frame.rotation, jet.hess);
          hi_full = matmul(tmp, transpose(ch.frame.rotation));
        }
        double a = gi[n - 1];
        margins[node] = a;
        const int d = n - 1;
        VecC g{};
        for (int k = 0; k < d; ++k) g[k] = -gi[k] / a;
        MatC h{};
        for (int k = 0; k < d; ++k)
          for (int l = 0; l < d; ++l)
            h[k][l] = -(hi_full[k][l] + hi_full[k][n - 1] * g[l] + hi_full[l][n - 1] * g[k] +
                        hi_full[n - 1][n - 1] * g[k] * g[l]) /
                      a;
        ec.psi[node] = t;
        ec.grad[node] = g;
        ec.hess[node] = h;
        ec.mask[node] = 1;
      } catch (const Error& e) {
        std::lock_guard<std::mutex> lock(err_mu);
        errors.emplace_back(e.what());
      }
    }
  });
  if (!errors.empty())
    throw Error("extract_chart[" + std::to_string(chart_index) + "]: " + errors.front());

  double sup = 0, margin = 2.0;
  for (std::size_t node = 0; node < ec.mask.size(); ++node) {
    if (!ec.mask[node]) continue;
    int i = static_cast<int>(node % res), j = static_cast<int>(node / res);
    sup = std::max(sup, std::abs(ec.psi[node] - ch.eval(ec.node(i, j))));
    margin = std::min(margin, margins[node]);
  }
  ec.sup_gap_vs_base = sup;
  ec.vertical_margin = margin;
  if (margin < margin_floor - 1e-9)
    throw Error("extract_chart[" + std::to_string(chart_index) +
                "]: vertical margin " + std::to_string(margin) + " below the Claim-1 floor " +
                std::to_string(margin_floor) + " (m below m0?)");
  return ec;
}

BandCheckReport hausdorff_band_check(const DefiningField& exact_field, int m,
                                     int nodes_per_chart, int chart_stride) {
  if (exact_field.kind() != FieldKind::exact)
    throw Error("hausdorff_band_check: exact field required");
  const DomainAtlas& atlas = exact_field.atlas();
  const BumpFamily& bumps = exact_field.bumps();
  const int n = atlas.dim;
  const double L = atlas.L();
  const double band = 3.0 * L / m;
  // vertical extent that surely brackets the band: |F| grows at least at rate
  // 1/(2 sqrt(1+L^2)) per Claim 1 once m >= m0; sample generously
  const double vspan = band * 2.5 * std::sqrt(1.0 + L * L);

  BandCheckReport rep;
  // the vertical grid must resolve the eta0 shell entry (width ~R/32), or the
  // band/supp-xi0 overlap slips between samples
  const int nv = 49;
  for (int ci = 0; ci < atlas.size(); ci += chart_stride) {
    const LipschitzChart& ch = atlas.charts[ci];
    double win = atlas.R() - 2.0 * atlas.eps0;
    int nyy = n == 3 ? nodes_per_chart : 1;
    for (int j = 0; j < nyy; ++j)
      for (int i = 0; i < nodes_per_chart; ++i) {
        VecC yp{-win + 2 * win * i / (nodes_per_chart - 1),
                n == 3 ? -win + 2 * win * j / (nodes_per_chart - 1) : 0.0};
        if (normc(yp) > win) continue;
        double base = ch.eval(yp);
        for (int v = 0; v < nv; ++v) {
          double off = -vspan + 2.0 * vspan * v / (nv - 1);
          VecN y{yp[0], n == 3 ? yp[1] : 0.0, 0.0};
          y[n - 1] = base + off;
          VecN x = ch.frame.inverse(y);
          double F;
          try {
            F = exact_field.value(x);
          } catch (const Error&) {
            continue;
          }
          if (std::abs(F) > band) continue;
          ++rep.samples;
          bool covered = false;
          std::vector<int> act;
          atlas.active_charts(x, act);
          for (int k : act)
            if (dist(x, atlas.centers[k]) <= atlas.R() / 8.0) {
              covered = true;
              break;
            }
          if (!covered) ++rep.cover_violations;
          if (bumps.eta0(x) > 0) ++rep.xi0_violations;
        }
      }
  }
  return rep;
}

M0Report detect_m0(const DomainAtlas& atlas, const BumpFamily& bumps, int max_m, int stride,
                   int coarse_res) {
  M0Report rep;
  DefiningField exact(atlas, bumps, FieldKind::exact);
  for (int m = 4; m <= max_m; m *= 2) {
    rep.tried.push_back(m);
    bool band_ok = false, margin_ok = false;
    try {
      BandCheckReport band =
          hausdorff_band_check(exact, m, atlas.dim == 2 ? 17 : 9, stride);
      band_ok = band.cover_violations == 0 && band.xi0_violations == 0 && band.samples > 0;
    } catch (const Error&) {
      band_ok = false;
    }
    {
      margin_ok = true;
      try {
        DefiningField outer(atlas, bumps, FieldKind::outer, m);
        DefiningField inner(atlas, bumps, FieldKind::inner, m);
        for (int ci = 0; ci < atlas.size() && margin_ok; ci += stride) {
          extract_chart(outer, ci, coarse_res);  // throws below the margin floor
          extract_chart(inner, ci, coarse_res);
        }
      } catch (const Error&) {
        margin_ok = false;
      }
    }
    rep.band_ok.push_back(band_ok);
    rep.margin_ok.push_back(margin_ok);
    if (margin_ok && rep.margin_m0 == 0) rep.margin_m0 = m;
    if (band_ok && margin_ok) {
      rep.m0 = m;
      return rep;
    }
  }
  return rep;
}

}  // namespace lipsmooth
