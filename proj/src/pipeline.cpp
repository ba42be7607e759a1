#include "lipsmooth/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace lipsmooth {

namespace fs = std::filesystem;
using nlohmann::json;

void RunConfig::validate() const {
  if (shape.empty() == spec_path.empty())
    throw Error("config: exactly one of shape or spec file must be given");
  if (m_schedule.empty()) throw Error("config: empty m schedule");
  for (std::size_t i = 1; i < m_schedule.size(); ++i)
    if (m_schedule[i] <= m_schedule[i - 1])
      throw Error("config: m schedule must be strictly increasing");
  if (m_schedule.front() < 1) throw Error("config: m must be >= 1");
  if (chart_res < 9) throw Error("config: chart-res must be >= 9");
  if (vol_res < 0) throw Error("config: vol-res must be positive");
  if (!(cap_res > 0 && cap_res <= 1.0 / 64.0)) throw Error("config: cap-res must be in (0, 1/64]");
  if (!(cover_beta > 0 && cover_beta <= 1)) throw Error("config: cover beta in (0,1]");
}

PipelineContext::PipelineContext(const RunConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  if (!cfg.shape.empty())
    atlas_ = make_shape(cfg.shape, cfg.cover_beta);
  else
    atlas_ = load_domain_file(cfg.spec_path);
  if (cfg.eps0 > 0) {
    if (!(cfg.eps0 < atlas_.R() / 4.0)) throw Error("config: eps0 must lie in (0, R/4)");
    atlas_.eps0 = cfg.eps0;
  }
  atlas_.validate();
  bumps_ = BumpFamily::build(atlas_);
  int max_m = std::min(256, cfg.m_schedule.back());
  int stride = atlas_.dim == 2 ? 1 : std::max(1, atlas_.size() / 48);
  m0_ = detect_m0(atlas_, bumps_, max_m, stride, atlas_.dim == 2 ? 9 : 5);
}

const DefiningTriple& PipelineContext::triple(int m) {
  auto it = triples_.find(m);
  if (it == triples_.end())
    it = triples_.emplace(m, std::make_shared<DefiningTriple>(atlas_, bumps_, m)).first;
  return *it->second;
}

const std::vector<ExtractedChart>& PipelineContext::extraction(int m, bool outer) {
  auto key = std::make_pair(m, outer);
  auto it = extractions_.find(key);
  if (it == extractions_.end()) {
    const DefiningTriple& t = triple(m);
    const DefiningField& field = outer ? t.outer : t.inner;
    auto vec = std::make_shared<std::vector<ExtractedChart>>();
    int res = atlas_.dim == 2 ? cfg_.chart_res : std::min(cfg_.chart_res, 17);
    for (int ci = 0; ci < atlas_.size(); ++ci) vec->push_back(extract_chart(field, ci, res));
    it = extractions_.emplace(key, vec).first;
  }
  return *it->second;
}

namespace {

// boundary point clouds for the Hausdorff suite, sampled at chart spacing
// <= 1/(4m) via point re-solves (independent of the extraction grid)
struct BoundaryClouds {
  std::vector<VecN> base, outer, inner;
  double spacing_world = 0;
};

BoundaryClouds boundary_clouds(PipelineContext& ctx, int m) {
  const DomainAtlas& atlas = ctx.atlas();
  const int d = atlas.dim - 1;
  const double win = atlas.R() / 8.0 * 1.05;
  double target = std::min(1.0 / (4.0 * m), win / 8.0);
  int res = std::max(9, static_cast<int>(std::ceil(2.0 * win / target)) + 1);
  if (d == 2) res = std::min(res, 65);  // desk scale for surfaces
  double h = 2.0 * win / (res - 1);

  const auto& outer_charts = ctx.extraction(m, true);
  const auto& inner_charts = ctx.extraction(m, false);

  BoundaryClouds bc;
  bc.spacing_world =
      h * std::sqrt(1.0 + atlas.L() * atlas.L()) * std::sqrt(static_cast<double>(d));
  for (int ci = 0; ci < atlas.size(); ++ci) {
    const LipschitzChart& ch = atlas.charts[ci];
    int ny = d == 2 ? res : 1;
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < res; ++i) {
        VecC yp{-win + h * i, d == 2 ? -win + h * j : 0.0};
        if (normc(yp) > win) continue;
        bc.base.push_back(ch.surface_point(yp));
        VecN y{yp[0], d == 2 ? yp[1] : 0.0, 0.0};
        y[atlas.dim - 1] = outer_charts[ci].solve(yp);
        bc.outer.push_back(ch.frame.inverse(y));
        y[atlas.dim - 1] = inner_charts[ci].solve(yp);
        bc.inner.push_back(ch.frame.inverse(y));
      }
  }
  return bc;
}

double cloud_diameter(const std::vector<VecN>& pts) {
  // diameter of the bounding box is within sqrt(n) of the true diameter and
  // monotone enough for the c(n) = 2 check; use the exact pairwise value for
  // small clouds
  if (pts.size() < 4000) {
    double best = 0;
    for (std::size_t a = 0; a < pts.size(); ++a)
      for (std::size_t b = a + 1; b < pts.size(); ++b) best = std::max(best, dist(pts[a], pts[b]));
    return best;
  }
  VecN lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  for (const VecN& p : pts)
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  return dist(lo, hi);
}

bool shape_has_curvature(const DomainAtlas& atlas) {
  return atlas.shape_name == "disk" || atlas.shape_name == "sphere" ||
         atlas.shape_name == "star";
}

int pick_m_at_least(PipelineContext& ctx, int wanted) {
  int m0 = ctx.m0().margin_m0 > 0 ? ctx.m0().margin_m0 : ctx.cfg().m_schedule.front();
  for (int m : ctx.cfg().m_schedule)
    if (m >= std::max(wanted, m0)) return m;
  return ctx.cfg().m_schedule.back();
}

// schedule entries with valid extractions (margins hold; the chart and
// Hausdorff bounds are stated by the paper for all such m). The band
// containment (6.22) may need the larger, band-based m0; check_band gates on
// that one.
std::vector<int> schedule_at_or_above_m0(PipelineContext& ctx) {
  std::vector<int> ms;
  int m0 = ctx.m0().margin_m0;
  for (int m : ctx.cfg().m_schedule)
    if (m0 > 0 && m >= m0) ms.push_back(m);
  return ms;
}

}  // namespace

// --- checks --------------------------------------------------------------------

Check check_atlas(PipelineContext& ctx) {
  Check c{"atlas", true, 0, 0, ""};
  const DomainAtlas& atlas = ctx.atlas();
  try {
    atlas.validate();
  } catch (const Error& e) {
    c.pass = false;
    c.note = e.what();
    return c;
  }
  // transition round-trips on overlapping pairs
  double worst = 0;
  int tested = 0;
  Rng rng(0x7a715);
  for (int i = 0; i < atlas.size() && tested < 64; ++i) {
    for (int j = 0; j < atlas.size() && tested < 64; ++j) {
      if (i == j) continue;
      if (dist(atlas.centers[i], atlas.centers[j]) > atlas.R() / 4.0) continue;
      for (int trial = 0; trial < 4; ++trial) {
        VecC yp{};
        for (int k = 0; k < atlas.dim - 1; ++k)
          yp[k] = rng.uniform(-atlas.R() / 8.0, atlas.R() / 8.0);
        try {
          TransitionResult fwd = transition_eval(atlas, i, j, yp);
          TransitionResult back = transition_eval(atlas, j, i, fwd.target);
          worst = std::max(worst, normc(subc(back.target, yp)));
          ++tested;
        } catch (const Error&) {
          // outside V^{i,j}; fine
        }
      }
    }
  }
  c.measured = worst;
  c.bound = 1e-8;
  c.pass = worst <= 1e-8 && tested > 0;
  c.note = "round-trips tested: " + std::to_string(tested);
  return c;
}

Check check_mollifier(PipelineContext& ctx) {
  Check c{"mollifier", true, 0, 0, ""};
  const DomainAtlas& atlas = ctx.atlas();
  const int d = atlas.dim - 1;
  const double L = atlas.L();

  // kernel mass with an independent radial quadrature
  const MollifierKernel& ker = kernel(d);
  double worst_mass = 0;
  for (int m : {1, 4, 16, 64, 256}) {
    double mass;
    if (d == 1)
      mass = adaptive_integrate([&](double t) { return ker.rho_m(m, VecC{t, 0}); }, -1.0, 1.0,
                                1e-13);
    else
      mass = 2.0 * M_PI *
             adaptive_integrate([&](double r) { return ker.rho_m(m, VecC{r, 0}) * r; }, 0.0, 1.0,
                                1e-13);
    worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
  }
  const double mass_tol = 1e-10;

  // contraction and Lipschitz preservation on a chart subset
  double worst_contract = 0, worst_lip = 0;
  int stride = std::max(1, atlas.size() / 16);
  for (int m = 4; m <= 128; m *= 2) {
    for (int ci = 0; ci < atlas.size(); ci += stride) {
      const LipschitzChart& ch = atlas.charts[ci];
      if (ch.radius - 1.0 / m <= 0.01 * ch.radius) continue;  // vacuous window
      MollifiedChart mc(ch, m, true);
      double win = mc.window();
      const int res = 33;
      double prev = 0;
      VecC prev_y{};
      for (int i = 0; i < res; ++i) {
        VecC y{-win + 2 * win * i / (res - 1), 0};
        if (d == 2) continue;
        double s = mc.smoothed(y);
        worst_contract = std::max(worst_contract, std::abs(s - ch.eval(y)) - L / m);
        if (i > 0)
          worst_lip = std::max(
              worst_lip, std::abs(s - prev) / normc(subc(y, prev_y)) - L * (1.0 + 1e-9));
        prev = s;
        prev_y = y;
      }
      if (d == 2) {
        Rng rng(0x5afe + ci + m);
        VecC ya{}, yb{};
        for (int trial = 0; trial < 16; ++trial) {
          for (int k = 0; k < 2; ++k) {
            ya[k] = rng.uniform(-win, win);
            yb[k] = rng.uniform(-win, win);
          }
          if (normc(ya) > win || normc(yb) > win) continue;
          double sa = mc.smoothed(ya), sb = mc.smoothed(yb);
          worst_contract = std::max(worst_contract, std::abs(sa - ch.eval(ya)) - L / m);
          double gap = normc(subc(ya, yb));
          if (gap > 1e-9)
            worst_lip = std::max(worst_lip, std::abs(sa - sb) / gap - L * (1.0 + 1e-9));
        }
      }
    }
  }
  c.measured = std::max({worst_mass / mass_tol, worst_contract / 1e-12, worst_lip / 1e-12});
  c.bound = 1.0;
  c.pass = worst_mass <= mass_tol && worst_contract <= 1e-12 && worst_lip <= 1e-12;
  c.note = "mass defect " + std::to_string(worst_mass);
  return c;
}

Check check_partition(PipelineContext& ctx) {
  Check c{"partition", true, 0, 0, ""};
  const DomainAtlas& atlas = ctx.atlas();
  const BumpFamily& bumps = ctx.bumps();
  const double R = atlas.R();

  // sum to one on W samples (near-boundary and interior)
  double worst_sum = 0;
  Rng rng(0x9a57);
  long tested = 0;
  for (long s = 0; s < 4000 || tested < 500; ++s) {
    if (s > 40000) break;
    const VecN& b = atlas.boundary_samples[static_cast<std::size_t>(
        rng.uniform() * static_cast<double>(atlas.boundary_samples.size()))];
    VecN x = b;
    for (int k = 0; k < atlas.dim; ++k) x[k] += rng.uniform(-R / 6, R / 6);
    double S = bumps.sum_eta(x);
    if (S <= 1e-9) continue;
    ++tested;
    double total = bumps.eta0(x) / S;
    std::vector<int> act;
    atlas.active_charts(x, act);
    for (int i : act) total += bumps.eta(i + 1, x) / S;
    worst_sum = std::max(worst_sum, std::abs(total - 1.0));
  }

  // support containment: eta_i vanishes beyond 7R/32, eta0 vanishes within R/32
  double sup_defect = 0;
  for (int i = 0; i < std::min(atlas.size(), 32); ++i) {
    VecN far = atlas.centers[i];
    far[0] += bumps.boundary_support() * 1.0001;
    sup_defect = std::max(sup_defect, bumps.eta(i + 1, far));
  }
  for (int t = 0; t < 32; ++t) {
    const VecN& b = atlas.boundary_samples[static_cast<std::size_t>(
        rng.uniform() * static_cast<double>(atlas.boundary_samples.size()))];
    sup_defect = std::max(sup_defect, bumps.eta0(b));
  }

  BumpFamily::BoundReport br = bumps.measure_derivative_bounds(atlas.dim == 2 ? 8 : 2);
  bool bounds_ok = br.sup_grad_scaled <= 64.0 && br.sup_hess_scaled <= 4096.0;

  c.measured = worst_sum;
  c.bound = 1e-10;
  c.pass = worst_sum <= 1e-10 && sup_defect == 0.0 && bounds_ok;
  c.note = "grad*R " + std::to_string(br.sup_grad_scaled) + ", hess*R^2 " +
           std::to_string(br.sup_hess_scaled);
  return c;
}

Check check_sandwich(PipelineContext& ctx, long samples) {
  Check c{"sandwich", true, 0, 0, ""};
  int m = pick_m_at_least(ctx, 0);
  SandwichStats st = sandwich_check(ctx.triple(m), samples, 0xfeed);
  c.measured = static_cast<double>(st.order_violations + st.band_violations +
                                   st.containment_violations);
  c.bound = 0;
  c.pass = c.measured == 0;
  c.note = "m " + std::to_string(m) + ", samples " + std::to_string(st.samples) + ", outside " +
           std::to_string(st.outside);
  return c;
}

Check check_band(PipelineContext& ctx) {
  Check c{"band", true, 0, 0, ""};
  std::vector<int> ms;
  for (int m : ctx.cfg().m_schedule)
    if (ctx.m0().m0 > 0 && m >= ctx.m0().m0) ms.push_back(m);
  if (ms.empty()) {
    c.pass = false;
    c.note = "no schedule entries at or above the band m0";
    return c;
  }
  int stride = ctx.atlas().dim == 2 ? 1 : std::max(1, ctx.atlas().size() / 64);
  long viol = 0, samples = 0;
  for (int m : ms) {
    BandCheckReport rep = hausdorff_band_check(ctx.triple(m).exact, m,
                                               ctx.atlas().dim == 2 ? 17 : 9, stride);
    viol += rep.cover_violations + rep.xi0_violations;
    samples += rep.samples;
  }
  c.measured = static_cast<double>(viol);
  c.bound = 0;
  c.pass = viol == 0 && samples > 0;
  c.note = "band samples " + std::to_string(samples);
  return c;
}

Check check_chart_sup(PipelineContext& ctx) {
  Check c{"chart_sup", true, 0, 0, ""};
  const double L = ctx.atlas().L();
  double worst_ratio = 0;
  for (int m : schedule_at_or_above_m0(ctx)) {
    double bound = 6.0 * L * std::sqrt(1.0 + L * L) / m + 1e-9;
    for (bool outer : {true, false})
      for (const ExtractedChart& ec : ctx.extraction(m, outer))
        worst_ratio = std::max(worst_ratio, ec.sup_gap_vs_base / bound);
  }
  c.measured = worst_ratio;
  c.bound = 1.0;
  c.pass = worst_ratio <= 1.0 && worst_ratio > 0;
  return c;
}

Check check_margin(PipelineContext& ctx) {
  Check c{"margin", true, 0, 0, ""};
  const double L = ctx.atlas().L();
  double floor = 1.0 / (2.0 * std::sqrt(1.0 + L * L));
  double worst = 2.0;
  for (int m : schedule_at_or_above_m0(ctx))
    for (bool outer : {true, false})
      for (const ExtractedChart& ec : ctx.extraction(m, outer))
        worst = std::min(worst, ec.vertical_margin);
  c.measured = worst;
  c.bound = floor - 1e-9;
  c.pass = worst >= c.bound && worst <= 1.5;
  return c;
}

Check check_gradient_bound(PipelineContext& ctx) {
  Check c{"gradient", true, 0, 0, ""};
  const double L = ctx.atlas().L();
  double bound = 8.0 * (1.0 + L * L);
  double worst = 0;
  for (int m : schedule_at_or_above_m0(ctx))
    for (bool outer : {true, false})
      for (const ExtractedChart& ec : ctx.extraction(m, outer))
        for (std::size_t node = 0; node < ec.mask.size(); ++node)
          if (ec.mask[node]) worst = std::max(worst, normc(ec.grad[node]));
  c.measured = worst;
  c.bound = bound;
  c.pass = worst <= bound && worst > 0;
  return c;
}

Check check_transitions(PipelineContext& ctx) {
  Check c{"transitions", true, 0, 0, ""};
  const DomainAtlas& atlas = ctx.atlas();
  std::vector<int> ms = schedule_at_or_above_m0(ctx);
  if (ms.empty()) {
    c.pass = false;
    c.note = "no schedule entries at or above m0";
    return c;
  }
  int m = ms.back();
  const double L = atlas.L();
  const auto& charts = ctx.extraction(m, true);
  double worst_consistency = 0, worst_drift_ratio = 0;
  int tested = 0;
  Rng rng(0xc0a7);
  for (int i = 0; i < atlas.size() && tested < 48; ++i)
    for (int j = 0; j < atlas.size() && tested < 48; ++j) {
      if (i == j) continue;
      if (dist(atlas.centers[i], atlas.centers[j]) > atlas.R() / 4.0) continue;
      for (int trial = 0; trial < 3; ++trial) {
        VecC yp{};
        for (int k = 0; k < atlas.dim - 1; ++k)
          yp[k] = rng.uniform(-atlas.R() / 8.0, atlas.R() / 8.0);
        try {
          TransitionResult tr = transition_eval(atlas, i, j, yp);
          // extracted-surface transition: same y', psi-heights, frame j
          VecN y{yp[0], atlas.dim == 3 ? yp[1] : 0.0, 0.0};
          y[atlas.dim - 1] = charts[i].solve(yp);
          VecN xm = atlas.charts[i].frame.inverse(y);
          VecN z = atlas.charts[j].frame.forward(xm);
          VecC zp{z[0], atlas.dim == 3 ? z[1] : 0.0};
          double zn = charts[j].solve(zp);
          worst_consistency = std::max(worst_consistency, std::abs(z[atlas.dim - 1] - zn));
          double drift = normc(subc(zp, tr.target));
          double bound = 6.0 * L * std::sqrt(1 + L * L) / m + 1e-9;
          worst_drift_ratio = std::max(worst_drift_ratio, drift / bound);
          ++tested;
        } catch (const Error&) {
        }
      }
    }
  c.measured = worst_consistency;
  c.bound = 1e-7;
  c.pass = tested > 0 && worst_consistency <= 1e-7 && worst_drift_ratio <= 1.0;
  c.note = "pairs " + std::to_string(tested) + ", |C_m - C| ratio " +
           std::to_string(worst_drift_ratio);
  return c;
}

Check check_hausdorff(PipelineContext& ctx) {
  Check c{"hausdorff", true, 0, 0, ""};
  const double L = ctx.atlas().L();
  std::vector<int> ms = schedule_at_or_above_m0(ctx);
  if (ms.empty()) {
    c.pass = false;
    c.note = "no schedule entries at or above m0";
    return c;
  }
  std::vector<double> totals;
  double worst_ratio = 0;
  std::string note;
  for (int m : ms) {
    BoundaryClouds bc = boundary_clouds(ctx, m);
    HausdorffResult ho =
        hausdorff_boundaries(bc.outer, bc.base, ctx.atlas().dim, bc.spacing_world,
                             bc.spacing_world);
    HausdorffResult hi =
        hausdorff_boundaries(bc.inner, bc.base, ctx.atlas().dim, bc.spacing_world,
                             bc.spacing_world);
    double total = ho.value + hi.value;
    double bound = 12.0 * L * std::sqrt(1.0 + L * L) / m + ho.sampling_error + hi.sampling_error;
    totals.push_back(total);
    worst_ratio = std::max(worst_ratio, total / bound);
    note += "m" + std::to_string(m) + ":" + std::to_string(total) + " ";
  }
  for (std::size_t k = 0; k + 1 < ms.size(); ++k)
    if (ms[k + 1] == 2 * ms[k])
      worst_ratio = std::max(worst_ratio, totals[k + 1] / (0.7 * totals[k]));
  c.measured = worst_ratio;
  c.bound = 1.0;
  c.pass = worst_ratio <= 1.0;
  c.note = note;
  return c;
}

Check check_sobolev(PipelineContext& ctx) {
  Check c{"sobolev", true, 0, 0, ""};
  std::vector<int> ms = schedule_at_or_above_m0(ctx);
  if (ms.size() < 2) {
    c.pass = false;
    c.note = "need at least two schedule entries at or above m0";
    return c;
  }
  int m_lo = ms.front(), m_hi = ms.back();
  const DomainAtlas& atlas = ctx.atlas();
  struct KP {
    int k;
    double p;
  };
  double worst_ratio = 0;
  std::string note;
  for (KP kp : {KP{1, 2.0}, KP{1, 4.0}, KP{2, 1.0}, KP{2, 2.0}}) {
    double lo = 0, hi = 0;
    for (int ci = 0; ci < atlas.size(); ++ci) {
      lo = std::max(lo, sobolev_error(ctx.extraction(m_lo, true)[ci], atlas.charts[ci], kp.k,
                                      kp.p));
      hi = std::max(hi, sobolev_error(ctx.extraction(m_hi, true)[ci], atlas.charts[ci], kp.k,
                                      kp.p));
    }
    worst_ratio = std::max(worst_ratio, hi / (0.5 * lo));
    note += "W" + std::to_string(kp.k) + "," + std::to_string(static_cast<int>(kp.p)) + ":" +
            std::to_string(hi / lo) + " ";
  }
  c.measured = worst_ratio;
  c.bound = 1.0;
  c.pass = worst_ratio <= 1.0;
  c.note = note;
  return c;
}

Check check_curvature(PipelineContext& ctx) {
  Check c{"curvature", true, 0, 0, ""};
  const DomainAtlas& atlas = ctx.atlas();
  if (!shape_has_curvature(atlas)) {
    c.pass = true;
    c.note = "shape without W^{2,1} charts; curvature suite skipped";
    return c;
  }
  std::string note;
  bool ok = true;

  // BBB sandwich at extraction nodes
  const double L = atlas.L();
  double bbb_defect = 0;
  std::vector<int> ms = schedule_at_or_above_m0(ctx);
  if (!ms.empty()) {
    const auto& charts = ctx.extraction(ms.front(), true);
    for (const ExtractedChart& ec : charts)
      for (std::size_t node = 0; node < ec.mask.size(); ++node) {
        if (!ec.mask[node]) continue;
        const int d = atlas.dim - 1;
        CurvatureField cf = weak_curvature(ec.grad[node], ec.hess[node], d);
        double h_norm = frobenius(ec.hess[node], d);
        double glow = h_norm / std::pow(1.0 + L * L, 1.5) - cf.norm_B;
        double ghigh = cf.norm_B - h_norm;
        bbb_defect = std::max({bbb_defect, glow, ghigh});
      }
  }
  ok = ok && bbb_defect <= 1e-10;
  note += "bbb_defect " + std::to_string(bbb_defect) + " ";

  if (atlas.dim == 2 && !ms.empty()) {
    // total curvature of the m-surfaces vs the base (2 pi for any convex curve)
    double base = boundary_curvature_integral(atlas, ctx.bumps(), 1.0, 192);
    std::vector<double> errs;
    for (int m : ms) {
      double val =
          boundary_curvature_integral_m(ctx.extraction(m, true), atlas, ctx.bumps(), 1.0);
      errs.push_back(std::abs(val - base));
      note += "m" + std::to_string(m) + ":" + std::to_string(val) + " ";
    }
    ok = ok && errs.back() <= 0.02 * base;
  }
  c.pass = ok;
  c.note = note;
  c.measured = bbb_defect;
  return c;
}

Check check_characteristic(PipelineContext& ctx) {
  Check c{"characteristic", true, 0, 0, ""};
  const DomainAtlas& atlas = ctx.atlas();
  const double L = atlas.L(), R = atlas.R();
  double bound_L = 8.0 * (1.0 + L * L);
  double bound_R = R / (8.0 * (1.0 + L * L));
  bool ok = true;
  std::string note;
  for (int m : schedule_at_or_above_m0(ctx)) {
    for (bool outer : {true, false}) {
      MeasuredCharacteristic mc = measure_characteristic(ctx.extraction(m, outer), atlas);
      ok = ok && mc.L_m <= bound_L && mc.R_m >= bound_R;
      if (outer && m == schedule_at_or_above_m0(ctx).front())
        note = "L_m " + std::to_string(mc.L_m) + " <= " + std::to_string(bound_L) + ", R_m " +
               std::to_string(mc.R_m) + " >= " + std::to_string(bound_R);
    }
    // diameters, c(n) = 2 pinned
    BoundaryClouds bc = boundary_clouds(ctx, m);
    double dd = atlas.characteristic.diameter;
    ok = ok && cloud_diameter(bc.outer) <= 2.0 * dd && cloud_diameter(bc.inner) <= 2.0 * dd;
  }
  c.pass = ok;
  c.note = note;
  return c;
}

Check check_lebesgue(PipelineContext& ctx) {
  Check c{"lebesgue", true, 0, 0, ""};
  std::vector<int> ms = schedule_at_or_above_m0(ctx);
  if (ms.empty() || ctx.atlas().dim != 2) {
    c.pass = !ms.empty();
    c.note = ms.empty() ? "no schedule entries at or above m0" : "lebesgue suite runs in n=2";
    return c;
  }
  const double L = ctx.atlas().L();
  std::vector<double> outer_gaps;
  bool ok = true;
  std::string note;
  for (int m : ms) {
    double h = ctx.cfg().vol_res > 0 ? ctx.cfg().vol_res : L / m;
    LebesgueGap onfo = lebesgue_gap(ctx.triple(m), GapRegion::outer_minus_domain, h);
    LebesgueGap infi = lebesgue_gap(ctx.triple(m), GapRegion::domain_minus_inner, h);
    outer_gaps.push_back(onfo.measure);
    note += "m" + std::to_string(m) + ":" + std::to_string(onfo.measure) + " ";
    ok = ok && infi.measure > 0 && onfo.measure > 0;
  }
  for (std::size_t k = 0; k + 1 < ms.size(); ++k) {
    if (ms[k + 1] != 2 * ms[k]) continue;
    double ratio = outer_gaps[k + 1] / outer_gaps[k];
    ok = ok && ratio >= 0.3 && ratio <= 0.7;
    c.measured = ratio;
  }
  c.pass = ok;
  c.note = note;
  return c;
}

std::vector<Check> run_verification(PipelineContext& ctx, const std::vector<std::string>& only) {
  std::vector<std::pair<std::string, Check (*)(PipelineContext&)>> suites = {
      {"atlas", check_atlas},
      {"mollifier", check_mollifier},
      {"partition", check_partition},
      {"band", check_band},
      {"chart_sup", check_chart_sup},
      {"margin", check_margin},
      {"gradient", check_gradient_bound},
      {"transitions", check_transitions},
      {"hausdorff", check_hausdorff},
      {"sobolev", check_sobolev},
      {"curvature", check_curvature},
      {"characteristic", check_characteristic},
      {"lebesgue", check_lebesgue},
  };
  std::vector<Check> out;
  auto wanted = [&](const std::string& name) {
    if (only.empty()) return true;
    return std::find(only.begin(), only.end(), name) != only.end();
  };
  if (wanted("sandwich")) out.push_back(check_sandwich(ctx));
  for (auto& [name, fn] : suites)
    if (wanted(name)) out.push_back(fn(ctx));
  return out;
}

// --- report and artifacts --------------------------------------------------------

ConvergenceReport build_report(PipelineContext& ctx) {
  const DomainAtlas& atlas = ctx.atlas();
  const double L = atlas.L();
  ConvergenceReport rep;
  rep.shape = atlas.shape_name.empty() ? ctx.cfg().spec_path : atlas.shape_name;
  rep.dim = atlas.dim;
  rep.L = L;
  rep.R = atlas.R();
  rep.eps0 = atlas.eps0;
  rep.diameter = atlas.characteristic.diameter;
  rep.cover_beta = ctx.cfg().cover_beta;
  rep.charts = atlas.size();
  rep.chart_res = ctx.cfg().chart_res;
  rep.vol_res = ctx.cfg().vol_res;

  int m0 = ctx.m0().m0;
  int margin_m0 = ctx.m0().margin_m0;
  for (int m : ctx.cfg().m_schedule) {
    ConvergenceRow row;
    row.m = m;
    row.m0 = m0;
    row.hausdorff_bound = 12.0 * L * std::sqrt(1.0 + L * L) / m;
    row.sup_chart_bound = 6.0 * L * std::sqrt(1.0 + L * L) / m;
    row.margin_floor = 1.0 / (2.0 * std::sqrt(1.0 + L * L));
    if (margin_m0 == 0 || m < margin_m0) {
      row.sup_chart_gap = std::nan("");
      rep.rows.push_back(row);
      continue;
    }
    const auto& outer = ctx.extraction(m, true);
    const auto& inner = ctx.extraction(m, false);
    double sup = 0, margin = 2.0;
    for (const auto& ec : outer) {
      sup = std::max(sup, ec.sup_gap_vs_base);
      margin = std::min(margin, ec.vertical_margin);
    }
    for (const auto& ec : inner) {
      sup = std::max(sup, ec.sup_gap_vs_base);
      margin = std::min(margin, ec.vertical_margin);
    }
    row.sup_chart_gap = sup;
    row.min_margin = margin;

    BoundaryClouds bc = boundary_clouds(ctx, m);
    HausdorffResult ho =
        hausdorff_boundaries(bc.outer, bc.base, atlas.dim, bc.spacing_world, bc.spacing_world);
    HausdorffResult hi =
        hausdorff_boundaries(bc.inner, bc.base, atlas.dim, bc.spacing_world, bc.spacing_world);
    row.hausdorff_outer = ho.value;
    row.hausdorff_inner = hi.value;
    row.hausdorff_sampling = ho.sampling_error + hi.sampling_error;
    row.diam_outer = cloud_diameter(bc.outer);
    row.diam_inner = cloud_diameter(bc.inner);

    MeasuredCharacteristic mc = measure_characteristic(outer, atlas);
    row.L_m = mc.L_m;
    row.R_m = mc.R_m;

    if (atlas.dim == 2) {
      double h = ctx.cfg().vol_res > 0 ? ctx.cfg().vol_res : L / m;
      row.lebesgue_outer = lebesgue_gap(ctx.triple(m), GapRegion::outer_minus_domain, h).measure;
      row.lebesgue_inner = lebesgue_gap(ctx.triple(m), GapRegion::domain_minus_inner, h).measure;
    }

    double w12 = 0, w14 = 0, w21 = 0, w22 = 0;
    for (int ci = 0; ci < atlas.size(); ++ci) {
      w12 = std::max(w12, sobolev_error(outer[ci], atlas.charts[ci], 1, 2.0));
      w14 = std::max(w14, sobolev_error(outer[ci], atlas.charts[ci], 1, 4.0));
      w21 = std::max(w21, sobolev_error(outer[ci], atlas.charts[ci], 2, 1.0));
      w22 = std::max(w22, sobolev_error(outer[ci], atlas.charts[ci], 2, 2.0));
    }
    row.w12 = w12;
    row.w14 = w14;
    row.w21 = w21;
    row.w22 = w22;

    if (shape_has_curvature(atlas)) {
      row.curv_total_q1 = boundary_curvature_integral_m(outer, atlas, ctx.bumps(), 1.0);
      row.curv_total_q2 = boundary_curvature_integral_m(outer, atlas, ctx.bumps(), 2.0);
    }
    rep.rows.push_back(row);
  }
  return rep;
}

namespace {

json frame_json(const ReferenceFrame& fr) {
  json rot = json::array();
  for (int i = 0; i < fr.dim; ++i)
    for (int j = 0; j < fr.dim; ++j) rot.push_back(fr.rotation[i][j]);
  json base = json::array();
  for (int i = 0; i < fr.dim; ++i) base.push_back(fr.base[i]);
  return json{{"rotation", rot}, {"base", base}};
}

void dump_extraction(const fs::path& dir, const std::string& tag,
                     const std::vector<ExtractedChart>& charts, const DomainAtlas& atlas) {
  json header;
  header["tag"] = tag;
  header["dim"] = atlas.dim;
  header["window"] = charts.empty() ? 0.0 : charts.front().window;
  header["res"] = charts.empty() ? 0 : charts.front().res;
  header["record"] = "per chart: psi f64[res*ny], grad f64[d*res*ny], hess f64[d*d*res*ny], mask u8[res*ny]";
  header["charts"] = json::array();
  std::ofstream bin(dir / (tag + ".bin"), std::ios::binary);
  for (const ExtractedChart& ec : charts) {
    header["charts"].push_back(
        {{"index", ec.chart_index}, {"frame", frame_json(atlas.charts[ec.chart_index].frame)}});
    const int d = ec.dim - 1;
    bin.write(reinterpret_cast<const char*>(ec.psi.data()),
              static_cast<std::streamsize>(ec.psi.size() * sizeof(double)));
    for (const VecC& g : ec.grad)
      bin.write(reinterpret_cast<const char*>(g.data()),
                static_cast<std::streamsize>(d * sizeof(double)));
    for (const MatC& h : ec.hess)
      for (int a = 0; a < d; ++a)
        bin.write(reinterpret_cast<const char*>(h[a].data()),
                  static_cast<std::streamsize>(d * sizeof(double)));
    bin.write(reinterpret_cast<const char*>(ec.mask.data()),
              static_cast<std::streamsize>(ec.mask.size()));
  }
  std::ofstream hdr(dir / (tag + ".json"));
  hdr << header.dump(2) << "\n";
}

json m0_json(const M0Report& rep) {
  json j;
  j["m0"] = rep.m0;
  j["margin_m0"] = rep.margin_m0;
  j["tried"] = rep.tried;
  j["band_ok"] = rep.band_ok;
  j["margin_ok"] = rep.margin_ok;
  return j;
}

}  // namespace

int cmd_approximate(const RunConfig& cfg, std::ostream& log) {
  PipelineContext ctx(cfg);
  ConvergenceReport rep = build_report(ctx);
  if (!cfg.out_dir.empty()) {
    fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    std::ofstream(dir / "report.csv") << rep.to_csv();
    std::ofstream(dir / "report.json") << rep.to_json() << "\n";
    std::ofstream(dir / "m0.json") << m0_json(ctx.m0()).dump(2) << "\n";
    for (int m : cfg.m_schedule) {
      if (ctx.m0().margin_m0 == 0 || m < ctx.m0().margin_m0) continue;
      dump_extraction(dir, "charts_m" + std::to_string(m) + "_outer", ctx.extraction(m, true),
                      ctx.atlas());
      dump_extraction(dir, "charts_m" + std::to_string(m) + "_inner", ctx.extraction(m, false),
                      ctx.atlas());
    }
  }
  log << rep.to_csv();
  log << "# m0 = " << ctx.m0().m0 << ", margin_m0 = " << ctx.m0().margin_m0
      << ", charts = " << ctx.atlas().size() << "\n";
  return 0;
}

int cmd_verify(const RunConfig& cfg, std::ostream& log) {
  PipelineContext ctx(cfg);
  std::vector<Check> checks = run_verification(ctx, cfg.only);
  bool all = true;
  json j = json::array();
  for (const Check& c : checks) {
    all = all && c.pass;
    log << (c.pass ? "PASS " : "FAIL ") << c.name << " measured=" << c.measured
        << " bound=" << c.bound << (c.note.empty() ? "" : " (" + c.note + ")") << "\n";
    j.push_back({{"name", c.name},
                 {"pass", c.pass},
                 {"measured", c.measured},
                 {"bound", c.bound},
                 {"note", c.note}});
  }
  if (!cfg.out_dir.empty()) {
    fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    std::ofstream(dir / "verify.json") << j.dump(2) << "\n";
  }
  return all ? 0 : 1;
}

int cmd_capacity(const RunConfig& cfg, std::ostream& log) {
  PipelineContext ctx(cfg);
  const DomainAtlas& atlas = ctx.atlas();
  if (!shape_has_curvature(atlas))
    throw Error("capacity: curvature-weighted K needs W^{2,1} charts; shape '" +
                atlas.shape_name + "' has corners");

  const double r0 = isocap_r0(atlas);
  std::vector<double> r_values = {r0 / 8, r0 / 4, r0 / 2, r0};
  std::vector<double> family = {1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2};

  // deterministic boundary centers
  std::vector<VecN> centers;
  for (int k = 0; k < 4; ++k)
    centers.push_back(
        atlas.boundary_samples[k * atlas.boundary_samples.size() / 4]);

  json out;
  out["r0"] = r0;
  out["C_n"] = 16.0;
  out["family"] = family;

  // concentric-ball self-test
  {
    CapacityProblem p;
    p.dim = atlas.dim;
    p.center = VecN{};
    p.r = 1.0;
    p.h = atlas.dim == 2 ? 1.0 / 256.0 : 1.0 / 96.0;
    double s = atlas.dim == 2 ? 0.25 : 0.5;
    p.in_E = [s](const VecN& x) { return norm(x) <= s; };
    CapacityResult res = solve_capacity(p);
    double analytic =
        atlas.dim == 2 ? cap_analytic_2d(s, 1.0) : cap_analytic_3d(s, 1.0);
    out["selftest"] = {{"numeric", res.value},
                       {"analytic", analytic},
                       {"rel_error", std::abs(res.value - analytic) / analytic}};
    log << "# capacity selftest numeric " << res.value << " analytic " << analytic << "\n";
  }

  std::string csv = "r,K_base\n";
  json rows = json::array();
  for (double r : r_values) {
    KEstimate base =
        estimate_K(atlas, ctx.bumps(), nullptr, r, centers, family, cfg.cap_res, 129);
    rows.push_back({{"r", r}, {"K_base", base.value}});
    csv += std::to_string(r) + "," + std::to_string(base.value) + "\n";
  }
  out["K_base"] = rows;

  // per-m comparison at r0/2 using the pinned-constant instantiation
  if (ctx.m0().m0 > 0) {
    json cmp = json::array();
    for (int m : cfg.m_schedule) {
      if (m < ctx.m0().m0) continue;
      const auto& ext = ctx.extraction(m, true);
      // centers on the extracted boundary nearest the base centers
      std::vector<VecN> centers_m;
      for (const VecN& cb : centers) {
        std::vector<VecN> pts = extracted_boundary_points(ext, atlas, atlas.R() / 8);
        double best = 1e300;
        VecN pick = pts.front();
        for (const VecN& p : pts) {
          double d2 = dot(sub(p, cb), sub(p, cb));
          if (d2 < best) {
            best = d2;
            pick = p;
          }
        }
        centers_m.push_back(pick);
      }
      IsocapReport rep = isocap_compare(atlas, ctx.bumps(), ext, {r0 / 2}, m, centers,
                                        centers_m, family, cfg.cap_res, 129);
      for (const IsocapRow& row : rep.rows)
        cmp.push_back({{"m", m},
                       {"r", row.r},
                       {"K_m", row.K_m},
                       {"K_base_at_arg", row.K_base_arg},
                       {"rhs", row.rhs},
                       {"holds", row.holds},
                       {"A", rep.A},
                       {"A_arg", rep.A_arg},
                       {"B", rep.B}});
    }
    out["comparison"] = cmp;
  }

  log << csv;
  if (!cfg.out_dir.empty()) {
    fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    std::ofstream(dir / "capacity_K.csv") << csv;
    std::ofstream(dir / "capacity.json") << out.dump(2) << "\n";
  }
  return 0;
}

}  // namespace lipsmooth
