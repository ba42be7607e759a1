#include "lipsmooth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "json.hpp"

namespace lipsmooth {

namespace {

// uniform-grid nearest-neighbor structure for point sets
class PointGrid {
 public:
  PointGrid(const std::vector<VecN>& pts, int dim, double cell) : pts_(pts), dim_(dim), cell_(cell) {
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) cells_[key_of(pts[i])].push_back(i);
  }

  double nearest_dist(const VecN& q) const {
    // expanding Chebyshev rings; a cell at ring k holds points no closer than
    // (k-1) * cell to q, so the scan can stop once that exceeds the best hit
    double best2 = 1e300;
    for (int ring = 0; ring <= 512; ++ring) {
      if (best2 < 1e299 && cell_ * (ring - 1) > std::sqrt(best2)) return std::sqrt(best2);
      scan_ring(q, ring, best2);
    }
    if (best2 > 1e299)
      for (const VecN& p : pts_) best2 = std::min(best2, dot(sub(q, p), sub(q, p)));
    return std::sqrt(best2);
  }

 private:
  int64_t hash3(int64_t x, int64_t y, int64_t z) const {
    return (x * 73856093) ^ (y * 19349663) ^ (z * 83492791);
  }
  int64_t key_of(const VecN& p) const {
    auto c = [&](double v) { return static_cast<int64_t>(std::floor(v / cell_)); };
    return hash3(c(p[0]), c(p[1]), dim_ == 3 ? c(p[2]) : 0);
  }
  bool scan_ring(const VecN& q, int ring, double& best2) const {
    auto c = [&](double v) { return static_cast<int64_t>(std::floor(v / cell_)); };
    int64_t cx = c(q[0]), cy = c(q[1]), cz = dim_ == 3 ? c(q[2]) : 0;
    bool any = false;
    int64_t zlo = dim_ == 3 ? cz - ring : 0, zhi = dim_ == 3 ? cz + ring : 0;
    for (int64_t gx = cx - ring; gx <= cx + ring; ++gx)
      for (int64_t gy = cy - ring; gy <= cy + ring; ++gy)
        for (int64_t gz = zlo; gz <= zhi; ++gz) {
          if (std::max({std::abs(gx - cx), std::abs(gy - cy), std::abs(gz - cz)}) != ring &&
              ring > 0)
            continue;
          auto it = cells_.find(hash3(gx, gy, gz));
          if (it == cells_.end()) continue;
          for (int i : it->second) {
            VecN d = sub(q, pts_[i]);
            double d2 = dot(d, d);
            if (d2 < best2) {
              best2 = d2;
              any = true;
            }
          }
        }
    return any;
  }

  const std::vector<VecN>& pts_;
  int dim_;
  double cell_;
  std::unordered_map<int64_t, std::vector<int>> cells_;
};

double directed_hausdorff(const std::vector<VecN>& from, const PointGrid& to) {
  double worst = 0;
  for (const VecN& p : from) worst = std::max(worst, to.nearest_dist(p));
  return worst;
}

}  // namespace

HausdorffResult hausdorff_boundaries(const std::vector<VecN>& a, const std::vector<VecN>& b,
                                     int dim, double spacing_a, double spacing_b) {
  if (a.empty() || b.empty()) throw Error("hausdorff_boundaries: empty sample set");
  VecN lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  for (const VecN& p : a)
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  double extent = std::max({hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2], 1e-9});
  double cell = std::max({spacing_a, spacing_b, extent / 256.0});
  PointGrid ga(a, dim, cell), gb(b, dim, cell);
  HausdorffResult r;
  r.value = std::max(directed_hausdorff(a, gb), directed_hausdorff(b, ga));
  r.sampling_error = 0.5 * std::max(spacing_a, spacing_b);
  return r;
}

std::vector<VecN> extracted_boundary_points(const std::vector<ExtractedChart>& charts,
                                            const DomainAtlas& atlas, double window_limit) {
  std::vector<VecN> out;
  for (const ExtractedChart& ec : charts) {
    const LipschitzChart& ch = atlas.charts[ec.chart_index];
    for (int j = 0; j < ec.ny(); ++j)
      for (int i = 0; i < ec.nx(); ++i) {
        if (!ec.mask[ec.idx(i, j)]) continue;
        VecC yp = ec.node(i, j);
        if (normc(yp) > window_limit) continue;
        VecN y{yp[0], atlas.dim == 3 ? yp[1] : 0.0, 0.0};
        y[atlas.dim - 1] = ec.psi[ec.idx(i, j)];
        out.push_back(ch.frame.inverse(y));
      }
  }
  return out;
}

std::vector<VecN> base_boundary_points(const DomainAtlas& atlas, int res, double window_limit) {
  std::vector<VecN> out;
  const int d = atlas.dim - 1;
  for (const LipschitzChart& ch : atlas.charts) {
    int ny = d == 2 ? res : 1;
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < res; ++i) {
        VecC yp{-window_limit + 2 * window_limit * i / (res - 1),
                d == 2 ? -window_limit + 2 * window_limit * j / (res - 1) : 0.0};
        if (normc(yp) > window_limit) continue;
        out.push_back(ch.surface_point(yp));
      }
  }
  return out;
}

LebesgueGap lebesgue_gap(const DefiningTriple& triple, GapRegion region, double resolution) {
  const DomainAtlas& atlas = triple.exact.atlas();
  const double band_width = 3.0 * atlas.L() / triple.outer.m();
  if (resolution > band_width)
    throw Error("lebesgue_gap: resolution coarser than the 3L/m band width");
  VecN lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  for (const VecN& b : atlas.boundary_samples)
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], b[a]);
      hi[a] = std::max(hi[a], b[a]);
    }
  double pad = atlas.R() / 4;
  const int n = atlas.dim;
  LebesgueGap out;
  double h = resolution;
  long nx[3] = {1, 1, 1};
  for (int a = 0; a < n; ++a) nx[a] = static_cast<long>(std::ceil((hi[a] - lo[a] + 2 * pad) / h));
  long total = nx[0] * nx[1] * nx[2];
  long boundary_adjacent = 0, counted = 0;
  for (long c = 0; c < total; ++c) {
    long ix = c % nx[0], iy = (c / nx[0]) % nx[1], iz = c / (nx[0] * nx[1]);
    VecN x{lo[0] - pad + h * (ix + 0.5), lo[1] - pad + h * (iy + 0.5),
           n == 3 ? lo[2] - pad + h * (iz + 0.5) : 0.0};
    // quick reject away from the boundary shell (|F| <= 3L/m implies distance
    // <= |F| * 2 sqrt(1+L^2) once the vertical-derivative floor holds)
    double shell = band_width * 2.5 * std::sqrt(1.0 + atlas.L() * atlas.L()) +
                   h * std::sqrt(3.0);
    if (atlas.sdf && std::abs(atlas.sdf(x)) > shell) continue;
    Classification cl = classify(triple, x);
    if (!cl.in_domain) continue;
    bool in_gap = region == GapRegion::outer_minus_domain
                      ? (cl.Fm < 0 && cl.F >= 0)
                      : (cl.F < 0 && cl.Ftm >= 0);
    if (in_gap) ++counted;
    if (cl.boundary_band) ++boundary_adjacent;
  }
  out.cells_counted = counted;
  out.measure = static_cast<double>(counted) * std::pow(h, n);
  out.cell_error = static_cast<double>(boundary_adjacent) * std::pow(h, n) * 0.05 +
                   std::pow(h, n);  // conservative
  return out;
}

double sobolev_error(const ExtractedChart& ec, const LipschitzChart& base, int k, double p) {
  if (k < 1 || k > 2) throw Error("sobolev_error: order k must be 1 or 2");
  const int d = ec.dim - 1;
  double acc = 0;
  int jmax = d == 2 ? ec.ny() - 1 : 1;
  double cell = std::pow(ec.grid_h, d);
  for (int j = 0; j < jmax; ++j)
    for (int i = 0; i + 1 < ec.nx(); ++i) {
      int corners = d == 2 ? 4 : 2;
      int ids[4] = {ec.idx(i, j), ec.idx(i + 1, j), d == 2 ? ec.idx(i, j + 1) : 0,
                    d == 2 ? ec.idx(i + 1, j + 1) : 0};
      bool ok = true;
      for (int c = 0; c < corners; ++c) ok = ok && ec.mask[ids[c]];
      if (!ok) continue;
      VecC yp = ec.node(i, j);
      yp[0] += ec.grid_h * 0.5;
      if (d == 2) yp[1] += ec.grid_h * 0.5;

      double dv = 0;
      VecC dg{};
      MatC dh{};
      for (int c = 0; c < corners; ++c) {
        dv += ec.psi[ids[c]];
        dg = addc(dg, ec.grad[ids[c]]);
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b) dh[a][b] += ec.hess[ids[c]][a][b];
      }
      dv /= corners;
      dg = scalec(dg, 1.0 / corners);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) dh[a][b] /= corners;

      dv -= base.eval(yp);
      dg = subc(dg, base.grad(yp));
      if (k == 2) {
        MatC bh = base.hess(yp);
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b) dh[a][b] -= bh[a][b];
      }
      double term = std::pow(std::abs(dv), p) + std::pow(normc(dg), p);
      if (k == 2) term += std::pow(frobenius(dh, d), p);
      acc += term * cell;
    }
  return std::pow(acc, 1.0 / p);
}

MeasuredCharacteristic measure_characteristic(const std::vector<ExtractedChart>& charts,
                                              const DomainAtlas& atlas) {
  MeasuredCharacteristic mc;
  double sup_gap = 0;
  for (const ExtractedChart& ec : charts) {
    sup_gap = std::max(sup_gap, ec.sup_gap_vs_base);
    for (std::size_t node = 0; node < ec.mask.size(); ++node)
      if (ec.mask[node]) mc.L_m = std::max(mc.L_m, normc(ec.grad[node]));
  }
  // largest recentering radius certified by the extraction window: the window
  // must contain a ball around any boundary point (centers lie within R/8 of
  // every surface point), and the recentered cylinder must stay inside the
  // verified one
  double R = atlas.R(), L = atlas.L();
  double horizontal = (R - 2 * atlas.eps0) - R / 8.0;
  double vertical = (atlas.ell() - L * R / 8.0 - sup_gap) / (1.0 + std::max(mc.L_m, 1e-12));
  mc.R_m = std::min(horizontal, vertical);
  return mc;
}

static std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string ConvergenceReport::to_csv() const {
  std::string s =
      "m,m0,hausdorff_outer,hausdorff_inner,hausdorff_sampling,hausdorff_bound,"
      "lebesgue_outer,lebesgue_inner,sup_chart_gap,sup_chart_bound,min_margin,margin_floor,"
      "L_m,R_m,diam_outer,diam_inner,w12,w14,w21,w22,curv_q1,curv_q2\n";
  for (const ConvergenceRow& r : rows) {
    s += std::to_string(r.m) + "," + std::to_string(r.m0) + "," + fmt(r.hausdorff_outer) + "," +
         fmt(r.hausdorff_inner) + "," + fmt(r.hausdorff_sampling) + "," +
         fmt(r.hausdorff_bound) + "," + fmt(r.lebesgue_outer) + "," + fmt(r.lebesgue_inner) +
         "," + fmt(r.sup_chart_gap) + "," + fmt(r.sup_chart_bound) + "," + fmt(r.min_margin) +
         "," + fmt(r.margin_floor) + "," + fmt(r.L_m) + "," + fmt(r.R_m) + "," +
         fmt(r.diam_outer) + "," + fmt(r.diam_inner) + "," + fmt(r.w12) + "," + fmt(r.w14) +
         "," + fmt(r.w21) + "," + fmt(r.w22) + "," + fmt(r.curv_total_q1) + "," +
         fmt(r.curv_total_q2) + "\n";
  }
  return s;
}

std::string ConvergenceReport::to_json() const {
  nlohmann::json j;
  j["shape"] = shape;
  j["dim"] = dim;
  j["characteristic"] = {{"L", L}, {"R", R}, {"ell", R * (1 + L)}, {"diameter", diameter}};
  j["eps0"] = eps0;
  j["cover_beta"] = cover_beta;
  j["charts"] = charts;
  j["resolutions"] = {{"chart_res", chart_res}, {"vol_res", vol_res}};
  j["pinned_constants"] = {{"cardinality_c", 64.0},
                           {"bilipschitz_c", 8.0},
                           {"gradient_c", 8.0},
                           {"diameter_c", 2.0},
                           {"partition_C1", 64.0},
                           {"partition_C2", 4096.0},
                           {"sqrt_slab_c", 2.0},
                           {"capacity_Cn", 16.0}};
  j["rows"] = nlohmann::json::array();
  for (const ConvergenceRow& r : rows) {
    j["rows"].push_back({{"m", r.m},
                         {"m0", r.m0},
                         {"hausdorff_outer", r.hausdorff_outer},
                         {"hausdorff_inner", r.hausdorff_inner},
                         {"hausdorff_sampling", r.hausdorff_sampling},
                         {"hausdorff_bound", r.hausdorff_bound},
                         {"lebesgue_outer", r.lebesgue_outer},
                         {"lebesgue_inner", r.lebesgue_inner},
                         {"sup_chart_gap", r.sup_chart_gap},
                         {"sup_chart_bound", r.sup_chart_bound},
                         {"min_margin", r.min_margin},
                         {"margin_floor", r.margin_floor},
                         {"L_m", r.L_m},
                         {"R_m", r.R_m},
                         {"diam_outer", r.diam_outer},
                         {"diam_inner", r.diam_inner},
                         {"w12", r.w12},
                         {"w14", r.w14},
                         {"w21", r.w21},
                         {"w22", r.w22},
                         {"curv_q1", r.curv_total_q1},
                         {"curv_q2", r.curv_total_q2}});
  }
  return j.dump(2);
}

}  // namespace lipsmooth
