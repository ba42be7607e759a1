#include "lipsmooth/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <unordered_map>

namespace lipsmooth {

ShapeSpec parse_shape_spec(const std::string& text) {
  ShapeSpec spec;
  auto colon = text.find(':');
  spec.name = text.substr(0, colon);
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto eq = item.find('=');
      if (eq == std::string::npos) throw Error("shape spec: expected key=value in '" + item + "'");
      try {
        spec.params[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
      } catch (const std::exception&) {
        throw Error("shape spec: bad number in '" + item + "'");
      }
    }
  }
  auto defaults = shape_defaults(spec.name);
  for (const auto& [k, v] : spec.params)
    if (!defaults.count(k))
      throw Error("shape spec: unknown parameter '" + k + "' for " + spec.name);
  for (const auto& [k, v] : defaults)
    if (!spec.params.count(k)) spec.params[k] = v;
  return spec;
}

std::map<std::string, double> shape_defaults(const std::string& name) {
  if (name == "disk") return {{"radius", 3.2}, {"lip", 0.2}};
  if (name == "square") return {{"side", 4.0}, {"chart_radius", 0.9}};
  if (name == "regular_polygon")
    return {{"sides", 6.0}, {"circumradius", 2.0}, {"chart_radius", 0.5}};
  if (name == "star")
    return {{"lobes", 5.0}, {"base_radius", 2.5}, {"amp", 0.04}, {"lip", 0.5}, {"chart_radius", 0.5}};
  if (name == "sphere") return {{"radius", 1.0}, {"lip", 1.0}};
  if (name == "cube") return {{"side", 1.0}, {"chart_radius", 0.2}};
  if (name == "cylinder")
    return {{"radius", 1.0}, {"half_height", 1.0}, {"chart_radius", 0.3}, {"lip", 1.1}};
  throw Error("unknown shape id '" + name + "'");
}

namespace {

MatN rot2(const VecN& tangent, const VecN& normal) {
  MatN r = identityN();
  r[0][0] = tangent[0];
  r[0][1] = tangent[1];
  r[1][0] = normal[0];
  r[1][1] = normal[1];
  return r;
}

MatN rot3(const VecN& t1, const VecN& t2, const VecN& normal) {
  MatN r{};
  for (int k = 0; k < 3; ++k) {
    r[0][k] = t1[k];
    r[1][k] = t2[k];
    r[2][k] = normal[k];
  }
  return r;
}

VecN perp2(const VecN& v) { return {v[1], -v[0], 0}; }

VecN cross(const VecN& a, const VecN& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

void tangent_basis(const VecN& n, VecN& t1, VecN& t2) {
  VecN a = std::abs(n[0]) < 0.9 ? VecN{1, 0, 0} : VecN{0, 1, 0};
  t1 = sub(a, scale(n, dot(a, n)));
  t1 = scale(t1, 1.0 / norm(t1));
  t2 = cross(n, t1);
}

double cover_spacing(double cover_radius, int dim) {
  return dim == 2 ? cover_radius / 4.0 : cover_radius / 2.5;
}

// Generic monotone vertical crossing: smallest-bracket root of g on
// [-span, span] with a uniqueness scan. g < 0 below the surface.
double vertical_root(const std::function<double(double)>& g, double span, const char* what) {
  const int scan = 64;
  double blo = 0, bhi = 0;
  int cross = 0;
  double pt = -span, pf = g(pt);
  for (int s = 1; s <= scan; ++s) {
    double t = -span + 2.0 * span * s / scan;
    double f = g(t);
    if ((pf <= 0 && f > 0) || (pf >= 0 && f < 0)) {
      ++cross;
      blo = pt;
      bhi = t;
    }
    pt = t;
    pf = f;
  }
  if (cross != 1) throw Error(std::string(what) + ": cylinder does not graph the boundary");
  double lo = blo, hi = bhi, flo = g(lo);
  for (int it = 0; it < 80 && hi - lo > 1e-15 * span; ++it) {
    double mid = 0.5 * (lo + hi), fm = g(mid);
    if ((flo <= 0 && fm > 0) || (flo >= 0 && fm < 0))
      hi = mid;
    else {
      lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (lo + hi);
}

// ----- disk -----------------------------------------------------------------

DomainAtlas build_disk(const ShapeSpec& spec, double cover_beta) {
  double rho = spec.params.at("radius");
  double L = spec.params.at("lip");
  if (!(rho > 0) || !(L > 0)) throw Error("disk: radius and lip must be > 0");
  double R = rho * L / std::sqrt(1.0 + L * L);
  if (!(R < 1.0))
    throw Error("disk: derived chart radius " + std::to_string(R) + " not < 1");

  DomainAtlas atlas;
  atlas.dim = 2;
  atlas.shape_name = "disk";
  atlas.sdf_smooth_in_shell = true;
  atlas.characteristic = LipschitzCharacteristic::make(L, R, 2.0 * rho);
  atlas.eps0 = R / 8.0;
  atlas.sdf = [rho](const VecN& x) { return rho - std::sqrt(x[0] * x[0] + x[1] * x[1]); };

  double cr = cover_beta * R / 8.0;
  int ns = std::max(16, static_cast<int>(std::ceil(2.0 * M_PI * rho / cover_spacing(cr, 2))));
  for (int k = 0; k < ns; ++k) {
    double th = 2.0 * M_PI * k / ns;
    atlas.boundary_samples.push_back({rho * std::cos(th), rho * std::sin(th), 0});
  }
  for (int p : greedy_cover(atlas.boundary_samples, cr)) {
    const VecN c = atlas.boundary_samples[p];
    VecN u = scale(c, 1.0 / rho);
    LipschitzChart ch;
    ch.frame.dim = 2;
    ch.frame.rotation = rot2(perp2(u), u);
    ch.frame.base = c;
    ch.radius = R;
    ch.lipschitz = L;
    ch.fn.value = [rho](const VecC& y) { return std::sqrt(rho * rho - y[0] * y[0]) - rho; };
    ch.fn.grad = [rho](const VecC& y) {
      return VecC{-y[0] / std::sqrt(rho * rho - y[0] * y[0]), 0};
    };
    ch.fn.hess = [rho](const VecC& y) {
      double s = rho * rho - y[0] * y[0];
      MatC h{};
      h[0][0] = -rho * rho / (s * std::sqrt(s));
      return h;
    };
    atlas.charts.push_back(std::move(ch));
    atlas.centers.push_back(c);
  }
  return atlas;
}

// ----- convex polygon (square, regular_polygon) -------------------------------

struct Polygon {
  std::vector<VecN> verts;  // counterclockwise
  double slope;

  VecN edge_dir(int e) const {
    VecN d = sub(verts[(e + 1) % verts.size()], verts[e]);
    return scale(d, 1.0 / norm(d));
  }
  VecN edge_normal(int e) const {
    VecN d = edge_dir(e);
    return {d[1], -d[0], 0};
  }
  double sdf(const VecN& x) const {
    const int k = static_cast<int>(verts.size());
    double inside = 1e300, out2 = 1e300;
    bool is_out = false;
    for (int e = 0; e < k; ++e) {
      VecN a = verts[e], b = verts[(e + 1) % k];
      VecN ab = sub(b, a);
      double t = std::clamp(dot(sub(x, a), ab) / dot(ab, ab), 0.0, 1.0);
      VecN p = add(a, scale(ab, t));
      out2 = std::min(out2, dot(sub(x, p), sub(x, p)));
      double side = dot(sub(x, a), edge_normal(e));
      inside = std::min(inside, -side);
      if (side > 0) is_out = true;
    }
    return is_out ? -std::sqrt(out2) : inside;
  }
};

DomainAtlas build_polygon(const Polygon& poly, double R, double cover_beta,
                          const std::string& name) {
  const int k = static_cast<int>(poly.verts.size());
  const double L = poly.slope;
  double edge_len = dist(poly.verts[0], poly.verts[1]);
  if (!(R > 0 && R < 1)) throw Error(name + ": chart_radius must be in (0,1)");
  double reach = (1.5 + std::sqrt(1.0 + (1.0 + L) * (1.0 + L))) * R;
  if (reach > 0.9 * edge_len)
    throw Error(name + ": chart_radius too large for edge length " + std::to_string(edge_len));

  double diam = 0;
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) diam = std::max(diam, dist(poly.verts[a], poly.verts[b]));

  DomainAtlas atlas;
  atlas.dim = 2;
  atlas.shape_name = name;
  atlas.characteristic = LipschitzCharacteristic::make(L, R, diam);
  atlas.eps0 = R / 8.0;
  Polygon p = poly;
  atlas.sdf = [p](const VecN& x) { return p.sdf(x); };

  double cr = cover_beta * R / 8.0;
  double spacing = cover_spacing(cr, 2);
  for (int e = 0; e < k; ++e) {
    VecN a = poly.verts[e], b = poly.verts[(e + 1) % k];
    int ns = std::max(8, static_cast<int>(std::ceil(dist(a, b) / spacing)));
    for (int s = 0; s < ns; ++s)
      atlas.boundary_samples.push_back(add(a, scale(sub(b, a), double(s) / ns)));
  }

  for (int pidx : greedy_cover(atlas.boundary_samples, cr)) {
    VecN c = atlas.boundary_samples[pidx];
    int vi = 0;
    double dv = 1e300;
    for (int v = 0; v < k; ++v)
      if (dist(c, poly.verts[v]) < dv) {
        dv = dist(c, poly.verts[v]);
        vi = v;
      }
    LipschitzChart ch;
    ch.frame.dim = 2;
    ch.frame.base = c;
    ch.radius = R;
    ch.lipschitz = L;
    if (dv < 1.5 * R) {
      VecN u = add(poly.edge_normal((vi + k - 1) % k), poly.edge_normal(vi));
      u = scale(u, 1.0 / norm(u));
      ch.frame.rotation = rot2(perp2(u), u);
      double tv = ch.frame.forward(poly.verts[vi])[0];
      double slope = L;
      ch.fn.value = [tv, slope](const VecC& y) {
        return slope * (std::abs(tv) - std::abs(y[0] - tv));
      };
      ch.fn.grad = [tv, slope](const VecC& y) { return VecC{y[0] >= tv ? -slope : slope, 0}; };
      ch.fn.hess = [](const VecC&) { return MatC{}; };
    } else {
      int e = -1;
      for (int t = 0; t < k; ++t) {
        VecN a = poly.verts[t];
        double along = dot(sub(c, a), poly.edge_dir(t));
        if (along >= -1e-9 && along <= dist(a, poly.verts[(t + 1) % k]) + 1e-9 &&
            std::abs(dot(sub(c, a), poly.edge_normal(t))) < 1e-9) {
          e = t;
          break;
        }
      }
      if (e < 0) throw Error(name + ": covering center not on an edge");
      ch.frame.rotation = rot2(poly.edge_dir(e), poly.edge_normal(e));
      ch.fn.value = [](const VecC&) { return 0.0; };
      ch.fn.grad = [](const VecC&) { return VecC{}; };
      ch.fn.hess = [](const VecC&) { return MatC{}; };
    }
    atlas.charts.push_back(std::move(ch));
    atlas.centers.push_back(c);
  }
  return atlas;
}

// ----- star -------------------------------------------------------------------

// uniform-grid nearest neighbor over a point cloud (star boundary polyline)
struct HashedCloud {
  std::vector<VecN> pts;
  double cell = 1.0;
  std::unordered_map<int64_t, std::vector<int>> cells;

  void build(std::vector<VecN> p, double cell_size) {
    pts = std::move(p);
    cell = cell_size;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i)
      cells[key(pts[i][0], pts[i][1])].push_back(i);
  }
  int64_t key(double x, double y) const {
    int64_t gx = static_cast<int64_t>(std::floor(x / cell));
    int64_t gy = static_cast<int64_t>(std::floor(y / cell));
    return gx * 73856093 ^ gy * 19349663;
  }
  double nearest(const VecN& q) const {
    double best2 = 1e300;
    for (int ring = 0; ring <= 4096; ++ring) {
      if (best2 < 1e299 && cell * (ring - 1) > std::sqrt(best2)) break;
      int64_t cx = static_cast<int64_t>(std::floor(q[0] / cell));
      int64_t cy = static_cast<int64_t>(std::floor(q[1] / cell));
      for (int64_t gx = cx - ring; gx <= cx + ring; ++gx)
        for (int64_t gy = cy - ring; gy <= cy + ring; ++gy) {
          if (std::max(std::abs(gx - cx), std::abs(gy - cy)) != ring && ring > 0) continue;
          auto it = cells.find(gx * 73856093 ^ gy * 19349663);
          if (it == cells.end()) continue;
          for (int i : it->second) {
            VecN d = sub(q, pts[i]);
            best2 = std::min(best2, dot(d, d));
          }
        }
    }
    return std::sqrt(best2);
  }
};

struct Star {
  int lobes;
  double rho0, amp;
  double r(double th) const { return rho0 * (1.0 + amp * std::cos(lobes * th)); }
  double dr(double th) const { return -rho0 * amp * lobes * std::sin(lobes * th); }
  VecN point(double th) const { return {r(th) * std::cos(th), r(th) * std::sin(th), 0}; }
  VecN outward(double th) const {
    double rr = r(th), rd = dr(th);
    VecN t{rd * std::cos(th) - rr * std::sin(th), rd * std::sin(th) + rr * std::cos(th), 0};
    VecN n{t[1], -t[0], 0};
    return scale(n, 1.0 / norm(n));
  }
  bool inside(const VecN& x) const {
    return std::sqrt(x[0] * x[0] + x[1] * x[1]) < r(std::atan2(x[1], x[0]));
  }
};

DomainAtlas build_star(const ShapeSpec& spec, double cover_beta) {
  Star st;
  st.lobes = static_cast<int>(spec.params.at("lobes"));
  st.rho0 = spec.params.at("base_radius");
  st.amp = spec.params.at("amp");
  double L = spec.params.at("lip");
  double R = spec.params.at("chart_radius");
  if (st.lobes < 3) throw Error("star: lobes must be >= 3");
  if (!(st.amp >= 0 && st.amp < 1)) throw Error("star: amp must be in [0,1)");
  if (!(R > 0 && R < 1)) throw Error("star: chart_radius must be in (0,1)");

  double rmax = st.rho0 * (1 + st.amp);
  DomainAtlas atlas;
  atlas.dim = 2;
  atlas.shape_name = "star";
  atlas.sdf_smooth_in_shell = true;
  atlas.characteristic = LipschitzCharacteristic::make(L, R, 2.0 * rmax);
  atlas.eps0 = R / 8.0;

  int np = 16384;
  std::vector<VecN> polyline;
  polyline.reserve(np);
  for (int i = 0; i < np; ++i) polyline.push_back(st.point(2.0 * M_PI * i / np));
  auto cloud = std::make_shared<HashedCloud>();
  cloud->build(std::move(polyline), rmax * 2.0 * M_PI / np * 8.0);
  Star stc = st;
  atlas.sdf = [stc, cloud](const VecN& x) {
    double d = cloud->nearest(x);
    return stc.inside(x) ? d : -d;
  };

  double ell = R * (1.0 + L);
  double cr = cover_beta * R / 8.0;
  int ns = std::max(64, static_cast<int>(std::ceil(2.0 * M_PI * rmax / cover_spacing(cr, 2))));
  std::vector<double> thetas(ns);
  for (int i = 0; i < ns; ++i) {
    thetas[i] = 2.0 * M_PI * i / ns;
    atlas.boundary_samples.push_back(st.point(thetas[i]));
  }

  for (int pidx : greedy_cover(atlas.boundary_samples, cr)) {
    double th = thetas[pidx];
    VecN c = st.point(th);
    VecN u = st.outward(th);
    LipschitzChart ch;
    ch.frame.dim = 2;
    ch.frame.base = c;
    ch.frame.rotation = rot2(perp2(u), u);
    ch.radius = R;
    ch.lipschitz = L;
    ReferenceFrame fr = ch.frame;
    auto exact = [stc, fr, ell](const VecC& y) {
      auto g = [&](double t) {
        VecN w = fr.inverse(VecN{y[0], t, 0});
        return std::sqrt(w[0] * w[0] + w[1] * w[1]) - stc.r(std::atan2(w[1], w[0]));
      };
      return vertical_root(g, ell, "star");
    };
    const int gres = 257;
    std::vector<double> vals(gres);
    for (int i = 0; i < gres; ++i) vals[i] = exact(VecC{-R + 2 * R * i / (gres - 1), 0});
    GridChart grid(1, VecC{-R, 0}, 2 * R / (gres - 1), gres, 1, std::move(vals));
    ch.fn = grid.as_fn();
    atlas.charts.push_back(std::move(ch));
    atlas.centers.push_back(c);
  }

  for (const auto& ch : atlas.charts) {
    const int probes = 24;
    double step = 2 * R * 0.98 / probes;
    double prev = ch.eval(VecC{-R * 0.98, 0});
    for (int i = 1; i <= probes; ++i) {
      double v = ch.eval(VecC{-R * 0.98 + step * i, 0});
      if (std::abs(v - prev) > L * step * (1 + 1e-6))
        throw Error("star: radial function exceeds requested Lipschitz constant " +
                    std::to_string(L));
      prev = v;
    }
  }
  return atlas;
}

// ----- sphere -------------------------------------------------------------------

std::vector<VecN> fibonacci_sphere(double rho, int count) {
  std::vector<VecN> pts;
  pts.reserve(count);
  const double ga = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    double z = 1.0 - 2.0 * (i + 0.5) / count;
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double th = ga * i;
    pts.push_back({rho * r * std::cos(th), rho * r * std::sin(th), rho * z});
  }
  return pts;
}

DomainAtlas build_sphere(const ShapeSpec& spec, double cover_beta) {
  double rho = spec.params.at("radius");
  double L = spec.params.at("lip");
  double R = rho * L / std::sqrt(1.0 + L * L);
  if (!(R < 1.0))
    throw Error("sphere: derived chart radius " + std::to_string(R) + " not < 1");

  DomainAtlas atlas;
  atlas.dim = 3;
  atlas.shape_name = "sphere";
  atlas.sdf_smooth_in_shell = true;
  atlas.characteristic = LipschitzCharacteristic::make(L, R, 2.0 * rho);
  atlas.eps0 = R / 8.0;
  atlas.sdf = [rho](const VecN& x) { return rho - norm(x); };

  double cr = cover_beta * R / 8.0;
  double spacing = cover_spacing(cr, 3);
  int count = std::max(256, static_cast<int>(std::ceil(4.0 * M_PI * rho * rho / (spacing * spacing))));
  atlas.boundary_samples = fibonacci_sphere(rho, count);
  for (int p : greedy_cover(atlas.boundary_samples, cr)) {
    VecN c = atlas.boundary_samples[p];
    VecN u = scale(c, 1.0 / rho);
    VecN t1, t2;
    tangent_basis(u, t1, t2);
    LipschitzChart ch;
    ch.frame.dim = 3;
    ch.frame.base = c;
    ch.frame.rotation = rot3(t1, t2, u);
    ch.radius = R;
    ch.lipschitz = L;
    ch.fn.value = [rho](const VecC& y) {
      return std::sqrt(rho * rho - y[0] * y[0] - y[1] * y[1]) - rho;
    };
    ch.fn.grad = [rho](const VecC& y) {
      double s = std::sqrt(rho * rho - y[0] * y[0] - y[1] * y[1]);
      return VecC{-y[0] / s, -y[1] / s};
    };
    ch.fn.hess = [rho](const VecC& y) {
      double s2 = rho * rho - y[0] * y[0] - y[1] * y[1];
      double s = std::sqrt(s2);
      MatC h{};
      h[0][0] = -(s2 + y[0] * y[0]) / (s2 * s);
      h[1][1] = -(s2 + y[1] * y[1]) / (s2 * s);
      h[0][1] = h[1][0] = -(y[0] * y[1]) / (s2 * s);
      return h;
    };
    atlas.charts.push_back(std::move(ch));
    atlas.centers.push_back(c);
  }
  return atlas;
}

// ----- cube ---------------------------------------------------------------------

DomainAtlas build_cube(const ShapeSpec& spec, double cover_beta) {
  double a = spec.params.at("side");
  double R = spec.params.at("chart_radius");
  double half = a / 2.0;
  const double L = std::sqrt(2.0);
  if (!(R > 0 && R < 1)) throw Error("cube: chart_radius must be in (0,1)");
  if (R > 0.218 * a) throw Error("cube: chart_radius too large for side " + std::to_string(a));

  DomainAtlas atlas;
  atlas.dim = 3;
  atlas.shape_name = "cube";
  atlas.characteristic = LipschitzCharacteristic::make(L, R, a * std::sqrt(3.0));
  atlas.eps0 = R / 8.0;
  atlas.sdf = [half](const VecN& x) {
    double qx = std::abs(x[0]) - half, qy = std::abs(x[1]) - half, qz = std::abs(x[2]) - half;
    double mx = std::max({qx, qy, qz});
    if (mx <= 0) return -mx;  // inside: distance to the nearest face
    double ox = std::max(qx, 0.0), oy = std::max(qy, 0.0), oz = std::max(qz, 0.0);
    return -std::sqrt(ox * ox + oy * oy + oz * oz);
  };

  double cr = cover_beta * R / 8.0;
  double spacing = cover_spacing(cr, 3);
  int ns = std::max(4, static_cast<int>(std::ceil(a / spacing)));
  for (int face = 0; face < 6; ++face) {
    int axis = face / 2;
    double sgn = face % 2 == 0 ? 1.0 : -1.0;
    for (int i = 0; i < ns; ++i)
      for (int j = 0; j < ns; ++j) {
        double u = -half + a * (i + 0.5) / ns, v = -half + a * (j + 0.5) / ns;
        VecN p{};
        p[axis] = sgn * half;
        p[(axis + 1) % 3] = u;
        p[(axis + 2) % 3] = v;
        atlas.boundary_samples.push_back(p);
      }
  }

  for (int pidx : greedy_cover(atlas.boundary_samples, cr)) {
    VecN c = atlas.boundary_samples[pidx];
    // nearest vertex and edge distances
    VecN vtx{half * (c[0] >= 0 ? 1 : -1), half * (c[1] >= 0 ? 1 : -1),
             half * (c[2] >= 0 ? 1 : -1)};
    double dv = dist(c, vtx);
    // distances of each coordinate to the face planes
    std::array<double, 3> gap{half - std::abs(c[0]), half - std::abs(c[1]),
                              half - std::abs(c[2])};
    int on_axis = 0;
    for (int k = 1; k < 3; ++k)
      if (gap[k] < gap[on_axis]) on_axis = k;  // the face the point lies on
    // second smallest gap = distance to the nearest edge along the surface
    std::array<int, 3> ord{0, 1, 2};
    std::sort(ord.begin(), ord.end(), [&](int x, int y) { return gap[x] < gap[y]; });
    double de = gap[ord[1]];

    LipschitzChart ch;
    ch.frame.dim = 3;
    ch.frame.base = c;
    ch.radius = R;
    ch.lipschitz = L;

    auto face_normal = [&](int axis) {
      VecN n{};
      n[axis] = c[axis] >= 0 ? 1.0 : -1.0;
      return n;
    };

    if (dv < 1.5 * R) {
      // corner frame: outward diagonal; boundary = min of three face planes
      VecN u = scale(VecN{vtx[0], vtx[1], vtx[2]}, 1.0 / norm(vtx));
      VecN t1, t2;
      tangent_basis(u, t1, t2);
      ch.frame.rotation = rot3(t1, t2, u);
      ReferenceFrame fr = ch.frame;
      std::array<VecN, 3> normals = {face_normal(0), face_normal(1), face_normal(2)};
      VecN v = vtx;
      auto plane_graph = [fr, v](const VecN& nf, const VecC& y) {
        VecN nt = matvec(fr.rotation, nf);
        double rhs = dot(nf, sub(v, fr.base));
        return (rhs - nt[0] * y[0] - nt[1] * y[1]) / nt[2];
      };
      ch.fn.value = [plane_graph, normals](const VecC& y) {
        return std::min({plane_graph(normals[0], y), plane_graph(normals[1], y),
                         plane_graph(normals[2], y)});
      };
    } else if (de < 1.5 * R) {
      // edge frame: bisector of the two nearest faces; boundary = min of two planes
      int a1 = ord[0], a2 = ord[1];
      VecN n1 = face_normal(a1), n2 = face_normal(a2);
      VecN u = add(n1, n2);
      u = scale(u, 1.0 / norm(u));
      VecN t1, t2;
      tangent_basis(u, t1, t2);
      ch.frame.rotation = rot3(t1, t2, u);
      ReferenceFrame fr = ch.frame;
      // both planes pass through the edge point nearest to c
      VecN onpt = c;
      onpt[a1] = half * (c[a1] >= 0 ? 1 : -1);
      onpt[a2] = half * (c[a2] >= 0 ? 1 : -1);
      auto plane_graph = [fr, onpt](const VecN& nf, const VecC& y) {
        VecN nt = matvec(fr.rotation, nf);
        double rhs = dot(nf, sub(onpt, fr.base));
        return (rhs - nt[0] * y[0] - nt[1] * y[1]) / nt[2];
      };
      ch.fn.value = [plane_graph, n1, n2](const VecC& y) {
        return std::min(plane_graph(n1, y), plane_graph(n2, y));
      };
    } else {
      // face frame: flat chart
      VecN u = face_normal(on_axis);
      VecN t1, t2;
      tangent_basis(u, t1, t2);
      ch.frame.rotation = rot3(t1, t2, u);
      ch.fn.value = [](const VecC&) { return 0.0; };
      ch.fn.grad = [](const VecC&) { return VecC{}; };
      ch.fn.hess = [](const VecC&) { return MatC{}; };
    }
    atlas.charts.push_back(std::move(ch));
    atlas.centers.push_back(c);
  }
  return atlas;
}

// ----- cylinder ------------------------------------------------------------------

DomainAtlas build_cylinder(const ShapeSpec& spec, double cover_beta) {
  double rho = spec.params.at("radius");
  double hh = spec.params.at("half_height");
  double R = spec.params.at("chart_radius");
  double L = spec.params.at("lip");
  if (!(R > 0 && R < 1)) throw Error("cylinder: chart_radius must be in (0,1)");
  if (R > 0.3 * std::min(rho, hh))
    throw Error("cylinder: chart_radius too large for the given radius/half_height");

  double diam = std::sqrt(4 * rho * rho + 4 * hh * hh);
  DomainAtlas atlas;
  atlas.dim = 3;
  atlas.shape_name = "cylinder";
  atlas.sdf_smooth_in_shell = true;
  atlas.characteristic = LipschitzCharacteristic::make(L, R, diam);
  atlas.eps0 = R / 8.0;
  atlas.sdf = [rho, hh](const VecN& x) {
    double dr = rho - std::sqrt(x[0] * x[0] + x[1] * x[1]);
    double dz = hh - std::abs(x[2]);
    if (dr >= 0 && dz >= 0) return std::min(dr, dz);
    double ox = std::max(-dr, 0.0), oz = std::max(-dz, 0.0);
    return -std::sqrt(ox * ox + oz * oz);
  };

  double cr = cover_beta * R / 8.0;
  double spacing = cover_spacing(cr, 3);
  // side
  int na = std::max(8, static_cast<int>(std::ceil(2 * M_PI * rho / spacing)));
  int nz = std::max(4, static_cast<int>(std::ceil(2 * hh / spacing)));
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nz; ++j) {
      double th = 2 * M_PI * i / na, z = -hh + 2 * hh * (j + 0.5) / nz;
      atlas.boundary_samples.push_back({rho * std::cos(th), rho * std::sin(th), z});
    }
  // caps (polar rings)
  int nr = std::max(2, static_cast<int>(std::ceil(rho / spacing)));
  for (int s = -1; s <= 1; s += 2)
    for (int ir = 0; ir < nr; ++ir) {
      double r = rho * (ir + 0.5) / nr;
      int nth = std::max(6, static_cast<int>(std::ceil(2 * M_PI * r / spacing)));
      for (int i = 0; i < nth; ++i) {
        double th = 2 * M_PI * i / nth;
        atlas.boundary_samples.push_back({r * std::cos(th), r * std::sin(th), s * hh});
      }
    }

  double ell = R * (1 + L);
  for (int pidx : greedy_cover(atlas.boundary_samples, cr)) {
    VecN c = atlas.boundary_samples[pidx];
    double rc = std::sqrt(c[0] * c[0] + c[1] * c[1]);
    double s = c[2] >= 0 ? 1.0 : -1.0;
    // surface distance to the rim circle on this end
    double drim = std::sqrt((rho - rc) * (rho - rc) + (hh - std::abs(c[2])) * (hh - std::abs(c[2])));

    LipschitzChart ch;
    ch.frame.dim = 3;
    ch.frame.base = c;
    ch.radius = R;
    ch.lipschitz = L;

    VecN rad = rc > 1e-12 ? VecN{c[0] / rc, c[1] / rc, 0} : VecN{1, 0, 0};
    VecN axi{0, 0, s};

    if (drim < 1.5 * R) {
      // rim frame: 45-degree bisector of radial and axial directions
      VecN u = scale(add(rad, axi), 1.0 / std::sqrt(2.0));
      VecN t2{-rad[1], rad[0], 0};  // azimuthal
      VecN t1 = cross(t2, u);
      ch.frame.rotation = rot3(t1, t2, u);
      ReferenceFrame fr = ch.frame;
      double zcap = s * hh;
      ch.fn.value = [fr, rho, zcap, ell](const VecC& y) {
        // cap plane graph (linear; vertical component of e_z in frame is 1/sqrt(2))
        VecN ez = matvec(fr.rotation, VecN{0, 0, 1});
        double cap = (zcap - fr.base[2] - ez[0] * y[0] - ez[1] * y[1]) / ez[2];
        // side surface graph (monotone radial crossing); may miss at cap-side nodes
        double side = 2.0 * ell;
        auto g = [&](double t) {
          VecN w = fr.inverse(VecN{y[0], y[1], t});
          return std::sqrt(w[0] * w[0] + w[1] * w[1]) - rho;
        };
        double lo = -2 * ell, hi = 2 * ell;
        if (g(lo) < 0 && g(hi) > 0) {
          double flo = g(lo);
          for (int it = 0; it < 80 && hi - lo > 1e-15 * ell; ++it) {
            double mid = 0.5 * (lo + hi), fm = g(mid);
            if (fm > 0)
              hi = mid;
            else {
              lo = mid;
              flo = fm;
            }
          }
          (void)flo;
          side = 0.5 * (lo + hi);
        }
        return std::min(cap, side);
      };
    } else if (hh - std::abs(c[2]) < rho - rc) {
      // cap frame
      VecN u = axi;
      VecN t1, t2;
      tangent_basis(u, t1, t2);
      ch.frame.rotation = rot3(t1, t2, u);
      ch.fn.value = [](const VecC&) { return 0.0; };
      ch.fn.grad = [](const VecC&) { return VecC{}; };
      ch.fn.hess = [](const VecC&) { return MatC{}; };
    } else {
      // side frame: azimuthal + axial tangents, radial vertical
      VecN u = rad;
      VecN t1{-rad[1], rad[0], 0};
      VecN t2 = cross(u, t1);
      ch.frame.rotation = rot3(t1, t2, u);
      ch.fn.value = [rho](const VecC& y) {
        return std::sqrt(rho * rho - y[0] * y[0]) - rho;
      };
      ch.fn.grad = [rho](const VecC& y) {
        return VecC{-y[0] / std::sqrt(rho * rho - y[0] * y[0]), 0};
      };
      ch.fn.hess = [rho](const VecC& y) {
        double s2 = rho * rho - y[0] * y[0];
        MatC h{};
        h[0][0] = -rho * rho / (s2 * std::sqrt(s2));
        return h;
      };
    }
    atlas.charts.push_back(std::move(ch));
    atlas.centers.push_back(c);
  }
  return atlas;
}

}  // namespace

DomainAtlas make_shape(const ShapeSpec& spec_in, double cover_beta) {
  ShapeSpec spec = spec_in;
  auto defaults = shape_defaults(spec.name);
  for (const auto& [k, v] : defaults)
    if (!spec.params.count(k)) spec.params[k] = v;

  DomainAtlas atlas;
  if (spec.name == "disk")
    atlas = build_disk(spec, cover_beta);
  else if (spec.name == "square") {
    double a = spec.params.at("side");
    Polygon poly;
    poly.verts = {{a / 2, -a / 2, 0}, {a / 2, a / 2, 0}, {-a / 2, a / 2, 0}, {-a / 2, -a / 2, 0}};
    poly.slope = 1.0;
    atlas = build_polygon(poly, spec.params.at("chart_radius"), cover_beta, "square");
  } else if (spec.name == "regular_polygon") {
    int k = static_cast<int>(spec.params.at("sides"));
    if (k < 3) throw Error("regular_polygon: sides must be >= 3");
    Polygon poly;
    poly.slope = std::tan(M_PI / k);
    double circ = spec.params.at("circumradius");
    for (int i = 0; i < k; ++i) {
      double th = 2.0 * M_PI * i / k;
      poly.verts.push_back({circ * std::cos(th), circ * std::sin(th), 0});
    }
    atlas = build_polygon(poly, spec.params.at("chart_radius"), cover_beta, "regular_polygon");
  } else if (spec.name == "star")
    atlas = build_star(spec, cover_beta);
  else if (spec.name == "sphere")
    atlas = build_sphere(spec, cover_beta);
  else if (spec.name == "cube")
    atlas = build_cube(spec, cover_beta);
  else if (spec.name == "cylinder")
    atlas = build_cylinder(spec, cover_beta);
  else
    throw Error("unknown shape id '" + spec.name + "'");
  atlas.cover_radius = cover_beta * atlas.R() / 8.0;
  atlas.build_index();
  return atlas;
}

std::vector<VecN> shape_boundary_samples(const ShapeSpec& spec, double spacing) {
  DomainAtlas atlas = make_shape(spec);
  if (spacing <= 0) return atlas.boundary_samples;
  std::vector<VecN> out;
  for (const VecN& p : atlas.boundary_samples) {
    bool keep = true;
    for (auto it = out.rbegin(); it != out.rend() && it - out.rbegin() < 64; ++it)
      if (dist(*it, p) < spacing) {
        keep = false;
        break;
      }
    if (keep) out.push_back(p);
  }
  return out;
}

}  // namespace lipsmooth
