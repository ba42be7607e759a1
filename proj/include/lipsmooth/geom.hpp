#ifndef LIPSMOOTH_GEOM_HPP
#define LIPSMOOTH_GEOM_HPP

#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "lipsmooth/common.hpp"

namespace lipsmooth {

// Isometry T x = R (x - x0). forward() maps world points to frame coordinates,
// with the n-th frame axis pointing out of the domain (graphs sit over the
// first n-1 axes, the domain below them).
struct ReferenceFrame {
  MatN rotation = identityN();
  VecN base{};
  int dim = 2;

  VecN forward(const VecN& x) const { return matvec(rotation, sub(x, base)); }
  VecN inverse(const VecN& y) const { return add(matvecT(rotation, y), base); }
  // world direction of the frame's vertical axis, R^T e_n
  VecN vertical() const {
    VecN e{};
    e[dim - 1] = 1.0;
    return matvecT(rotation, e);
  }
  double orthogonality_defect() const;
};

struct LipschitzCharacteristic {
  double L = 0;         // chart Lipschitz constant
  double R = 0;         // chart ball radius, in (0,1)
  double ell = 0;       // cylinder half-height, R(1+L)
  double diameter = 0;  // d_Omega

  static LipschitzCharacteristic make(double L, double R, double diameter);
};

// Scalar field on B'_R in chart coordinates. grad/hess are optional; when
// absent they are formed by central differences.
struct ChartFn {
  std::function<double(const VecC&)> value;
  std::function<VecC(const VecC&)> grad;
  std::function<MatC(const VecC&)> hess;
};

struct LipschitzChart {
  ReferenceFrame frame;
  double radius = 0;     // R
  double lipschitz = 0;  // L
  ChartFn fn;

  int cdim() const { return frame.dim - 1; }
  double eval(const VecC& yp) const;
  VecC grad(const VecC& yp) const;
  MatC hess(const VecC& yp) const;
  // world-space point (y', phi(y'))
  VecN surface_point(const VecC& yp) const;
};

// Chart on a uniform grid with cubic interpolation; the representation used
// for regraphed and root-found charts.
class GridChart {
 public:
  GridChart() = default;
  GridChart(int cdim, VecC lo, double h, int nx, int ny, std::vector<double> values);
  double value(const VecC& p) const;
  ChartFn as_fn() const;
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double h() const { return h_; }
  VecC node(int i, int j = 0) const { return {lo_[0] + h_ * i, lo_[1] + h_ * j}; }
  double node_value(int i, int j = 0) const { return v_[idx(i, j)]; }

 private:
  int idx(int i, int j) const { return j * nx_ + i; }
  double value1(double x) const;
  double value2(double x, double y) const;
  int cdim_ = 1, nx_ = 0, ny_ = 1;
  VecC lo_{};
  double h_ = 1;
  std::vector<double> v_;
};

struct TransitionResult {
  VecC target;        // C^{i,j} y'
  VecN world;         // the common surface point
  double mismatch;    // | z_n - phi^j(z') | residual in frame j
};

class DomainAtlas;

// Uniform spatial hash over chart centers; query returns indices of charts
// whose center is within `reach` of x.
class SpatialChartIndex {
 public:
  SpatialChartIndex() = default;
  SpatialChartIndex(const std::vector<VecN>& centers, double reach, int dim);
  void query(const VecN& x, std::vector<int>& out) const;
  double reach() const { return reach_; }

 private:
  int64_t key(const VecN& x) const;
  double cell_ = 1.0, reach_ = 0.0;
  int dim_ = 2;
  std::unordered_map<int64_t, std::vector<int>> cells_;
};

class DomainAtlas {
 public:
  int dim = 2;
  LipschitzCharacteristic characteristic;
  std::vector<LipschitzChart> charts;
  std::vector<VecN> centers;
  double eps0 = 0;          // fixed margin, default R/8
  double cover_radius = 0;  // greedy covering ran to this radius (<= R/8)

  std::string shape_name;                    // empty for file-loaded atlases
  std::function<double(const VecN&)> sdf;    // signed distance, > 0 inside
  // true when the sdf is smooth across the interior-bump transition shell
  // (no medial-axis kinks there); the interior bump then uses the exact
  // flat-boundary profile instead of per-query quadrature
  bool sdf_smooth_in_shell = false;
  std::vector<VecN> boundary_samples;        // dense sampling of the boundary

  int size() const { return static_cast<int>(charts.size()); }
  double R() const { return characteristic.R; }
  double L() const { return characteristic.L; }
  double ell() const { return characteristic.ell; }

  void build_index();
  // charts whose bump support B_{7R/32}(x^i) can reach x
  void active_charts(const VecN& x, std::vector<int>& out) const;

  // Checks the DomainAtlas invariants on samples; throws Error on violation.
  void validate(int pairs_per_chart = 64) const;

 private:
  SpatialChartIndex index_;
};

// --- operations ---------------------------------------------------------

// min over interior grid samples of n . nu, nu = (-grad phi, 1)/sqrt(1+|grad phi|^2).
// `direction` is a unit vector in the chart's frame coordinates.
double transversality_margin(const LipschitzChart& chart, const VecN& direction,
                             int samples_per_axis = 65);

// Regraphs `chart` in the frame z = iso.rotation (y - iso.base) (an isometry of
// the chart's own coordinate space). `window_lo/hi` bound the new chart domain
// in z'. Root-finding is 1D and monotone; requires a positive transversality
// margin along the target vertical.
LipschitzChart regraph(const LipschitzChart& chart, const ReferenceFrame& iso, VecC window_lo,
                       VecC window_hi, int res = 129);

// C^{i,j} y' and consistency data. Throws if y' leaves V^{i,j}.
TransitionResult transition_eval(const DomainAtlas& atlas, int i, int j, const VecC& yp);

// Greedy farthest-point covering of `samples` at the given radius.
std::vector<int> greedy_cover(const std::vector<VecN>& samples, double radius);

}  // namespace lipsmooth

#endif
