#include "lipsmooth/curvature.hpp"

#include <cmath>

namespace lipsmooth {

FundamentalForms forms(const VecC& grad, int dim) {
  FundamentalForms f;
  f.dim = dim;
  double g2 = dotc(grad, grad);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      f.g[i][j] = (i == j ? 1.0 : 0.0) + grad[i] * grad[j];
      f.g_inv[i][j] = (i == j ? 1.0 : 0.0) - grad[i] * grad[j] / (1.0 + g2);
    }
  return f;
}

CurvatureField weak_curvature(const VecC& grad, const MatC& hess, int dim) {
  CurvatureField c;
  c.dim = dim;
  double g2 = dotc(grad, grad);
  double root = std::sqrt(1.0 + g2);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) c.B[i][j] = hess[i][j] / root;

  FundamentalForms f = forms(grad, dim);
  // trace((g^{-1} H)^2) by explicit small-matrix products
  MatC a{};
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      double s = 0;
      for (int k = 0; k < dim; ++k) s += f.g_inv[i][k] * hess[k][j];
      a[i][j] = s;
    }
  double tr = 0;
  for (int i = 0; i < dim; ++i)
    for (int k = 0; k < dim; ++k) tr += a[i][k] * a[k][i];
  c.norm_B = std::sqrt(std::max(0.0, tr)) / root;
  return c;
}

double curvature_integral(const LipschitzChart& chart, double q, double window, int res,
                          const std::function<double(const VecC&)>& weight) {
  if (q < 1.0) throw Error("curvature_integral: q must be >= 1");
  if (window > chart.radius * (1 + 1e-12))
    throw Error("curvature_integral: window exits the chart domain");
  const int d = chart.cdim();
  double h = 2.0 * window / res;  // midpoint rule
  double acc = 0;
  int ny = d == 2 ? res : 1;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < res; ++i) {
      VecC yp{-window + h * (i + 0.5), d == 2 ? -window + h * (j + 0.5) : 0.0};
      if (normc(yp) > window) continue;
      VecC g = chart.grad(yp);
      MatC hmat = chart.hess(yp);
      CurvatureField c = weak_curvature(g, hmat, d);
      double w = weight ? weight(yp) : 1.0;
      acc += w * std::pow(c.norm_B, q) * std::sqrt(1.0 + dotc(g, g)) * std::pow(h, d);
    }
  return acc;
}

double boundary_curvature_integral(const DomainAtlas& atlas, const BumpFamily& bumps, double q,
                                   int res) {
  const int d = atlas.dim - 1;
  double acc = 0;
  // supports of the boundary xi's reach 7R/32 from the centers; a chart window
  // of 7R/32 * sqrt(1+L^2) margin captures all of supp xi_i on the graph
  double window = std::min(atlas.R() - 2 * atlas.eps0, 7.0 * atlas.R() / 32.0 * 1.05);
  for (int ci = 0; ci < atlas.size(); ++ci) {
    const LipschitzChart& ch = atlas.charts[ci];
    double h = 2.0 * window / res;
    int ny = d == 2 ? res : 1;
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < res; ++i) {
        VecC yp{-window + h * (i + 0.5), d == 2 ? -window + h * (j + 0.5) : 0.0};
        if (normc(yp) > window) continue;
        VecN x = ch.surface_point(yp);
        double e = bumps.eta(ci + 1, x);
        if (e == 0.0) continue;
        double w = e / (bumps.sum_eta(x));  // xi_ci on the boundary (xi_0 = 0 there)
        VecC g = ch.grad(yp);
        MatC hm = ch.hess(yp);
        CurvatureField c = weak_curvature(g, hm, d);
        acc += w * std::pow(c.norm_B, q) * std::sqrt(1.0 + dotc(g, g)) * std::pow(h, d);
      }
  }
  return acc;
}

double boundary_curvature_integral_m(const std::vector<ExtractedChart>& charts,
                                     const DomainAtlas& atlas, const BumpFamily& bumps,
                                     double q) {
  const int d = atlas.dim - 1;
  double support = bumps.boundary_support();
  double acc = 0;
  for (const ExtractedChart& ec : charts) {
    const LipschitzChart& ch = atlas.charts[ec.chart_index];
    // midpoint rule on cell centers of the extraction grid
    int jmax = d == 2 ? ec.ny() - 1 : 1;
    for (int j = 0; j < jmax; ++j) {
      for (int i = 0; i + 1 < ec.nx(); ++i) {
        // average the four (two) surrounding nodes
        int corners = d == 2 ? 4 : 2;
        int ids[4] = {ec.idx(i, j), ec.idx(i + 1, j), d == 2 ? ec.idx(i, j + 1) : 0,
                      d == 2 ? ec.idx(i + 1, j + 1) : 0};
        bool ok = true;
        for (int c = 0; c < corners; ++c) ok = ok && ec.mask[ids[c]];
        if (!ok) continue;
        double psi = 0;
        VecC g{};
        MatC hmat{};
        for (int c = 0; c < corners; ++c) {
          psi += ec.psi[ids[c]];
          g = addc(g, ec.grad[ids[c]]);
          for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) hmat[a][b] += ec.hess[ids[c]][a][b];
        }
        psi /= corners;
        g = scalec(g, 1.0 / corners);
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b) hmat[a][b] /= corners;

        VecC yp = ec.node(i, j);
        yp[0] += ec.grid_h * 0.5;
        if (d == 2) yp[1] += ec.grid_h * 0.5;
        VecN y{yp[0], d == 2 ? yp[1] : 0.0, 0.0};
        y[atlas.dim - 1] = psi;
        VecN x = ch.frame.inverse(y);
        if (dist(x, atlas.centers[ec.chart_index]) > support) continue;
        double e = bumps.eta(ec.chart_index + 1, x);
        if (e == 0.0) continue;
        double w = e / bumps.sum_eta(x);
        CurvatureField c = weak_curvature(g, hmat, d);
        acc += w * std::pow(c.norm_B, q) * std::sqrt(1.0 + dotc(g, g)) *
               std::pow(ec.grid_h, d);
      }
    }
  }
  return acc;
}

}  // namespace lipsmooth
