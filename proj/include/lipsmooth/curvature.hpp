#ifndef LIPSMOOTH_CURVATURE_HPP
#define LIPSMOOTH_CURVATURE_HPP

#include "lipsmooth/defining.hpp"
#include "lipsmooth/geom.hpp"

namespace lipsmooth {

// First fundamental form g = I + grad phi grad phi^T and its closed-form
// inverse g^{-1} = I - grad grad^T / (1 + |grad|^2).
struct FundamentalForms {
  MatC g{};
  MatC g_inv{};
  int dim = 1;
};
FundamentalForms forms(const VecC& grad, int dim);

// Weak second fundamental form B_ij = hess_ij / sqrt(1+|grad|^2) and its norm
// |B| = sqrt(trace((g^{-1} hess)^2)) / sqrt(1+|grad|^2).
struct CurvatureField {
  MatC B{};
  double norm_B = 0;
  int dim = 1;
};
CurvatureField weak_curvature(const VecC& grad, const MatC& hess, int dim);

// integral of |B|^q dH^{n-1} over one chart window, area element
// sqrt(1+|grad|^2), optional pointwise weight (partition weights on overlaps).
double curvature_integral(const LipschitzChart& chart, double q, double window, int res,
                          const std::function<double(const VecC&)>& weight = nullptr);

// Same integral over the whole boundary of the base domain: charts are
// combined with the xi-weights restricted to the boundary, which sum to one
// there.
double boundary_curvature_integral(const DomainAtlas& atlas, const BumpFamily& bumps, double q,
                                   int res);

// And over the extracted boundary (the m-approximation), using the implicit
// chart jets.
double boundary_curvature_integral_m(const std::vector<ExtractedChart>& charts,
                                     const DomainAtlas& atlas, const BumpFamily& bumps, double q);

}  // namespace lipsmooth

#endif
