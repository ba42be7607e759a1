#ifndef LIPSMOOTH_SHAPES_HPP
#define LIPSMOOTH_SHAPES_HPP

#include <map>
#include <string>

#include "lipsmooth/geom.hpp"

namespace lipsmooth {

// Built-in shape library. Parameters not given fall back to the defaults
// listed in shape_defaults(). Supported ids:
//   disk            radius, lip            (n=2)
//   square          side, chart_radius     (n=2, L = 1)
//   regular_polygon sides, circumradius, chart_radius   (n=2, L = tan(pi/k))
//   star            lobes, base_radius, amp, lip, chart_radius (n=2)
//   sphere          radius, lip            (n=3)
//   cube            side, chart_radius     (n=3, L = sqrt(2))
//   cylinder        radius, half_height, chart_radius   (n=3, L = 1)
struct ShapeSpec {
  std::string name;
  std::map<std::string, double> params;
};

// Parses "name" or "name:key=val,key=val".
ShapeSpec parse_shape_spec(const std::string& text);
std::map<std::string, double> shape_defaults(const std::string& name);

// Covering target radius is cover_beta * R/8; the slack keeps the band
// containment (and hence m0) at desk scale.
DomainAtlas make_shape(const ShapeSpec& spec, double cover_beta = 0.7);
inline DomainAtlas make_shape(const std::string& text, double cover_beta = 0.7) {
  return make_shape(parse_shape_spec(text), cover_beta);
}

// Dense boundary sampling at (approximately) the given spacing.
std::vector<VecN> shape_boundary_samples(const ShapeSpec& spec, double spacing);

}  // namespace lipsmooth

#endif
