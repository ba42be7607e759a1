#ifndef LIPSMOOTH_DOMFILE_HPP
#define LIPSMOOTH_DOMFILE_HPP

#include <string>

#include "lipsmooth/geom.hpp"

namespace lipsmooth {

// Parse error with source location.
struct ParseError : Error {
  int line, column;
  ParseError(const std::string& msg, int line_, int col_)
      : Error(msg + " at line " + std::to_string(line_) + ", column " + std::to_string(col_)),
        line(line_),
        column(col_) {}
};

// Compiles an expression in the minimal chart grammar: identifiers y1..y2,
// numeric literals, + - * / ^, unary minus, abs, sqrt, sin, cos, min, max,
// parentheses. `line` offsets error locations.
std::function<double(const VecC&)> parse_chart_expr(const std::string& text, int dim,
                                                    int line = 1);

// Domain-spec text format: a header (dim / lipschitz / radius / diameter /
// optional eps0) followed by `chart` records, each with `base`, `rot`
// (row-major) and either `expr <expression>` or `shape <id> <param>`.
DomainAtlas load_domain_file(const std::string& path);
DomainAtlas parse_domain_text(const std::string& text, const std::string& name = "<memory>");

}  // namespace lipsmooth

#endif
