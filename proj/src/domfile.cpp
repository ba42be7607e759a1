#include "lipsmooth/domfile.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace lipsmooth {

namespace {

// --- expression parser -------------------------------------------------------

struct Lexer {
  const std::string& src;
  int line, col = 1;
  std::size_t pos = 0;

  Lexer(const std::string& s, int line0) : src(s), line(line0) {}

  void skip_ws() {
    while (pos < src.size() && (src[pos] == ' ' || src[pos] == '\t')) advance();
  }
  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }
  void advance() {
    if (pos < src.size()) {
      if (src[pos] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++pos;
    }
  }
  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, line, col); }
};

using Expr = std::function<double(const VecC&)>;

Expr parse_sum(Lexer& lx, int dim);

Expr parse_primary(Lexer& lx, int dim) {
  char c = lx.peek();
  if (c == '(') {
    lx.advance();
    Expr e = parse_sum(lx, dim);
    if (lx.peek() != ')') lx.fail("expected ')'");
    lx.advance();
    return e;
  }
  if (c == '-') {
    lx.advance();
    Expr e = parse_primary(lx, dim);
    return [e](const VecC& y) { return -e(y); };
  }
  if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
    lx.skip_ws();
    std::size_t start = lx.pos;
    while (lx.pos < lx.src.size() &&
           (std::isdigit(static_cast<unsigned char>(lx.src[lx.pos])) || lx.src[lx.pos] == '.' ||
            lx.src[lx.pos] == 'e' || lx.src[lx.pos] == 'E' ||
            ((lx.src[lx.pos] == '+' || lx.src[lx.pos] == '-') && lx.pos > start &&
             (lx.src[lx.pos - 1] == 'e' || lx.src[lx.pos - 1] == 'E'))))
      lx.advance();
    double v;
    try {
      v = std::stod(lx.src.substr(start, lx.pos - start));
    } catch (const std::exception&) {
      lx.fail("bad numeric literal");
    }
    return [v](const VecC&) { return v; };
  }
  if (std::isalpha(static_cast<unsigned char>(c))) {
    lx.skip_ws();
    std::size_t start = lx.pos;
    while (lx.pos < lx.src.size() &&
           (std::isalnum(static_cast<unsigned char>(lx.src[lx.pos])) || lx.src[lx.pos] == '_'))
      lx.advance();
    std::string name = lx.src.substr(start, lx.pos - start);
    if (name == "y1" || name == "y2") {
      int idx = name == "y1" ? 0 : 1;
      if (idx >= dim) lx.fail("identifier '" + name + "' not available in dimension");
      return [idx](const VecC& y) { return y[idx]; };
    }
    auto need_args = [&](int count) -> std::vector<Expr> {
      if (lx.peek() != '(') lx.fail("expected '(' after '" + name + "'");
      lx.advance();
      std::vector<Expr> args;
      args.push_back(parse_sum(lx, dim));
      while (static_cast<int>(args.size()) < count) {
        if (lx.peek() != ',') lx.fail("expected ',' in '" + name + "' arguments");
        lx.advance();
        args.push_back(parse_sum(lx, dim));
      }
      if (lx.peek() != ')') lx.fail("expected ')' after '" + name + "' arguments");
      lx.advance();
      return args;
    };
    if (name == "abs") {
      auto a = need_args(1);
      Expr e = a[0];
      return [e](const VecC& y) { return std::abs(e(y)); };
    }
    if (name == "sqrt") {
      auto a = need_args(1);
      Expr e = a[0];
      return [e](const VecC& y) { return std::sqrt(e(y)); };
    }
    if (name == "sin") {
      auto a = need_args(1);
      Expr e = a[0];
      return [e](const VecC& y) { return std::sin(e(y)); };
    }
    if (name == "cos") {
      auto a = need_args(1);
      Expr e = a[0];
      return [e](const VecC& y) { return std::cos(e(y)); };
    }
    if (name == "min") {
      auto a = need_args(2);
      Expr l = a[0], r = a[1];
      return [l, r](const VecC& y) { return std::min(l(y), r(y)); };
    }
    if (name == "max") {
      auto a = need_args(2);
      Expr l = a[0], r = a[1];
      return [l, r](const VecC& y) { return std::max(l(y), r(y)); };
    }
    lx.fail("unknown identifier '" + name + "'");
  }
  lx.fail("unexpected character");
}

Expr parse_power(Lexer& lx, int dim) {
  Expr base = parse_primary(lx, dim);
  if (lx.peek() == '^') {
    lx.advance();
    Expr exp = parse_power(lx, dim);  // right associative
    return [base, exp](const VecC& y) { return std::pow(base(y), exp(y)); };
  }
  return base;
}

Expr parse_product(Lexer& lx, int dim) {
  Expr acc = parse_power(lx, dim);
  for (;;) {
    char c = lx.peek();
    if (c == '*') {
      lx.advance();
      Expr rhs = parse_power(lx, dim);
      Expr lhs = acc;
      acc = [lhs, rhs](const VecC& y) { return lhs(y) * rhs(y); };
    } else if (c == '/') {
      lx.advance();
      Expr rhs = parse_power(lx, dim);
      Expr lhs = acc;
      acc = [lhs, rhs](const VecC& y) { return lhs(y) / rhs(y); };
    } else {
      return acc;
    }
  }
}

Expr parse_sum(Lexer& lx, int dim) {
  Expr acc = parse_product(lx, dim);
  for (;;) {
    char c = lx.peek();
    if (c == '+') {
      lx.advance();
      Expr rhs = parse_product(lx, dim);
      Expr lhs = acc;
      acc = [lhs, rhs](const VecC& y) { return lhs(y) + rhs(y); };
    } else if (c == '-') {
      lx.advance();
      Expr rhs = parse_product(lx, dim);
      Expr lhs = acc;
      acc = [lhs, rhs](const VecC& y) { return lhs(y) - rhs(y); };
    } else {
      return acc;
    }
  }
}

}  // namespace

std::function<double(const VecC&)> parse_chart_expr(const std::string& text, int dim, int line) {
  Lexer lx(text, line);
  Expr e = parse_sum(lx, dim);
  if (lx.peek() != '\0') lx.fail("trailing input after expression");
  return e;
}

// --- domain file ---------------------------------------------------------------

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::stringstream ss(line);
  std::string t;
  while (ss >> t) toks.push_back(t);
  return toks;
}

// canonical chart of a named shape, used by `shape <id> <param>` records
std::function<double(const VecC&)> canonical_chart(const std::string& id, double param,
                                                   int dim, int line) {
  if (id == "disk" || id == "circle") {
    double rho = param;
    return [rho](const VecC& y) { return std::sqrt(rho * rho - y[0] * y[0]) - rho; };
  }
  if (id == "sphere") {
    double rho = param;
    return [rho](const VecC& y) {
      return std::sqrt(rho * rho - y[0] * y[0] - y[1] * y[1]) - rho;
    };
  }
  if (id == "corner")  // right-angle corner graph, slope `param`
    return [param](const VecC& y) { return -param * std::abs(y[0]); };
  if (id == "flat") return [](const VecC&) { return 0.0; };
  throw ParseError("unknown shape id '" + id + "' in chart record", line, 1);
  (void)dim;
}

}  // namespace

DomainAtlas parse_domain_text(const std::string& text, const std::string& name) {
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;

  DomainAtlas atlas;
  atlas.shape_name = "";
  double L = 0, R = 0, diam = 0, eps0 = -1;
  int dim = 0;
  bool in_chart = false;
  VecN base{};
  bool have_base = false, have_rot = false, have_fn = false;
  MatN rot = identityN();
  ChartFn fn;

  auto flush_chart = [&]() {
    if (!in_chart) return;
    if (!have_base || !have_rot || !have_fn)
      throw ParseError("chart record needs base, rot and expr/shape", lineno, 1);
    LipschitzChart ch;
    ch.frame.dim = dim;
    ch.frame.rotation = rot;
    ch.frame.base = base;
    ch.radius = R;
    ch.lipschitz = L;
    ch.fn = fn;
    atlas.charts.push_back(std::move(ch));
    atlas.centers.push_back(base);
    in_chart = false;
    have_base = have_rot = have_fn = false;
    fn = ChartFn{};
  };

  while (std::getline(ss, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::vector<std::string> toks = tokenize(line);
    if (toks.empty()) continue;
    const std::string& key = toks[0];
    auto want = [&](std::size_t count) {
      if (toks.size() != count + 1)
        throw ParseError("'" + key + "' expects " + std::to_string(count) + " values", lineno, 1);
    };
    auto num = [&](const std::string& s) {
      try {
        return std::stod(s);
      } catch (const std::exception&) {
        throw ParseError("bad number '" + s + "'", lineno, 1);
      }
    };
    if (key == "dim") {
      want(1);
      dim = static_cast<int>(num(toks[1]));
      if (dim != 2 && dim != 3) throw ParseError("dim must be 2 or 3", lineno, 1);
    } else if (key == "lipschitz") {
      want(1);
      L = num(toks[1]);
    } else if (key == "radius") {
      want(1);
      R = num(toks[1]);
    } else if (key == "diameter") {
      want(1);
      diam = num(toks[1]);
    } else if (key == "eps0") {
      want(1);
      eps0 = num(toks[1]);
    } else if (key == "chart") {
      if (dim == 0 || L <= 0 || R <= 0 || diam <= 0)
        throw ParseError("header (dim, lipschitz, radius, diameter) must precede charts", lineno,
                         1);
      flush_chart();
      in_chart = true;
    } else if (key == "base") {
      if (!in_chart) throw ParseError("'base' outside a chart record", lineno, 1);
      want(static_cast<std::size_t>(dim));
      base = VecN{num(toks[1]), num(toks[2]), dim == 3 ? num(toks[3]) : 0.0};
      have_base = true;
    } else if (key == "rot") {
      if (!in_chart) throw ParseError("'rot' outside a chart record", lineno, 1);
      want(static_cast<std::size_t>(dim * dim));
      rot = identityN();
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) rot[i][j] = num(toks[1 + i * dim + j]);
      have_rot = true;
    } else if (key == "expr") {
      if (!in_chart) throw ParseError("'expr' outside a chart record", lineno, 1);
      auto pos = line.find("expr");
      std::string body = line.substr(pos + 4);
      fn.value = parse_chart_expr(body, dim - 1, lineno);
      have_fn = true;
    } else if (key == "shape") {
      if (!in_chart) throw ParseError("'shape' outside a chart record", lineno, 1);
      want(2);
      fn.value = canonical_chart(toks[1], num(toks[2]), dim - 1, lineno);
      have_fn = true;
    } else {
      throw ParseError("unknown directive '" + key + "'", lineno, 1);
    }
  }
  flush_chart();
  if (atlas.charts.empty()) throw ParseError("no chart records in " + name, lineno, 1);

  atlas.dim = dim;
  atlas.characteristic = LipschitzCharacteristic::make(L, R, diam);
  atlas.eps0 = eps0 > 0 ? eps0 : R / 8.0;
  if (!(atlas.eps0 > 0 && atlas.eps0 < R / 4.0))
    throw ParseError("eps0 must lie in (0, R/4)", lineno, 1);
  // boundary samples from the chart graphs over the covering windows
  for (const LipschitzChart& ch : atlas.charts) {
    const int d = dim - 1;
    const int res = 9;
    double win = R / 8.0;
    int ny = d == 2 ? res : 1;
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < res; ++i) {
        VecC yp{-win + 2 * win * i / (res - 1), d == 2 ? -win + 2 * win * j / (res - 1) : 0.0};
        if (normc(yp) > win) continue;
        atlas.boundary_samples.push_back(ch.surface_point(yp));
      }
  }
  atlas.build_index();
  return atlas;
}

DomainAtlas load_domain_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open domain file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_domain_text(buf.str(), path);
}

}  // namespace lipsmooth
