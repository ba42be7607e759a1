#ifndef LIPSMOOTH_COMMON_HPP
#define LIPSMOOTH_COMMON_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lipsmooth {

// Ambient dimension n is 2 or 3; chart (tangent) dimension is n-1.
// Vectors are fixed-capacity arrays, zero-padded beyond the active dimension.
using VecN = std::array<double, 3>;   // point in R^n
using VecC = std::array<double, 2>;   // point in R^{n-1} (chart coordinates)
using MatN = std::array<std::array<double, 3>, 3>;
using MatC = std::array<std::array<double, 2>, 2>;

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline VecN vecn(double x, double y, double z = 0.0) { return {x, y, z}; }
inline VecC vecc(double a, double b = 0.0) { return {a, b}; }

inline VecN add(const VecN& a, const VecN& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline VecN sub(const VecN& a, const VecN& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline VecN scale(const VecN& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
inline double dot(const VecN& a, const VecN& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const VecN& a) { return std::sqrt(dot(a, a)); }
inline double dist(const VecN& a, const VecN& b) { return norm(sub(a, b)); }

inline VecC addc(const VecC& a, const VecC& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline VecC subc(const VecC& a, const VecC& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline VecC scalec(const VecC& a, double s) { return {a[0] * s, a[1] * s}; }
inline double dotc(const VecC& a, const VecC& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double normc(const VecC& a) { return std::sqrt(dotc(a, a)); }

inline MatN identityN() { return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

// y = M x
inline VecN matvec(const MatN& m, const VecN& x) {
  VecN r{};
  for (int i = 0; i < 3; ++i) r[i] = m[i][0] * x[0] + m[i][1] * x[1] + m[i][2] * x[2];
  return r;
}
// y = M^T x
inline VecN matvecT(const MatN& m, const VecN& x) {
  VecN r{};
  for (int i = 0; i < 3; ++i) r[i] = m[0][i] * x[0] + m[1][i] * x[1] + m[2][i] * x[2];
  return r;
}
inline MatN matmul(const MatN& a, const MatN& b) {
  MatN r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0;
      for (int k = 0; k < 3; ++k) s += a[i][k] * b[k][j];
      r[i][j] = s;
    }
  return r;
}
inline MatN transpose(const MatN& a) {
  MatN r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = a[j][i];
  return r;
}

inline double frobenius(const MatC& m, int dim) {
  double s = 0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) s += m[i][j] * m[i][j];
  return std::sqrt(s);
}

// Deterministic xorshift-based RNG for sampling in tests and harnesses.
// std::mt19937_64 is fine too, but distribution implementations vary across
// standard libraries; this keeps emitted reports byte-stable everywhere.
struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed = 0x9e3779b97f4a7c15ull) : state(seed ? seed : 1) {}
  uint64_t next() {
    uint64_t x = state;
    x ^= x << 13;
    x ^= x >> 7;
    x ^= x << 17;
    state = x;
    return x;
  }
  double uniform() { return (next() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
};

// Parallel loop over [0, n) in fixed-size chunks. Worker count is capped by
// the LIPSMOOTH_THREADS environment variable. Chunk boundaries are a function
// of n only, so chunk-indexed reductions are deterministic for any thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);
int worker_count();

}  // namespace lipsmooth

#endif
