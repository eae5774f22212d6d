#include "sbsvm/kernels.hpp"

#include <cmath>

#include "sbsvm/simd.hpp"
#include "sbsvm/util.hpp"

namespace sbsvm {

std::string_view kernel_kind_name(KernelKind k) {
  switch (k) {
    case KernelKind::poly: return "poly";
    case KernelKind::poly_norm: return "poly_norm";
    case KernelKind::even: return "even";
    case KernelKind::omega: return "omega";
  }
  return "?";
}

KernelKind kernel_kind_from_name(std::string_view name) {
  if (name == "poly") return KernelKind::poly;
  if (name == "poly_norm") return KernelKind::poly_norm;
  if (name == "even") return KernelKind::even;
  if (name == "omega") return KernelKind::omega;
  throw std::invalid_argument("unknown kernel kind: " + std::string(name));
}

double ipow(double x, int n) {
  double r = 1.0;
  while (n > 0) {
    if (n & 1) r *= x;
    x *= x;
    n >>= 1;
  }
  return r;
}

double cosine_from_parts(double dot_xy, double sumsq_x, double sumsq_y) {
  // One sqrt of the product: for y == x this yields exactly dot/dot = 1, so
  // self-similarities hit their closed forms (e.g. kp_norm(x,x) = 2^theta).
  double c = dot_xy / std::sqrt(sumsq_x * sumsq_y);
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  return c;
}

double kp(std::span<const double> x, std::span<const double> y, int theta) {
  require(x.size() == y.size(), "kp: dimension mismatch");
  require(theta >= 1, "kp: theta must be >= 1");
  return ipow(1.0 + simd::dot(x, y), theta);
}

double kp_norm(std::span<const double> x, std::span<const double> y, int theta) {
  require(x.size() == y.size(), "kp_norm: dimension mismatch");
  require(theta >= 1, "kp_norm: theta must be >= 1");
  double sx = simd::sumsq(x);
  double sy = simd::sumsq(y);
  require(sx > 0.0 && sy > 0.0, "kp_norm: zero vector");
  return ipow(1.0 + cosine_from_parts(simd::dot(x, y), sx, sy), theta);
}

double ke(std::span<const double> x, std::span<const double> y, int theta) {
  require(x.size() == y.size(), "ke: dimension mismatch");
  require(theta >= 1, "ke: theta must be >= 1");
  double sx = simd::sumsq(x);
  double sy = simd::sumsq(y);
  require(sx > 0.0 && sy > 0.0, "ke: zero vector");
  double c = cosine_from_parts(simd::dot(x, y), sx, sy);
  return ipow(1.0 + c, theta) + ipow(1.0 - c, theta);
}

double komega(std::span<const double> xs, std::span<const double> ys,
              std::span<const double> omega_x, std::span<const double> omega_y, int theta) {
  return ke(xs, ys, theta) * kp(omega_x, omega_y, theta);
}

double komega_or_zero(std::span<const double> xs, std::span<const double> ys,
                      std::span<const double> omega_x, std::span<const double> omega_y,
                      int theta) {
  if (simd::sumsq(xs) == 0.0 || simd::sumsq(ys) == 0.0) return 0.0;
  return komega(xs, ys, omega_x, omega_y, theta);
}

}  // namespace sbsvm
