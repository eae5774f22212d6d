#pragma once

#include <span>
#include <string_view>

namespace sbsvm {

enum class KernelKind { poly, poly_norm, even, omega };

struct KernelParams {
  KernelKind kind = KernelKind::poly;
  int theta = 6;  // polynomial degree
};

std::string_view kernel_kind_name(KernelKind k);
KernelKind kernel_kind_from_name(std::string_view name);

// Polynomial kernel (1 + <x,y>)^theta.
double kp(std::span<const double> x, std::span<const double> y, int theta);

// Polynomial kernel on direction only: kp(x/|x|, y/|y|). Errors on a zero
// vector; scale-invariant in each argument.
double kp_norm(std::span<const double> x, std::span<const double> y, int theta);

// Even (sign-invariant) kernel kp_norm(x, y) + kp_norm(x, -y).
double ke(std::span<const double> x, std::span<const double> y, int theta);

// Composite subband kernel: ke on the waveform subband components times kp on
// the dynamic energy features.
double komega(std::span<const double> xs, std::span<const double> ys,
              std::span<const double> omega_x, std::span<const double> omega_y, int theta);

// Pipeline variant: a digitally silent subband (zero norm) contributes ke = 0,
// hence komega = 0, instead of an error. Used by the ensemble scorers.
double komega_or_zero(std::span<const double> xs, std::span<const double> ys,
                      std::span<const double> omega_x, std::span<const double> omega_y,
                      int theta);

// x^n for integer n >= 0 by repeated squaring (exact for the small degrees
// used here, and faster than std::pow).
double ipow(double x, int n);

// Cosine similarity <x,y>/sqrt(|x|^2 |y|^2) given precomputed squared norms,
// clamped to [-1, 1]. Shared by kp_norm/ke and the Gram builders.
double cosine_from_parts(double dot_xy, double sumsq_x, double sumsq_y);

}  // namespace sbsvm
