#include "sbsvm/filterbank.hpp"

#include <cmath>
#include <numbers>

#include "sbsvm/simd.hpp"

namespace sbsvm {

CmfbBank design_cmfb(int S) {
  require(S >= 1, "design_cmfb: S must be >= 1");
  const auto n = static_cast<std::size_t>(S);
  CmfbBank bank;
  bank.S = S;
  bank.filters = Matrix(n, 2 * n);
  bank.filters_reversed = Matrix(n, 2 * n);
  const double pi = std::numbers::pi;
  // g[k] = sqrt(2) sin(pi (k - 0.5) / 2S), g_s[k] = g[k]/sqrt(S) *
  // cos((2s-1)(2k-S-1) pi / 4S), with s and k 1-based.
  for (int s = 1; s <= S; ++s) {
    for (int k = 1; k <= 2 * S; ++k) {
      double proto = std::sqrt(2.0) * std::sin(pi * (k - 0.5) / (2.0 * S));
      double mod = std::cos((2.0 * s - 1.0) * (2.0 * k - S - 1.0) * pi / (4.0 * S));
      bank.filters.at(s - 1, k - 1) = proto * mod / std::sqrt(static_cast<double>(S));
    }
  }
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t k = 0; k < 2 * n; ++k)
      bank.filters_reversed.at(s, k) = bank.filters.at(s, 2 * n - 1 - k);
  return bank;
}

namespace {

// Padded buffer: (2S-1) scratch zeros, S pad, signal, S pad, (2S-1) scratch.
// Coefficient n of channel s is then dot(g_s reversed, buf + nS, 2S).
std::size_t coef_count(std::size_t len, int S) {
  std::size_t padded = len + 2 * static_cast<std::size_t>(S);
  return (padded - 1 + 2 * static_cast<std::size_t>(S) - 1) / S + 1;
}

}  // namespace

SubbandSet analyze(std::span<const double> x, const CmfbBank& bank) {
  require(bank.S >= 1, "analyze: bank not designed");
  require(!x.empty(), "analyze: empty input");
  const auto S = static_cast<std::size_t>(bank.S);
  const std::size_t n_coef = coef_count(x.size(), bank.S);
  std::vector<double> buf((2 * S - 1) + (x.size() + 2 * S) + (2 * S - 1), 0.0);
  std::copy(x.begin(), x.end(), buf.begin() + (2 * S - 1) + S);

  SubbandSet out;
  out.S = bank.S;
  out.input_length = x.size();
  out.components = Matrix(S, n_coef);
  for (std::size_t s = 0; s < S; ++s) {
    const double* g = bank.filters_reversed.row(s).data();
    for (std::size_t n = 0; n < n_coef; ++n) {
      out.components.at(s, n) = simd::dot(g, buf.data() + n * S, 2 * S);
    }
  }
  return out;
}

std::vector<double> synthesize(const SubbandSet& sb, const CmfbBank& bank) {
  require(sb.S == bank.S, "synthesize: bank channel count does not match subband set");
  require(sb.S >= 1 && sb.components.rows == static_cast<std::size_t>(sb.S),
          "synthesize: malformed subband set");
  const auto S = static_cast<std::size_t>(sb.S);
  const std::size_t n_coef = sb.components.cols;
  std::vector<double> buf((2 * S - 1) + (sb.input_length + 2 * S) + (2 * S - 1), 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    const double* g = bank.filters_reversed.row(s).data();
    for (std::size_t n = 0; n < n_coef; ++n) {
      simd::axpy(sb.components.at(s, n), g, buf.data() + n * S, 2 * S);
    }
  }
  std::vector<double> x(sb.input_length);
  std::copy_n(buf.begin() + (2 * S - 1) + S, sb.input_length, x.begin());
  return x;
}

}  // namespace sbsvm
