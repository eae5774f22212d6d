#pragma once

#include <complex>
#include <span>
#include <vector>

namespace sbsvm {

// Forward DFT of a real signal, zero-padded or truncated to nfft points.
// Returns the full nfft-bin complex spectrum.
std::vector<std::complex<double>> fft_real(std::span<const double> x, std::size_t nfft);

// Inverse DFT of a full complex spectrum; returns the real part, scaled by
// 1/nfft so that ifft(fft(x)) == x.
std::vector<double> ifft_to_real(std::span<const std::complex<double>> spectrum);

// |X_k|^2 for k = 0..nfft/2 (one-sided power spectrum).
std::vector<double> power_spectrum(std::span<const double> x, std::size_t nfft);

}  // namespace sbsvm
