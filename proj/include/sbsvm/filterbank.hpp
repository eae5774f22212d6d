#pragma once

#include <span>
#include <vector>

#include "sbsvm/util.hpp"

namespace sbsvm {

// S-channel maximally decimated cosine-modulated filter bank. The S filters
// of 2S taps are cosine modulations of one low-pass prototype and form an
// orthonormal lapped transform (perfect reconstruction).
struct CmfbBank {
  int S = 0;
  Matrix filters;           // S x 2S, filters.row(s) = g_s
  Matrix filters_reversed;  // g_s reversed, for contiguous inner products
};

CmfbBank design_cmfb(int S);

// Subband components of one waveform segment: components.row(s) is channel s
// decimated by S. All channels have the same coefficient count.
struct SubbandSet {
  int S = 0;
  std::size_t input_length = 0;  // original segment length
  Matrix components;             // S x n_coef
};

// Analysis per the lapped-transform convention: the segment is zero-padded by
// S samples on each side and every coefficient whose filter support overlaps
// the padded segment is kept (n_coef = floor((len + 4S - 2) / S) + 1). With
// all partial frames retained the transform is exactly orthogonal, so subband
// energies sum to the input energy and synthesize() inverts bit-tightly.
SubbandSet analyze(std::span<const double> x, const CmfbBank& bank);

// Inverse of analyze for subband sets produced with the same bank.
std::vector<double> synthesize(const SubbandSet& sb, const CmfbBank& bank);

}  // namespace sbsvm
