#ifndef BASISGUARD_WAVELET_HPP
#define BASISGUARD_WAVELET_HPP

#include <vector>

#include "basisguard/array2d.hpp"
#include "basisguard/image.hpp"

namespace basisguard {

// Two-channel biorthogonal filter bank. The transform below requires
// length-4 filters with half-sample symmetric dec_lo/rec_lo and
// antisymmetric dec_hi/rec_hi; bior31() is the shipped instance and the
// perfect-reconstruction property test is the authority on the
// coefficients, not the transcription.
struct FilterBank {
  std::vector<double> dec_lo;
  std::vector<double> dec_hi;
  std::vector<double> rec_lo;
  std::vector<double> rec_hi;
};

// Biorthogonal 3.1: B-spline synthesis pair sqrt(2)/8 * [1,3,3,1] with the
// short 1-vanishing-moment analysis pair.
const FilterBank& bior31();

// One level of separable 2D analysis output.
struct WaveletBands {
  Array2D ll;  // approx rows, approx cols
  Array2D lh;  // approx rows^T ... detail along y, approx along x
  Array2D hl;  // detail along x, approx along y
  Array2D hh;  // diagonal detail
  int input_rows = 0;
  int input_cols = 0;
};

// Multi-level pyramid; details[0] is the finest level. The approx band of a
// level-k pyramid on an HxW channel has ceil(H/2^k) x ceil(W/2^k) samples.
struct WaveletPyramid {
  int levels = 0;
  Array2D approx;
  struct Detail {
    Array2D lh, hl, hh;
    int input_rows = 0, input_cols = 0;
  };
  std::vector<Detail> details;
};

// Half-sample symmetric extension with critical sampling: a length-n signal
// yields ceil(n/2) approx and floor(n/2) detail coefficients, and
// idwt1(dwt1(x)) == x to machine precision for every n >= 1.
void dwt1(const std::vector<double>& x, const FilterBank& bank,
          std::vector<double>& approx, std::vector<double>& detail);
std::vector<double> idwt1(const std::vector<double>& approx,
                          const std::vector<double>& detail, int n,
                          const FilterBank& bank);

WaveletPyramid dwt2(const Array2D& channel, int levels, const FilterBank& bank);
Array2D idwt2(const WaveletPyramid& pyramid, const FilterBank& bank);

// sgn(c) * max(0, |c| - t).
double soft_threshold(double c, double t);

// Noise level from the finest diagonal band: median(|HH1|) / 0.6745.
double estimate_sigma(const WaveletPyramid& pyramid);

// Keep the level-k approximation, rescale by 2^-levels to undo the
// filter-bank gain, resize back with bicubic interpolation, clip.
ImageTensor wavelet_approx_defense(const ImageTensor& img, int levels);

// Universal-threshold denoising: t = sigma_hat * sqrt(2 ln n) with n the
// pixel count of the channel; one t per channel, applied to every detail
// band at every level, approx band untouched.
ImageTensor soft_threshold_defense(const ImageTensor& img, int levels);

}  // namespace basisguard

#endif
