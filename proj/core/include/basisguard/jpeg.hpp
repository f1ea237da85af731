#ifndef BASISGUARD_JPEG_HPP
#define BASISGUARD_JPEG_HPP

#include <array>

#include "basisguard/image.hpp"

namespace basisguard {

// Annex-K base tables scaled by the IJG quality convention. quality=50
// reproduces the base tables; every scaled entry is clamped to [1, 255].
struct QuantTables {
  std::array<int, 64> luma{};
  std::array<int, 64> chroma{};
  int quality = 50;
};

QuantTables scale_quant_tables(int quality);

// Lossy JPEG round-trip in memory: RGB->YCbCr, 4:2:0 box subsampling of the
// chrominance planes, 8x8 blockwise DCT, quantization to the scaled tables,
// and the inverse path. Single-channel images skip the color steps and use
// the luminance table. No entropy coding: it does not change pixels.
ImageTensor jpeg_defense(const ImageTensor& img, int quality);

}  // namespace basisguard

#endif
