#include "basisguard/jpeg.hpp"

#include <algorithm>
#include <cmath>

#include "basisguard/array2d.hpp"
#include "basisguard/error.hpp"
#include "basisguard/spectral.hpp"

namespace basisguard {

namespace {

constexpr std::array<int, 64> kBaseLuma = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99};

constexpr std::array<int, 64> kBaseChroma = {
    17, 18, 24, 47, 99, 99, 99, 99,  //
    18, 21, 26, 66, 99, 99, 99, 99,  //
    24, 26, 56, 99, 99, 99, 99, 99,  //
    47, 66, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99};

std::array<int, 64> scale_table(const std::array<int, 64>& base, int scale) {
  std::array<int, 64> out{};
  for (int i = 0; i < 64; ++i)
    out[i] = std::clamp((base[i] * scale + 50) / 100, 1, 255);
  return out;
}

Array2D subsample_420(const Array2D& plane) {
  // 2x2 box average; odd edges average the pixels that exist.
  Array2D out((plane.rows + 1) / 2, (plane.cols + 1) / 2);
  for (int r = 0; r < out.rows; ++r)
    for (int c = 0; c < out.cols; ++c) {
      double acc = 0.0;
      int cnt = 0;
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) {
          int y = 2 * r + dy, x = 2 * c + dx;
          if (y < plane.rows && x < plane.cols) {
            acc += plane.at(y, x);
            ++cnt;
          }
        }
      out.at(r, c) = acc / cnt;
    }
  return out;
}

Array2D upsample_nearest_2x(const Array2D& plane, int rows, int cols) {
  Array2D out(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      out.at(r, c) = plane.at(std::min(r / 2, plane.rows - 1),
                              std::min(c / 2, plane.cols - 1));
  return out;
}

// Level shift to the [-128, 127] scale, quantize every 8x8 block against
// `table` (round half away from zero), reconstruct. Padding to block
// multiples uses edge replication and the output is cropped back.
Array2D quantize_plane(const Array2D& plane, const std::array<int, 64>& table) {
  const int ph = (plane.rows + 7) / 8 * 8;
  const int pw = (plane.cols + 7) / 8 * 8;
  Array2D padded(ph, pw);
  for (int r = 0; r < ph; ++r)
    for (int c = 0; c < pw; ++c)
      padded.at(r, c) =
          plane.at(std::min(r, plane.rows - 1), std::min(c, plane.cols - 1)) * 255.0 - 128.0;

  std::array<double, 64> block{};
  for (int by = 0; by < ph; by += 8)
    for (int bx = 0; bx < pw; bx += 8) {
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) block[y * 8 + x] = padded.at(by + y, bx + x);
      DctBlock freq = dct8_forward(block);
      for (int i = 0; i < 64; ++i)
        freq.c[i] = std::round(freq.c[i] / table[i]) * table[i];
      block = dct8_inverse(freq);
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) padded.at(by + y, bx + x) = block[y * 8 + x];
    }

  Array2D out(plane.rows, plane.cols);
  for (int r = 0; r < plane.rows; ++r)
    for (int c = 0; c < plane.cols; ++c)
      out.at(r, c) = (padded.at(r, c) + 128.0) / 255.0;
  return out;
}

}  // namespace

QuantTables scale_quant_tables(int quality) {
  if (quality < 1 || quality > 100)
    throw Error("BadQuality", "quality must be in [1, 100]");
  int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  QuantTables t;
  t.quality = quality;
  t.luma = scale_table(kBaseLuma, scale);
  t.chroma = scale_table(kBaseChroma, scale);
  return t;
}

ImageTensor jpeg_defense(const ImageTensor& img, int quality) {
  QuantTables tables = scale_quant_tables(quality);

  if (img.channels == 1) {
    ImageTensor out(img.height, img.width, 1);
    insert_channel(out, 0, quantize_plane(extract_channel(img, 0), tables.luma));
    return clip(out);
  }
  if (img.channels != 3)
    throw Error("ChannelMismatch", "jpeg_defense needs 1 or 3 channels");

  YCbCrImage ycc = rgb_to_ycbcr(img);
  Array2D planes[3];
  for (int c = 0; c < 3; ++c) {
    Array2D p(img.height, img.width);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) p.at(y, x) = ycc.at(y, x, c);
    planes[c] = std::move(p);
  }

  planes[0] = quantize_plane(planes[0], tables.luma);
  for (int c = 1; c < 3; ++c) {
    Array2D sub = subsample_420(planes[c]);
    sub = quantize_plane(sub, tables.chroma);
    planes[c] = upsample_nearest_2x(sub, img.height, img.width);
  }

  YCbCrImage merged;
  merged.height = img.height;
  merged.width = img.width;
  merged.data.resize(img.data.size());
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) merged.at(y, x, c) = planes[c].at(y, x);
  return clip(ycbcr_to_rgb(merged));
}

}  // namespace basisguard
