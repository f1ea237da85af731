#include "basisguard/image.hpp"

#include <algorithm>
#include <cmath>

#include "basisguard/error.hpp"

namespace basisguard {

ImageTensor clip(const ImageTensor& img) {
  ImageTensor out = img;
  for (double& v : out.data) {
    if (!std::isfinite(v)) throw Error("NonFiniteInput", "clip");
    v = std::min(1.0, std::max(0.0, v));
  }
  return out;
}

// Forward uses Y = 0.299 R + 0.587 G + 0.114 B with Cb = (B - Y)/1.772 + 0.5
// and Cr = (R - Y)/1.402 + 0.5; the inverse below solves the same three
// equations, so the pair is exact rather than a pair of rounded matrices.
YCbCrImage rgb_to_ycbcr(const ImageTensor& img) {
  if (img.channels != 3) throw Error("ChannelMismatch", "rgb_to_ycbcr needs 3 channels");
  YCbCrImage out;
  out.height = img.height;
  out.width = img.width;
  out.data.resize(img.data.size());
  const std::size_t n = static_cast<std::size_t>(img.height) * img.width;
  for (std::size_t i = 0; i < n; ++i) {
    double r = img.data[3 * i + 0];
    double g = img.data[3 * i + 1];
    double b = img.data[3 * i + 2];
    double y = 0.299 * r + 0.587 * g + 0.114 * b;
    out.data[3 * i + 0] = y;
    out.data[3 * i + 1] = (b - y) / 1.772 + 0.5;
    out.data[3 * i + 2] = (r - y) / 1.402 + 0.5;
  }
  return out;
}

ImageTensor ycbcr_to_rgb(const YCbCrImage& img) {
  ImageTensor out(img.height, img.width, 3);
  const std::size_t n = static_cast<std::size_t>(img.height) * img.width;
  for (std::size_t i = 0; i < n; ++i) {
    double y = img.data[3 * i + 0];
    double cb = img.data[3 * i + 1];
    double cr = img.data[3 * i + 2];
    double r = y + 1.402 * (cr - 0.5);
    double b = y + 1.772 * (cb - 0.5);
    double g = (y - 0.299 * r - 0.114 * b) / 0.587;
    out.data[3 * i + 0] = r;
    out.data[3 * i + 1] = g;
    out.data[3 * i + 2] = b;
  }
  return out;
}

namespace {

// Catmull-Rom kernel, a = -0.5. W(0) = 1 and W(1) = W(2) = 0 exactly, so a
// same-size resize is the identity.
double cubic_weight(double t) {
  constexpr double a = -0.5;
  t = std::fabs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

struct TapSet {
  // For each output coordinate: four source indices (edge-clamped) and
  // weights.
  std::vector<int> idx;     // 4 per output sample
  std::vector<double> wgt;  // 4 per output sample
};

TapSet make_taps(int in_n, int out_n) {
  TapSet taps;
  taps.idx.resize(static_cast<std::size_t>(out_n) * 4);
  taps.wgt.resize(static_cast<std::size_t>(out_n) * 4);
  const double scale = static_cast<double>(in_n) / out_n;
  for (int o = 0; o < out_n; ++o) {
    double src = (o + 0.5) * scale - 0.5;
    int base = static_cast<int>(std::floor(src));
    double frac = src - base;
    for (int k = 0; k < 4; ++k) {
      int i = base - 1 + k;
      taps.idx[4 * o + k] = std::clamp(i, 0, in_n - 1);
      taps.wgt[4 * o + k] = cubic_weight(frac - (k - 1));
    }
  }
  return taps;
}

}  // namespace

Array2D resize_bicubic_plane(const Array2D& plane, int new_h, int new_w) {
  if (new_h < 1 || new_w < 1) throw Error("BadSize", "resize target must be >= 1");
  TapSet tx = make_taps(plane.cols, new_w);
  TapSet ty = make_taps(plane.rows, new_h);

  // Horizontal pass, then vertical.
  Array2D mid(plane.rows, new_w);
  for (int r = 0; r < plane.rows; ++r) {
    for (int o = 0; o < new_w; ++o) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k)
        acc += tx.wgt[4 * o + k] * plane.at(r, tx.idx[4 * o + k]);
      mid.at(r, o) = acc;
    }
  }
  Array2D out(new_h, new_w);
  for (int o = 0; o < new_h; ++o) {
    for (int c = 0; c < new_w; ++c) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k)
        acc += ty.wgt[4 * o + k] * mid.at(ty.idx[4 * o + k], c);
      out.at(o, c) = acc;
    }
  }
  return out;
}

ImageTensor resize_bicubic(const ImageTensor& img, int new_h, int new_w) {
  ImageTensor out(new_h, new_w, img.channels);
  for (int c = 0; c < img.channels; ++c) {
    Array2D plane = extract_channel(img, c);
    insert_channel(out, c, resize_bicubic_plane(plane, new_h, new_w));
  }
  return clip(out);
}

Array2D extract_channel(const ImageTensor& img, int c) {
  Array2D plane(img.height, img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) plane.at(y, x) = img.at(y, x, c);
  return plane;
}

void insert_channel(ImageTensor& img, int c, const Array2D& plane) {
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) img.at(y, x, c) = plane.at(y, x);
}

}  // namespace basisguard
