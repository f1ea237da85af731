#ifndef BASISGUARD_IMAGE_HPP
#define BASISGUARD_IMAGE_HPP

#include <vector>

#include "basisguard/array2d.hpp"

namespace basisguard {

// H x W x C image, row-major, channel-interleaved, intensities in [0, 1].
// The pixel domain is real throughout so that attacks can differentiate
// through every transform; 8-bit conversion happens only at the I/O edge.
struct ImageTensor {
  int height = 0;
  int width = 0;
  int channels = 0;  // 1 or 3
  std::vector<double> data;

  ImageTensor() = default;
  ImageTensor(int h, int w, int c, double fill = 0.0)
      : height(h),
        width(w),
        channels(c),
        data(static_cast<std::size_t>(h) * w * c, fill) {}

  double& at(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::size_t size() const { return data.size(); }
  bool same_shape(const ImageTensor& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
};

// Same layout as ImageTensor; channel 0 = Y (luminance), 1 = Cb, 2 = Cr.
// Chrominance carries a +0.5 offset so a neutral image has Cb = Cr = 0.5.
struct YCbCrImage {
  int height = 0;
  int width = 0;
  int channels = 3;
  std::vector<double> data;

  double& at(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

// Elementwise min(1, max(0, v)). Throws "NonFiniteInput" if any element is
// NaN or infinite.
ImageTensor clip(const ImageTensor& img);

// BT.601 full-range transform pair. Exact mutual inverses up to rounding.
// Throws "ChannelMismatch" unless channels == 3.
YCbCrImage rgb_to_ycbcr(const ImageTensor& img);
ImageTensor ycbcr_to_rgb(const YCbCrImage& img);

// Catmull-Rom bicubic (a = -0.5), half-pixel centers, edge clamping.
// Output is clipped to [0, 1].
ImageTensor resize_bicubic(const ImageTensor& img, int new_h, int new_w);

// Channel-plane helpers shared by the transform modules.
Array2D extract_channel(const ImageTensor& img, int c);
void insert_channel(ImageTensor& img, int c, const Array2D& plane);
Array2D resize_bicubic_plane(const Array2D& plane, int new_h, int new_w);

}  // namespace basisguard

#endif
