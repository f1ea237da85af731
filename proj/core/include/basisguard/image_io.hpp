#ifndef BASISGUARD_IMAGE_IO_HPP
#define BASISGUARD_IMAGE_IO_HPP

#include <string>
#include <vector>

#include "basisguard/image.hpp"

namespace basisguard {

// 8-bit image files. Pixels are scaled by 1/255 on load and rounded to the
// nearest 8-bit step on save. PNG supports non-interlaced grayscale and RGB;
// PPM means binary P6 (P5 for single-channel images).

ImageTensor read_png(const std::string& path);
void write_png(const std::string& path, const ImageTensor& img);

ImageTensor read_ppm(const std::string& path);
void write_ppm(const std::string& path, const ImageTensor& img);

// Dispatches on the file extension (.png / .ppm / .pgm).
ImageTensor read_image(const std::string& path);
void write_image(const std::string& path, const ImageTensor& img);

// IDX files as used by the MNIST distribution: big-endian magic 0x00000803
// with three dimensions for image stacks, 0x00000801 with one dimension for
// label vectors.
std::vector<ImageTensor> read_idx_images(const std::string& path);
std::vector<int> read_idx_labels(const std::string& path);
void write_idx_images(const std::string& path, const std::vector<ImageTensor>& images);
void write_idx_labels(const std::string& path, const std::vector<int>& labels);

}  // namespace basisguard

#endif
