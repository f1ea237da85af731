#include "basisguard/image_io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "basisguard/error.hpp"

namespace basisguard {

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("IoError", "cannot open " + path);
  f.seekg(0, std::ios::end);
  std::streamoff len = f.tellg();
  f.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(len));
  if (len > 0) f.read(reinterpret_cast<char*>(buf.data()), len);
  if (!f) throw Error("IoError", "short read on " + path);
  return buf;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& buf) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("IoError", "cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(buf.data()),
          static_cast<std::streamsize>(buf.size()));
  if (!f) throw Error("IoError", "short write on " + path);
}

std::uint8_t to_byte(double v) {
  double s = std::min(1.0, std::max(0.0, v)) * 255.0;
  return static_cast<std::uint8_t>(std::lround(s));
}

std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

void push_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

const std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

void push_chunk(std::vector<std::uint8_t>& out, const char type[4],
                const std::vector<std::uint8_t>& payload) {
  push_be32(out, static_cast<std::uint32_t>(payload.size()));
  std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  std::uint32_t crc = static_cast<std::uint32_t>(
      ::crc32(0L, out.data() + crc_start, static_cast<uInt>(4 + payload.size())));
  push_be32(out, crc);
}

int paeth(int a, int b, int c) {
  int p = a + b - c;
  int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace

void write_png(const std::string& path, const ImageTensor& img) {
  if (img.channels != 1 && img.channels != 3)
    throw Error("ChannelMismatch", "png supports 1 or 3 channels");
  const int bpp = img.channels;
  // Scanlines with filter byte 0 (None); zlib does the heavy lifting.
  std::vector<std::uint8_t> raw;
  raw.reserve(static_cast<std::size_t>(img.height) * (1 + img.width * bpp));
  for (int y = 0; y < img.height; ++y) {
    raw.push_back(0);
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < bpp; ++c) raw.push_back(to_byte(img.at(y, x, c)));
  }
  uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> comp(comp_len);
  if (compress2(comp.data(), &comp_len, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw Error("IoError", "zlib compression failed");
  comp.resize(comp_len);

  std::vector<std::uint8_t> out(kPngSig, kPngSig + 8);
  std::vector<std::uint8_t> ihdr;
  push_be32(ihdr, static_cast<std::uint32_t>(img.width));
  push_be32(ihdr, static_cast<std::uint32_t>(img.height));
  ihdr.push_back(8);                                  // bit depth
  ihdr.push_back(img.channels == 1 ? 0 : 2);          // color type
  ihdr.push_back(0);                                  // compression
  ihdr.push_back(0);                                  // filter
  ihdr.push_back(0);                                  // interlace
  push_chunk(out, "IHDR", ihdr);
  push_chunk(out, "IDAT", comp);
  push_chunk(out, "IEND", {});
  write_file(path, out);
}

ImageTensor read_png(const std::string& path) {
  std::vector<std::uint8_t> buf = read_file(path);
  if (buf.size() < 8 || std::memcmp(buf.data(), kPngSig, 8) != 0)
    throw Error("BadPng", "bad signature in " + path);

  int width = 0, height = 0, channels = 0;
  std::vector<std::uint8_t> idat;
  std::size_t pos = 8;
  bool seen_ihdr = false, seen_iend = false;
  while (pos + 8 <= buf.size() && !seen_iend) {
    std::uint32_t len = be32(&buf[pos]);
    if (pos + 12 + len > buf.size()) throw Error("BadPng", "truncated chunk");
    const std::uint8_t* type = &buf[pos + 4];
    const std::uint8_t* data = &buf[pos + 8];
    std::uint32_t crc = be32(&buf[pos + 8 + len]);
    std::uint32_t actual =
        static_cast<std::uint32_t>(::crc32(0L, type, static_cast<uInt>(4 + len)));
    if (crc != actual) throw Error("BadPng", "chunk crc mismatch");

    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13) throw Error("BadPng", "bad IHDR");
      width = static_cast<int>(be32(data));
      height = static_cast<int>(be32(data + 4));
      int depth = data[8], color = data[9], interlace = data[12];
      if (depth != 8) throw Error("BadPng", "only 8-bit PNG supported");
      if (interlace != 0) throw Error("BadPng", "interlaced PNG not supported");
      if (color == 0) channels = 1;
      else if (color == 2) channels = 3;
      else throw Error("BadPng", "only grayscale/RGB PNG supported");
      seen_ihdr = true;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), data, data + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      seen_iend = true;
    }
    pos += 12 + len;
  }
  if (!seen_ihdr || width <= 0 || height <= 0) throw Error("BadPng", "missing IHDR");

  const int bpp = channels;
  const std::size_t stride = static_cast<std::size_t>(width) * bpp;
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(height) * (1 + stride));
  uLongf raw_len = static_cast<uLongf>(raw.size());
  if (uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
      raw_len != raw.size())
    throw Error("BadPng", "IDAT decompression failed");

  // Undo per-scanline filters in place.
  std::vector<std::uint8_t> prev(stride, 0);
  ImageTensor img(height, width, channels);
  std::vector<std::uint8_t> cur(stride);
  for (int y = 0; y < height; ++y) {
    const std::uint8_t* line = &raw[static_cast<std::size_t>(y) * (1 + stride)];
    int filter = line[0];
    const std::uint8_t* src = line + 1;
    for (std::size_t i = 0; i < stride; ++i) {
      int a = i >= static_cast<std::size_t>(bpp) ? cur[i - bpp] : 0;
      int b = prev[i];
      int c = i >= static_cast<std::size_t>(bpp) ? prev[i - bpp] : 0;
      int x = src[i];
      switch (filter) {
        case 0: break;
        case 1: x += a; break;
        case 2: x += b; break;
        case 3: x += (a + b) / 2; break;
        case 4: x += paeth(a, b, c); break;
        default: throw Error("BadPng", "unknown filter type");
      }
      cur[i] = static_cast<std::uint8_t>(x & 0xff);
    }
    for (int xpos = 0; xpos < width; ++xpos)
      for (int ch = 0; ch < channels; ++ch)
        img.at(y, xpos, ch) = cur[static_cast<std::size_t>(xpos) * bpp + ch] / 255.0;
    prev = cur;
  }
  return img;
}

void write_ppm(const std::string& path, const ImageTensor& img) {
  if (img.channels != 1 && img.channels != 3)
    throw Error("ChannelMismatch", "ppm supports 1 or 3 channels");
  std::vector<std::uint8_t> out;
  std::string header = (img.channels == 3 ? std::string("P6\n") : std::string("P5\n")) +
                       std::to_string(img.width) + " " + std::to_string(img.height) +
                       "\n255\n";
  out.insert(out.end(), header.begin(), header.end());
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c) out.push_back(to_byte(img.at(y, x, c)));
  write_file(path, out);
}

ImageTensor read_ppm(const std::string& path) {
  std::vector<std::uint8_t> buf = read_file(path);
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string {
    while (pos < buf.size()) {
      if (std::isspace(buf[pos])) { ++pos; continue; }
      if (buf[pos] == '#') {
        while (pos < buf.size() && buf[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    std::size_t start = pos;
    while (pos < buf.size() && !std::isspace(buf[pos])) ++pos;
    return std::string(buf.begin() + start, buf.begin() + pos);
  };
  std::string magic = next_token();
  int channels;
  if (magic == "P6") channels = 3;
  else if (magic == "P5") channels = 1;
  else throw Error("BadPpm", "unsupported magic " + magic);
  int w = std::stoi(next_token());
  int h = std::stoi(next_token());
  int maxval = std::stoi(next_token());
  if (maxval != 255) throw Error("BadPpm", "only maxval 255 supported");
  ++pos;  // single whitespace after maxval
  std::size_t need = static_cast<std::size_t>(w) * h * channels;
  if (buf.size() - pos < need) throw Error("BadPpm", "truncated pixel data");
  ImageTensor img(h, w, channels);
  for (std::size_t i = 0; i < need; ++i) img.data[i] = buf[pos + i] / 255.0;
  return img;
}

ImageTensor read_image(const std::string& path) {
  auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".png") return read_png(path);
  if (ext == ".ppm" || ext == ".pgm") return read_ppm(path);
  throw Error("IoError", "unsupported image extension: " + path);
}

void write_image(const std::string& path, const ImageTensor& img) {
  auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".png") return write_png(path, img);
  if (ext == ".ppm" || ext == ".pgm") return write_ppm(path, img);
  throw Error("IoError", "unsupported image extension: " + path);
}

std::vector<ImageTensor> read_idx_images(const std::string& path) {
  std::vector<std::uint8_t> buf = read_file(path);
  if (buf.size() < 16) throw Error("BadIdx", "truncated header in " + path);
  if (be32(&buf[0]) != 0x00000803u)
    throw Error("BadIdx", "bad image magic in " + path);
  std::size_t count = be32(&buf[4]);
  std::size_t rows = be32(&buf[8]);
  std::size_t cols = be32(&buf[12]);
  if (buf.size() < 16 + count * rows * cols)
    throw Error("BadIdx", "truncated image data in " + path);
  std::vector<ImageTensor> images;
  images.reserve(count);
  std::size_t pos = 16;
  for (std::size_t i = 0; i < count; ++i) {
    ImageTensor img(static_cast<int>(rows), static_cast<int>(cols), 1);
    for (std::size_t p = 0; p < rows * cols; ++p) img.data[p] = buf[pos + p] / 255.0;
    pos += rows * cols;
    images.push_back(std::move(img));
  }
  return images;
}

std::vector<int> read_idx_labels(const std::string& path) {
  std::vector<std::uint8_t> buf = read_file(path);
  if (buf.size() < 8) throw Error("BadIdx", "truncated header in " + path);
  if (be32(&buf[0]) != 0x00000801u)
    throw Error("BadIdx", "bad label magic in " + path);
  std::size_t count = be32(&buf[4]);
  if (buf.size() < 8 + count) throw Error("BadIdx", "truncated label data in " + path);
  std::vector<int> labels(count);
  for (std::size_t i = 0; i < count; ++i) labels[i] = buf[8 + i];
  return labels;
}

void write_idx_images(const std::string& path, const std::vector<ImageTensor>& images) {
  if (images.empty()) throw Error("EmptyDataset", "no images to write");
  int rows = images[0].height, cols = images[0].width;
  for (const auto& im : images)
    if (im.height != rows || im.width != cols || im.channels != 1)
      throw Error("ShapeMismatch", "idx images must be uniform single-channel");
  std::vector<std::uint8_t> out;
  push_be32(out, 0x00000803u);
  push_be32(out, static_cast<std::uint32_t>(images.size()));
  push_be32(out, static_cast<std::uint32_t>(rows));
  push_be32(out, static_cast<std::uint32_t>(cols));
  for (const auto& im : images)
    for (double v : im.data) out.push_back(to_byte(v));
  write_file(path, out);
}

void write_idx_labels(const std::string& path, const std::vector<int>& labels) {
  std::vector<std::uint8_t> out;
  push_be32(out, 0x00000801u);
  push_be32(out, static_cast<std::uint32_t>(labels.size()));
  for (int l : labels) out.push_back(static_cast<std::uint8_t>(l));
  write_file(path, out);
}

}  // namespace basisguard
