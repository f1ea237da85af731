#include "basisguard/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "basisguard/error.hpp"
#include "basisguard/image_io.hpp"
#include "basisguard/rng.hpp"

namespace basisguard {

LabeledImages load_idx_split(const std::string& root, bool train) {
  std::string base = root;
  if (const char* env = std::getenv("BASISGUARD_DATA"); env && *env) base = env;
  std::string prefix = train ? "train" : "t10k";
  std::string img_path = base + "/" + prefix + "-images-idx3-ubyte";
  std::string lbl_path = base + "/" + prefix + "-labels-idx1-ubyte";

  LabeledImages out;
  out.images = read_idx_images(img_path);
  out.labels = read_idx_labels(lbl_path);
  if (out.images.size() != out.labels.size())
    throw Error("BadIdx", "image/label count mismatch under " + base);
  int max_label = 0;
  for (int l : out.labels) max_label = std::max(max_label, l);
  out.num_classes = std::max(10, max_label + 1);
  return out;
}

namespace {

// Glyph indicators on [-1, 1]^2; 10 visually distinct classes that still
// share strokes (bars, crosses, corners) so the decision boundaries are not
// trivial under rotation and translation jitter.
bool glyph_inside(int cls, double x, double y) {
  const double r = std::sqrt(x * x + y * y);
  switch (cls) {
    case 0:  // filled disk
      return r <= 0.60;
    case 1:  // vertical bar
      return std::fabs(x) <= 0.18 && std::fabs(y) <= 0.72;
    case 2:  // horizontal bar
      return std::fabs(y) <= 0.18 && std::fabs(x) <= 0.72;
    case 3:  // plus
      return (std::fabs(x) <= 0.16 && std::fabs(y) <= 0.70) ||
             (std::fabs(y) <= 0.16 && std::fabs(x) <= 0.70);
    case 4: {  // diagonal cross
      double u = (x - y) * 0.7071067811865476;
      double v = (x + y) * 0.7071067811865476;
      return r <= 0.85 && (std::fabs(u) <= 0.16 || std::fabs(v) <= 0.16);
    }
    case 5:  // ring
      return r >= 0.36 && r <= 0.62;
    case 6: {  // square outline
      double m = std::max(std::fabs(x), std::fabs(y));
      return m >= 0.38 && m <= 0.62;
    }
    case 7:  // filled triangle, apex up
      return y >= -0.55 && y <= 0.62 && std::fabs(x) <= (0.62 - y) * 0.62;
    case 8:  // T
      return (std::fabs(y - 0.52) <= 0.16 && std::fabs(x) <= 0.62) ||
             (std::fabs(x) <= 0.16 && y <= 0.52 && y >= -0.72);
    case 9:  // L
      return (std::fabs(x + 0.40) <= 0.16 && std::fabs(y) <= 0.68) ||
             (std::fabs(y + 0.52) <= 0.16 && x >= -0.40 && x <= 0.60);
    default:
      return false;
  }
}

ImageTensor render_glyph(int cls, int size, bool color, Rng& rng) {
  const double angle = rng.uniform(-0.44, 0.44);  // about +-25 degrees
  const double scale = rng.uniform(0.80, 1.15);
  const double tx = rng.uniform(-0.15, 0.15);
  const double ty = rng.uniform(-0.15, 0.15);
  const double amp = rng.uniform(0.60, 1.00);
  const double ca = std::cos(angle), sa = std::sin(angle);

  double fg[3] = {amp, amp, amp};
  double bg[3] = {0.0, 0.0, 0.0};
  if (color) {
    for (int c = 0; c < 3; ++c) {
      fg[c] = rng.uniform(0.55, 1.00);
      bg[c] = rng.uniform(0.00, 0.20);
    }
  }

  const int channels = color ? 3 : 1;
  ImageTensor img(size, size, channels);
  const int ss = 3;  // supersampling grid per pixel for soft edges
  for (int py = 0; py < size; ++py)
    for (int px = 0; px < size; ++px) {
      int hits = 0;
      for (int sy = 0; sy < ss; ++sy)
        for (int sx = 0; sx < ss; ++sx) {
          double u = ((px + (sx + 0.5) / ss) / size) * 2.0 - 1.0;
          double v = ((py + (sy + 0.5) / ss) / size) * 2.0 - 1.0;
          // Inverse affine map into glyph space.
          double gx = (ca * (u - tx) + sa * (v - ty)) / scale;
          double gy = (-sa * (u - tx) + ca * (v - ty)) / scale;
          if (glyph_inside(cls, gx, gy)) ++hits;
        }
      double coverage = static_cast<double>(hits) / (ss * ss);
      for (int c = 0; c < channels; ++c) {
        double v = bg[c] + (fg[c] - bg[c]) * coverage + rng.normal(0.0, 0.05);
        img.at(py, px, c) = std::min(1.0, std::max(0.0, v));
      }
    }
  return img;
}

}  // namespace

LabeledImages generate_synth_glyphs(int count, const SynthConfig& config,
                                    std::uint64_t stream_offset) {
  LabeledImages out;
  out.num_classes = 10;
  out.images.reserve(count);
  out.labels.reserve(count);
  int size = config.color ? std::max(config.size, 32) : config.size;
  for (int i = 0; i < count; ++i) {
    Rng rng = Rng::substream(config.seed, stream_offset + i);
    int cls = static_cast<int>(rng.uniform_index(10));
    out.images.push_back(render_glyph(cls, size, config.color, rng));
    out.labels.push_back(cls);
  }
  return out;
}

void write_synth_dataset(const std::string& root, const SynthConfig& config) {
  if (config.color)
    throw Error("ChannelMismatch", "IDX output supports grayscale only");
  std::filesystem::create_directories(root);
  LabeledImages train = generate_synth_glyphs(config.train_count, config, 0);
  LabeledImages test =
      generate_synth_glyphs(config.test_count, config, 1u << 24);
  write_idx_images(root + "/train-images-idx3-ubyte", train.images);
  write_idx_labels(root + "/train-labels-idx1-ubyte", train.labels);
  write_idx_images(root + "/t10k-images-idx3-ubyte", test.images);
  write_idx_labels(root + "/t10k-labels-idx1-ubyte", test.labels);
}

}  // namespace basisguard
