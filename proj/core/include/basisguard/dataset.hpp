#ifndef BASISGUARD_DATASET_HPP
#define BASISGUARD_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "basisguard/image.hpp"

namespace basisguard {

struct LabeledImages {
  std::vector<ImageTensor> images;
  std::vector<int> labels;
  int num_classes = 10;

  std::size_t size() const { return images.size(); }
};

// Loads an IDX pair (MNIST layout) from `root`:
//   <root>/train-images-idx3-ubyte, <root>/train-labels-idx1-ubyte
//   <root>/t10k-images-idx3-ubyte,  <root>/t10k-labels-idx1-ubyte
// When the BASISGUARD_DATA environment variable is set it overrides `root`.
LabeledImages load_idx_split(const std::string& root, bool train);

// Procedurally rendered 10-class glyph corpus (28x28 grayscale by default,
// 32x32 RGB in color mode). Each sample gets a random affine jitter, stroke
// intensity and additive Gaussian noise, all drawn from per-index
// substreams so the corpus is reproducible sample-by-sample.
struct SynthConfig {
  int train_count = 10000;
  int test_count = 2000;
  int size = 28;
  bool color = false;
  std::uint64_t seed = 7;
};

LabeledImages generate_synth_glyphs(int count, const SynthConfig& config,
                                    std::uint64_t stream_offset);

// Writes train/test IDX pairs (grayscale only) under `root` using the MNIST
// file names, so everything downstream exercises the same ingestion path as
// a real MNIST directory.
void write_synth_dataset(const std::string& root, const SynthConfig& config);

}  // namespace basisguard

#endif
