#ifndef BASISGUARD_MODEL_HPP
#define BASISGUARD_MODEL_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "basisguard/image.hpp"

namespace basisguard {

// Fixed architecture: conv3x3x16 - relu - pool2 - conv3x3x32 - relu - pool2
// - fc128 - relu - fcC, softmax cross-entropy head. Differentiation is
// hand-written reverse mode: the attacks need exact input gradients and the
// white-box experiments splice denoisers in front of the net, so owning the
// whole graph (instead of an autodiff dependency) is the point. All math is
// in doubles to keep finite-difference checks tight.

struct ConvLayer {
  int in_ch = 0, out_ch = 0;
  std::vector<double> w;  // [oc][ky][kx][ic], 3x3 taps
  std::vector<double> b;  // [oc]
};

struct DenseLayer {
  int in_dim = 0, out_dim = 0;
  std::vector<double> w;  // [out][in]
  std::vector<double> b;  // [out]
};

class Classifier {
 public:
  Classifier() = default;
  // Kaiming-uniform init from counter-based substreams of `seed`, so the
  // parameter draw does not depend on construction order elsewhere.
  Classifier(int input_h, int input_w, int input_c, int num_classes,
             std::uint64_t seed);

  int input_height() const { return in_h_; }
  int input_width() const { return in_w_; }
  int input_channels() const { return in_c_; }
  int num_classes() const { return classes_; }
  std::string arch_string() const;

  ConvLayer conv1, conv2;
  DenseLayer fc1, fc2;

  // Spatial sizes after each pool (pooling floors odd extents).
  int pool1_h() const { return in_h_ / 2; }
  int pool1_w() const { return in_w_ / 2; }
  int pool2_h() const { return in_h_ / 2 / 2; }
  int pool2_w() const { return in_w_ / 2 / 2; }

  int in_h_ = 0, in_w_ = 0, in_c_ = 0, classes_ = 0;
};

// Cached activations for one forward pass; consumed by one backward pass.
struct GradientTape {
  std::vector<double> input;
  std::vector<double> a1, p1, a2, p2;  // pre-relu conv outputs, pooled maps
  std::vector<int> idx1, idx2;         // argmax input offsets per pooled cell
  std::vector<double> h1, hr1, logits;
};

// Per-parameter gradients, laid out exactly like the Classifier tensors.
struct ParamGrads {
  std::vector<double> cw1, cb1, cw2, cb2, fw1, fb1, fw2, fb2;
  void resize_like(const Classifier& m);
  void clear();
};

std::vector<double> forward(const Classifier& model, const ImageTensor& x,
                            GradientTape* tape = nullptr);
std::vector<double> softmax(std::span<const double> logits);
int argmax(std::span<const double> v);

double loss(const Classifier& model, const ImageTensor& x, int y);

// Reverse pass from an arbitrary logit cotangent. Fills dx (input gradient)
// and/or grads when non-null.
void backward(const Classifier& model, const GradientTape& tape,
              std::span<const double> dlogits, std::vector<double>* dx,
              ParamGrads* grads);

// Gradient of the cross-entropy loss with respect to the input pixels.
std::vector<double> input_gradient(const Classifier& model, const ImageTensor& x,
                                   int y);
std::vector<double> input_gradient_logits(const Classifier& model,
                                          const ImageTensor& x,
                                          std::span<const double> dlogits);

struct TrainConfig {
  int epochs = 3;
  int batch = 32;
  double lr = 0.05;
  double momentum = 0.9;
  std::uint64_t seed = 1;
  int threads = 0;  // <= 0: all cores
  bool verbose = false;
};

struct TrainReport {
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  int epochs = 0;
};

// SGD with momentum. Deterministic given the seed: pinned shuffle, and
// per-image gradients are accumulated in example order regardless of the
// thread count.
TrainReport train(Classifier& model, std::span<const ImageTensor> train_images,
                  std::span<const int> train_labels,
                  std::span<const ImageTensor> test_images,
                  std::span<const int> test_labels, const TrainConfig& config);

// Checkpoint container, documented byte-exactly in the README: magic "BGCK",
// u32 version, arch descriptor string, then named tensors with dtype tag,
// shape and little-endian f64 data.
void save_checkpoint(const std::string& path, const Classifier& model);
Classifier load_checkpoint(const std::string& path);

}  // namespace basisguard

#endif
