#include "basisguard/metrics.hpp"

#include <cmath>

#include "basisguard/error.hpp"
#include "basisguard/parallel.hpp"

namespace basisguard {

double normalized_l2(std::span<const ImageTensor> clean,
                     std::span<const ImageTensor> perturbed) {
  if (clean.size() != perturbed.size() || clean.empty())
    throw Error("ShapeMismatch", "batch sizes differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    if (!clean[i].same_shape(perturbed[i]))
      throw Error("ShapeMismatch", "image shapes differ");
    double diff = 0.0, ref = 0.0;
    for (std::size_t j = 0; j < clean[i].data.size(); ++j) {
      double d = clean[i].data[j] - perturbed[i].data[j];
      diff += d * d;
      ref += clean[i].data[j] * clean[i].data[j];
    }
    if (ref == 0.0) throw Error("ZeroNormImage", "clean image has zero norm");
    sum += std::sqrt(diff) / std::sqrt(ref);
  }
  return sum / static_cast<double>(clean.size());
}

double top1_accuracy(const Classifier& model, std::span<const ImageTensor> batch,
                     std::span<const int> labels, int threads) {
  if (batch.empty()) throw Error("EmptyBatch", "top1_accuracy on empty batch");
  if (batch.size() != labels.size())
    throw Error("ShapeMismatch", "batch/label count mismatch");
  std::vector<int> correct(batch.size(), 0);
  parallel_for(static_cast<int>(batch.size()), threads, [&](int i) {
    correct[i] = argmax(forward(model, batch[i])) == labels[i] ? 1 : 0;
  });
  long hits = 0;
  for (int c : correct) hits += c;
  return static_cast<double>(hits) / static_cast<double>(batch.size());
}

double mse(const ImageTensor& a, const ImageTensor& b) {
  if (!a.same_shape(b)) throw Error("ShapeMismatch", "mse");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    double d = a.data[i] - b.data[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.data.size());
}

double psnr(const ImageTensor& a, const ImageTensor& b) {
  double m = mse(a, b);
  if (m == 0.0) return 1e9;
  return 10.0 * std::log10(1.0 / m);
}

}  // namespace basisguard
