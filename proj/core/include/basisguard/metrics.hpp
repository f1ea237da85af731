#ifndef BASISGUARD_METRICS_HPP
#define BASISGUARD_METRICS_HPP

#include <span>

#include "basisguard/image.hpp"
#include "basisguard/model.hpp"

namespace basisguard {

// mean_i ||x_i - x'_i||_2 / ||x_i||_2. Throws "ZeroNormImage" if any clean
// image has zero norm.
double normalized_l2(std::span<const ImageTensor> clean,
                     std::span<const ImageTensor> perturbed);

// Fraction of examples whose argmax logit equals the label.
double top1_accuracy(const Classifier& model, std::span<const ImageTensor> batch,
                     std::span<const int> labels, int threads = 1);

double mse(const ImageTensor& a, const ImageTensor& b);
double psnr(const ImageTensor& a, const ImageTensor& b);

}  // namespace basisguard

#endif
