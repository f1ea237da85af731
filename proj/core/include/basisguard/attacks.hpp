#ifndef BASISGUARD_ATTACKS_HPP
#define BASISGUARD_ATTACKS_HPP

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "basisguard/image.hpp"
#include "basisguard/model.hpp"

namespace basisguard {

// Analysis/synthesis transform pair with a retained-coefficient mask.
// Denoising an image and filtering a gradient are the same projection:
// synthesis(analysis(.) with the filtered coefficients zeroed).
class BasisProjector {
 public:
  virtual ~BasisProjector() = default;
  virtual std::size_t input_size() const = 0;
  virtual std::size_t coeff_count() const = 0;
  virtual std::vector<double> analysis(std::span<const double> x) const = 0;
  virtual std::vector<double> synthesis(std::span<const double> z) const = 0;
  // One flag per coefficient; true = retained.
  virtual const std::vector<std::uint8_t>& retained() const = 0;

  std::vector<double> project(std::span<const double> x) const;
};

// Complex-exponential basis with a centered disk mask of the given radius;
// coefficients are stored per channel as (re, im) pairs per bin.
std::unique_ptr<BasisProjector> make_dft_lowpass_projector(int h, int w, int c,
                                                           double radius);
// Wavelet basis retaining the approximation band of a level-k pyramid.
std::unique_ptr<BasisProjector> make_wavelet_approx_projector(int h, int w, int c,
                                                              int levels);
// Full basis: analysis and synthesis are exact copies, everything retained.
std::unique_ptr<BasisProjector> make_identity_projector(int h, int w, int c);

// Zeroes the filtered coefficients of g in the projector's basis.
std::vector<double> filtered_gradient(const BasisProjector& projector,
                                      std::span<const double> g);

// Denoiser applied to a raw gradient array inside fga().
class GradientDenoiser {
 public:
  virtual ~GradientDenoiser() = default;
  virtual std::vector<double> apply(std::span<const double> g, int h, int w,
                                    int c) const = 0;
};

class ProjectorGradientDenoiser : public GradientDenoiser {
 public:
  explicit ProjectorGradientDenoiser(std::shared_ptr<const BasisProjector> proj)
      : proj_(std::move(proj)) {}
  std::vector<double> apply(std::span<const double> g, int h, int w,
                            int c) const override;
  const BasisProjector& projector() const { return *proj_; }

 private:
  std::shared_ptr<const BasisProjector> proj_;
};

// Adapts an image-space denoiser (JPEG, soft-thresholding, PCA, ...) to
// gradient arrays: the gradient is affinely rescaled into [0, 1], denoised,
// and mapped back. A constant gradient passes through unchanged.
using ImageDenoiser = std::function<ImageTensor(const ImageTensor&)>;

class RescalingGradientDenoiser : public GradientDenoiser {
 public:
  explicit RescalingGradientDenoiser(ImageDenoiser denoiser)
      : denoiser_(std::move(denoiser)) {}
  std::vector<double> apply(std::span<const double> g, int h, int w,
                            int c) const override;

 private:
  ImageDenoiser denoiser_;
};

// sgn with sgn(0) = 0.
double sign(double v);

// x' = clip(x + eps * sgn(grad J)).
ImageTensor fgsm(const Classifier& model, const ImageTensor& x, int y, double eps);

// M repeated FGSM steps of size eps_step, clipping to [0, 1] each step.
ImageTensor ifgsm(const Classifier& model, const ImageTensor& x, int y,
                  double eps_step, int iterations);

struct CwParams {
  double kappa = 0.0;
  double lambda_f = 0.02;
  int steps = 100;
  double lr = 0.01;
};

struct CwResult {
  ImageTensor adversarial;
  double best_objective = 0.0;
  int best_step = 0;
  std::vector<double> best_objective_trace;  // best-so-far after each step
};

// Minimizes ||x - x'||^2 + lambda_f * max(-kappa, Z(x')_{f(x)} - max_{c != f(x)}
// Z(x')_c) with Adam in pixel space, projecting to [0, 1] each step. f(x) is
// the clean prediction, frozen before the first step; the returned image is
// the iterate with the lowest objective seen.
CwResult cw_l2(const Classifier& model, const ImageTensor& x, const CwParams& params);

// x'' = clip(x + s * (x' - x)), the post-hoc magnitude control for attacks
// without an epsilon knob.
ImageTensor scale_perturbation(const ImageTensor& x, const ImageTensor& x_adv,
                               double s);

// Filtered Gradient Attack: FGSM on a denoised gradient.
ImageTensor fga(const Classifier& model, const ImageTensor& x, int y, double eps,
                const GradientDenoiser& denoiser);

// Backward-pass differentiable approximation around a non-differentiable
// denoiser: the gradient is evaluated at den(x) but the step is applied to
// the raw x.
ImageTensor bpda_fgsm(const Classifier& model, const ImageTensor& x, int y,
                      double eps, const ImageDenoiser& denoiser);

}  // namespace basisguard

#endif
