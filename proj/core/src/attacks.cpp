#include "basisguard/attacks.hpp"

#include <algorithm>
#include <cmath>

#include "basisguard/error.hpp"
#include "basisguard/spectral.hpp"
#include "basisguard/wavelet.hpp"

namespace basisguard {

std::vector<double> BasisProjector::project(std::span<const double> x) const {
  std::vector<double> z = analysis(x);
  const auto& mask = retained();
  for (std::size_t i = 0; i < z.size(); ++i)
    if (!mask[i]) z[i] = 0.0;
  return synthesis(z);
}

std::vector<double> filtered_gradient(const BasisProjector& projector,
                                      std::span<const double> g) {
  if (g.size() != projector.input_size())
    throw Error("ShapeMismatch", "gradient does not match projector input");
  return projector.project(g);
}

namespace {

class DftLowpassProjector : public BasisProjector {
 public:
  DftLowpassProjector(int h, int w, int c, double radius) : h_(h), w_(w), c_(c) {
    const std::size_t bins = static_cast<std::size_t>(h) * w;
    mask_.resize(bins * 2 * c);
    for (int ch = 0; ch < c; ++ch)
      for (int ky = 0; ky < h; ++ky)
        for (int kx = 0; kx < w; ++kx) {
          bool keep = centered_bin_distance(ky, kx, h, w) <= radius;
          std::size_t bin = (static_cast<std::size_t>(ch) * bins +
                             static_cast<std::size_t>(ky) * w + kx);
          mask_[2 * bin] = keep;
          mask_[2 * bin + 1] = keep;
        }
  }

  std::size_t input_size() const override {
    return static_cast<std::size_t>(h_) * w_ * c_;
  }
  std::size_t coeff_count() const override { return mask_.size(); }

  std::vector<double> analysis(std::span<const double> x) const override {
    std::vector<double> z(coeff_count());
    const std::size_t bins = static_cast<std::size_t>(h_) * w_;
    Array2D plane(h_, w_);
    for (int ch = 0; ch < c_; ++ch) {
      for (int y = 0; y < h_; ++y)
        for (int xx = 0; xx < w_; ++xx)
          plane.at(y, xx) = x[(static_cast<std::size_t>(y) * w_ + xx) * c_ + ch];
      Spectrum2D s = dft2(plane);
      for (std::size_t b = 0; b < bins; ++b) {
        z[2 * (ch * bins + b)] = s.coeffs[b].real();
        z[2 * (ch * bins + b) + 1] = s.coeffs[b].imag();
      }
    }
    return z;
  }

  std::vector<double> synthesis(std::span<const double> z) const override {
    std::vector<double> out(input_size());
    const std::size_t bins = static_cast<std::size_t>(h_) * w_;
    for (int ch = 0; ch < c_; ++ch) {
      Spectrum2D s;
      s.height = h_;
      s.width = w_;
      s.coeffs.resize(bins);
      for (std::size_t b = 0; b < bins; ++b)
        s.coeffs[b] = {z[2 * (ch * bins + b)], z[2 * (ch * bins + b) + 1]};
      Array2D plane = idft2_real(s);
      for (int y = 0; y < h_; ++y)
        for (int xx = 0; xx < w_; ++xx)
          out[(static_cast<std::size_t>(y) * w_ + xx) * c_ + ch] = plane.at(y, xx);
    }
    return out;
  }

  const std::vector<std::uint8_t>& retained() const override { return mask_; }

 private:
  int h_, w_, c_;
  std::vector<std::uint8_t> mask_;
};

class WaveletApproxProjector : public BasisProjector {
 public:
  WaveletApproxProjector(int h, int w, int c, int levels)
      : h_(h), w_(w), c_(c), levels_(levels) {
    // Coefficient layout per channel: approx band first, then LH/HL/HH from
    // coarsest to finest. Probe once to get band sizes.
    Array2D probe(h, w);
    WaveletPyramid pyr = dwt2(probe, levels, bior31());
    approx_len_ = pyr.approx.size();
    per_channel_ = approx_len_;
    for (const auto& det : pyr.details)
      per_channel_ += det.lh.size() + det.hl.size() + det.hh.size();
    mask_.assign(per_channel_ * c, 0);
    for (int ch = 0; ch < c; ++ch)
      for (std::size_t i = 0; i < approx_len_; ++i)
        mask_[ch * per_channel_ + i] = 1;
  }

  std::size_t input_size() const override {
    return static_cast<std::size_t>(h_) * w_ * c_;
  }
  std::size_t coeff_count() const override { return mask_.size(); }

  std::vector<double> analysis(std::span<const double> x) const override {
    std::vector<double> z(coeff_count());
    Array2D plane(h_, w_);
    for (int ch = 0; ch < c_; ++ch) {
      for (int y = 0; y < h_; ++y)
        for (int xx = 0; xx < w_; ++xx)
          plane.at(y, xx) = x[(static_cast<std::size_t>(y) * w_ + xx) * c_ + ch];
      WaveletPyramid pyr = dwt2(plane, levels_, bior31());
      std::size_t pos = ch * per_channel_;
      for (double v : pyr.approx.v) z[pos++] = v;
      for (int l = levels_ - 1; l >= 0; --l) {
        for (double v : pyr.details[l].lh.v) z[pos++] = v;
        for (double v : pyr.details[l].hl.v) z[pos++] = v;
        for (double v : pyr.details[l].hh.v) z[pos++] = v;
      }
    }
    return z;
  }

  std::vector<double> synthesis(std::span<const double> z) const override {
    std::vector<double> out(input_size());
    Array2D probe(h_, w_);
    for (int ch = 0; ch < c_; ++ch) {
      WaveletPyramid pyr = dwt2(probe, levels_, bior31());
      std::size_t pos = ch * per_channel_;
      for (double& v : pyr.approx.v) v = z[pos++];
      for (int l = levels_ - 1; l >= 0; --l) {
        for (double& v : pyr.details[l].lh.v) v = z[pos++];
        for (double& v : pyr.details[l].hl.v) v = z[pos++];
        for (double& v : pyr.details[l].hh.v) v = z[pos++];
      }
      Array2D plane = idwt2(pyr, bior31());
      for (int y = 0; y < h_; ++y)
        for (int xx = 0; xx < w_; ++xx)
          out[(static_cast<std::size_t>(y) * w_ + xx) * c_ + ch] = plane.at(y, xx);
    }
    return out;
  }

  const std::vector<std::uint8_t>& retained() const override { return mask_; }

 private:
  int h_, w_, c_, levels_;
  std::size_t approx_len_ = 0, per_channel_ = 0;
  std::vector<std::uint8_t> mask_;
};

class IdentityProjector : public BasisProjector {
 public:
  IdentityProjector(int h, int w, int c)
      : size_(static_cast<std::size_t>(h) * w * c), mask_(size_, 1) {}
  std::size_t input_size() const override { return size_; }
  std::size_t coeff_count() const override { return size_; }
  std::vector<double> analysis(std::span<const double> x) const override {
    return {x.begin(), x.end()};
  }
  std::vector<double> synthesis(std::span<const double> z) const override {
    return {z.begin(), z.end()};
  }
  const std::vector<std::uint8_t>& retained() const override { return mask_; }

 private:
  std::size_t size_;
  std::vector<std::uint8_t> mask_;
};

}  // namespace

std::unique_ptr<BasisProjector> make_dft_lowpass_projector(int h, int w, int c,
                                                           double radius) {
  return std::make_unique<DftLowpassProjector>(h, w, c, radius);
}

std::unique_ptr<BasisProjector> make_wavelet_approx_projector(int h, int w, int c,
                                                              int levels) {
  return std::make_unique<WaveletApproxProjector>(h, w, c, levels);
}

std::unique_ptr<BasisProjector> make_identity_projector(int h, int w, int c) {
  return std::make_unique<IdentityProjector>(h, w, c);
}

std::vector<double> ProjectorGradientDenoiser::apply(std::span<const double> g,
                                                     int, int, int) const {
  return filtered_gradient(*proj_, g);
}

std::vector<double> RescalingGradientDenoiser::apply(std::span<const double> g,
                                                     int h, int w, int c) const {
  double lo = g[0], hi = g[0];
  for (double v : g) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi <= lo) return {g.begin(), g.end()};

  ImageTensor scaled(h, w, c);
  const double span = hi - lo;
  for (std::size_t i = 0; i < g.size(); ++i) scaled.data[i] = (g[i] - lo) / span;
  ImageTensor denoised = denoiser_(scaled);
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = denoised.data[i] * span + lo;
  return out;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

ImageTensor fgsm(const Classifier& model, const ImageTensor& x, int y, double eps) {
  if (eps < 0.0) throw Error("BadEpsilon", "eps must be nonnegative");
  std::vector<double> g = input_gradient(model, x, y);
  ImageTensor out = x;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] += eps * sign(g[i]);
  return clip(out);
}

ImageTensor ifgsm(const Classifier& model, const ImageTensor& x, int y,
                  double eps_step, int iterations) {
  if (iterations < 1) throw Error("BadIterations", "iterations must be >= 1");
  ImageTensor cur = x;
  for (int m = 0; m < iterations; ++m) cur = fgsm(model, cur, y, eps_step);
  return cur;
}

CwResult cw_l2(const Classifier& model, const ImageTensor& x, const CwParams& params) {
  if (params.kappa < 0.0) throw Error("BadKappa", "kappa must be nonnegative");
  if (params.lambda_f <= 0.0) throw Error("BadLambda", "lambda_f must be positive");

  const int classes = model.num_classes();
  const int f0 = argmax(forward(model, x));

  auto objective = [&](const ImageTensor& cand, std::vector<double>* dgrad) {
    std::vector<double> logits = forward(model, cand);
    // Runner-up logit among classes other than the frozen clean prediction.
    int runner = f0 == 0 ? 1 : 0;
    for (int c = 0; c < classes; ++c)
      if (c != f0 && logits[c] > logits[runner]) runner = c;
    double margin = logits[f0] - logits[runner];
    double margin_term = std::max(-params.kappa, margin);

    double dist = 0.0;
    for (std::size_t i = 0; i < cand.data.size(); ++i) {
      double d = cand.data[i] - x.data[i];
      dist += d * d;
    }
    if (dgrad) {
      *dgrad = std::vector<double>(cand.data.size(), 0.0);
      if (margin > -params.kappa) {
        std::vector<double> dlogits(classes, 0.0);
        dlogits[f0] = params.lambda_f;
        dlogits[runner] = -params.lambda_f;
        *dgrad = input_gradient_logits(model, cand, dlogits);
      }
      for (std::size_t i = 0; i < cand.data.size(); ++i)
        (*dgrad)[i] += 2.0 * (cand.data[i] - x.data[i]);
    }
    return dist + params.lambda_f * margin_term;
  };

  CwResult result;
  result.adversarial = x;
  result.best_objective = objective(x, nullptr);
  result.best_step = 0;
  result.best_objective_trace.reserve(params.steps);

  ImageTensor cur = x;
  std::vector<double> m(x.data.size(), 0.0), v(x.data.size(), 0.0);
  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

  for (int step = 1; step <= params.steps; ++step) {
    std::vector<double> grad;
    objective(cur, &grad);
    double bc1 = 1.0 - std::pow(beta1, step);
    double bc2 = 1.0 - std::pow(beta2, step);
    for (std::size_t i = 0; i < grad.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
      double update = (m[i] / bc1) / (std::sqrt(v[i] / bc2) + adam_eps);
      cur.data[i] = std::clamp(cur.data[i] - params.lr * update, 0.0, 1.0);
    }
    double obj = objective(cur, nullptr);
    if (obj < result.best_objective) {
      result.best_objective = obj;
      result.adversarial = cur;
      result.best_step = step;
    }
    result.best_objective_trace.push_back(result.best_objective);
  }
  return result;
}

ImageTensor scale_perturbation(const ImageTensor& x, const ImageTensor& x_adv,
                               double s) {
  if (s < 1.0) throw Error("BadScale", "scale must be >= 1");
  if (!x.same_shape(x_adv)) throw Error("ShapeMismatch", "scale_perturbation");
  ImageTensor out = x;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = x.data[i] + s * (x_adv.data[i] - x.data[i]);
  return clip(out);
}

ImageTensor fga(const Classifier& model, const ImageTensor& x, int y, double eps,
                const GradientDenoiser& denoiser) {
  std::vector<double> g = input_gradient(model, x, y);
  std::vector<double> den = denoiser.apply(g, x.height, x.width, x.channels);
  ImageTensor out = x;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] += eps * sign(den[i]);
  return clip(out);
}

ImageTensor bpda_fgsm(const Classifier& model, const ImageTensor& x, int y,
                      double eps, const ImageDenoiser& denoiser) {
  ImageTensor den = denoiser(x);
  std::vector<double> g = input_gradient(model, den, y);
  ImageTensor out = x;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] += eps * sign(g[i]);
  return clip(out);
}

}  // namespace basisguard
