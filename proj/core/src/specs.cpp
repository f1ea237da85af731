#include "basisguard/specs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "basisguard/error.hpp"
#include "basisguard/jpeg.hpp"
#include "basisguard/pca.hpp"
#include "basisguard/spectral.hpp"
#include "basisguard/wavelet.hpp"

namespace basisguard {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

constexpr double kReferenceSide = 299.0;

double effective_radius(double radius, int h, int w) {
  return radius * std::min(h, w) / kReferenceSide;
}

}  // namespace

const char* defense_method_name(DefenseMethod m) {
  switch (m) {
    case DefenseMethod::None: return "none";
    case DefenseMethod::LowPass: return "lowpass";
    case DefenseMethod::PcaRows: return "pca";
    case DefenseMethod::PcaPatches: return "pca-patch";
    case DefenseMethod::Jpeg: return "jpeg";
    case DefenseMethod::WaveletApprox: return "wavelet";
    case DefenseMethod::SoftThreshold: return "softthresh";
  }
  return "none";
}

DefenseMethod defense_method_from_name(const std::string& name) {
  static const std::map<std::string, DefenseMethod> table = {
      {"none", DefenseMethod::None},
      {"lowpass", DefenseMethod::LowPass},
      {"pca", DefenseMethod::PcaRows},
      {"pca-rows", DefenseMethod::PcaRows},
      {"pca-patch", DefenseMethod::PcaPatches},
      {"pca-patches", DefenseMethod::PcaPatches},
      {"jpeg", DefenseMethod::Jpeg},
      {"wavelet", DefenseMethod::WaveletApprox},
      {"wavelet-approx", DefenseMethod::WaveletApprox},
      {"softthresh", DefenseMethod::SoftThreshold},
      {"soft-threshold", DefenseMethod::SoftThreshold},
  };
  auto it = table.find(name);
  if (it == table.end()) throw Error("ConfigError", "unknown defense: " + name);
  return it->second;
}

std::string DefenseSpec::to_string() const {
  switch (method) {
    case DefenseMethod::None: return "none";
    case DefenseMethod::LowPass: return "lowpass(r=" + format_double(radius) + ")";
    case DefenseMethod::PcaRows: return "pca(k=" + std::to_string(k) + ")";
    case DefenseMethod::PcaPatches:
      return "pca-patch(p=" + std::to_string(patch) + ",k=" + std::to_string(k) + ")";
    case DefenseMethod::Jpeg: return "jpeg(q=" + std::to_string(quality) + ")";
    case DefenseMethod::WaveletApprox:
      return "wavelet(l=" + std::to_string(levels) + ")";
    case DefenseMethod::SoftThreshold:
      return "softthresh(l=" + std::to_string(levels) + ")";
  }
  return "none";
}

DefenseSpec DefenseSpec::from_string(const std::string& text) {
  DefenseSpec spec;
  auto paren = text.find('(');
  std::string name = text.substr(0, paren);
  spec.method = defense_method_from_name(name);
  if (paren != std::string::npos) {
    std::string args = text.substr(paren + 1, text.size() - paren - 2);
    std::size_t pos = 0;
    while (pos < args.size()) {
      auto comma = args.find(',', pos);
      std::string kv = args.substr(pos, comma == std::string::npos ? comma : comma - pos);
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error("ConfigError", "bad defense: " + text);
      std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
      if (key == "r") spec.radius = std::stod(val);
      else if (key == "k") spec.k = std::stoi(val);
      else if (key == "p") spec.patch = std::stoi(val);
      else if (key == "q") spec.quality = std::stoi(val);
      else if (key == "l") spec.levels = std::stoi(val);
      else throw Error("ConfigError", "bad defense key: " + key);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  spec.validate();
  return spec;
}

void DefenseSpec::validate() const {
  switch (method) {
    case DefenseMethod::None:
      break;
    case DefenseMethod::LowPass:
      if (radius <= 0.0) throw Error("ConfigError", "lowpass radius must be > 0");
      break;
    case DefenseMethod::PcaRows:
      if (k < 1) throw Error("ConfigError", "pca k must be >= 1");
      break;
    case DefenseMethod::PcaPatches:
      if (patch < 1 || k < 1 || k > patch * patch)
        throw Error("ConfigError", "pca-patch needs patch >= 1, 1 <= k <= patch^2");
      break;
    case DefenseMethod::Jpeg:
      if (quality < 1 || quality > 100)
        throw Error("ConfigError", "jpeg quality must be in [1, 100]");
      break;
    case DefenseMethod::WaveletApprox:
    case DefenseMethod::SoftThreshold:
      if (levels < 1) throw Error("ConfigError", "wavelet levels must be >= 1");
      break;
  }
}

void DefenseSpec::validate_for(int h, int w, int c) const {
  validate();
  const int min_dim = std::min(h, w);
  switch (method) {
    case DefenseMethod::PcaRows:
      if (k > min_dim)
        throw Error("ConfigError", "pca k exceeds min(H, W) = " + std::to_string(min_dim));
      break;
    case DefenseMethod::PcaPatches: {
      if (patch > min_dim)
        throw Error("ConfigError", "patch exceeds min(H, W)");
      int tiles = ((h + patch - 1) / patch) * ((w + patch - 1) / patch);
      if (k > std::min(tiles, patch * patch))
        throw Error("ConfigError", "pca-patch k exceeds the patch count " +
                                       std::to_string(tiles));
      break;
    }
    case DefenseMethod::WaveletApprox:
    case DefenseMethod::SoftThreshold:
      if ((min_dim >> levels) < 1)
        throw Error("ConfigError", "too many wavelet levels for image size");
      break;
    case DefenseMethod::Jpeg:
      if (c != 1 && c != 3)
        throw Error("ConfigError", "jpeg defense needs 1 or 3 channels");
      break;
    default:
      break;
  }
}

ImageTensor apply_defense(const DefenseSpec& spec, const ImageTensor& img) {
  switch (spec.method) {
    case DefenseMethod::None:
      return img;
    case DefenseMethod::LowPass:
      return lowpass_filter(img, effective_radius(spec.radius, img.height, img.width));
    case DefenseMethod::PcaRows:
      return pca_denoise_rows(img, spec.k);
    case DefenseMethod::PcaPatches:
      return pca_denoise_patches(img, spec.patch, spec.k);
    case DefenseMethod::Jpeg:
      return jpeg_defense(img, spec.quality);
    case DefenseMethod::WaveletApprox:
      return wavelet_approx_defense(img, spec.levels);
    case DefenseMethod::SoftThreshold:
      return soft_threshold_defense(img, spec.levels);
  }
  return img;
}

ImageDenoiser make_image_denoiser(const DefenseSpec& spec) {
  return [spec](const ImageTensor& img) { return apply_defense(spec, img); };
}

bool defense_is_projector(DefenseMethod m) {
  return m == DefenseMethod::None || m == DefenseMethod::LowPass ||
         m == DefenseMethod::WaveletApprox;
}

std::unique_ptr<GradientDenoiser> make_gradient_denoiser(const DefenseSpec& spec,
                                                         int h, int w, int c) {
  switch (spec.method) {
    case DefenseMethod::None:
      return std::make_unique<ProjectorGradientDenoiser>(make_identity_projector(h, w, c));
    case DefenseMethod::LowPass:
      return std::make_unique<ProjectorGradientDenoiser>(
          make_dft_lowpass_projector(h, w, c, effective_radius(spec.radius, h, w)));
    case DefenseMethod::WaveletApprox:
      return std::make_unique<ProjectorGradientDenoiser>(
          make_wavelet_approx_projector(h, w, c, spec.levels));
    default:
      return std::make_unique<RescalingGradientDenoiser>(make_image_denoiser(spec));
  }
}

const char* attack_method_name(AttackMethod m) {
  switch (m) {
    case AttackMethod::None: return "none";
    case AttackMethod::FGSM: return "fgsm";
    case AttackMethod::IFGSM: return "ifgsm";
    case AttackMethod::CW: return "cw";
    case AttackMethod::FGA: return "fga";
    case AttackMethod::BPDA: return "bpda";
  }
  return "none";
}

AttackMethod attack_method_from_name(const std::string& name) {
  static const std::map<std::string, AttackMethod> table = {
      {"none", AttackMethod::None}, {"fgsm", AttackMethod::FGSM},
      {"ifgsm", AttackMethod::IFGSM}, {"i-fgsm", AttackMethod::IFGSM},
      {"cw", AttackMethod::CW},     {"fga", AttackMethod::FGA},
      {"bpda", AttackMethod::BPDA},
  };
  auto it = table.find(name);
  if (it == table.end()) throw Error("ConfigError", "unknown attack: " + name);
  return it->second;
}

double AttackSpec::sweep_value() const {
  switch (method) {
    case AttackMethod::IFGSM: return epsilon * iterations;
    case AttackMethod::CW: return magnitude_scale;
    default: return epsilon;
  }
}

std::string AttackSpec::to_string() const {
  switch (method) {
    case AttackMethod::None: return "none";
    case AttackMethod::FGSM: return "fgsm";
    case AttackMethod::IFGSM: return "ifgsm(M=" + std::to_string(iterations) + ")";
    case AttackMethod::CW: return "cw(s=" + format_double(magnitude_scale) + ")";
    case AttackMethod::FGA: return "fga";
    case AttackMethod::BPDA: return "bpda";
  }
  return "none";
}

void AttackSpec::validate() const {
  if (epsilon < 0.0) throw Error("ConfigError", "epsilon must be >= 0");
  if (iterations < 1) throw Error("ConfigError", "iterations must be >= 1");
  if (kappa < 0.0) throw Error("ConfigError", "kappa must be >= 0");
  if (lambda_f <= 0.0) throw Error("ConfigError", "lambda_f must be > 0");
  if (cw_steps < 1) throw Error("ConfigError", "cw_steps must be >= 1");
  if (cw_lr <= 0.0) throw Error("ConfigError", "cw_lr must be > 0");
  if (magnitude_scale < 1.0) throw Error("ConfigError", "magnitude_scale must be >= 1");
  if (inner) inner->validate();
  if (defense) defense->validate();
}

ImageTensor run_attack(const Classifier& model, const ImageTensor& x, int y,
                       const AttackSpec& spec, const DefenseSpec* defense_override) {
  switch (spec.method) {
    case AttackMethod::None:
      return x;
    case AttackMethod::FGSM:
      return fgsm(model, x, y, spec.epsilon);
    case AttackMethod::IFGSM:
      return ifgsm(model, x, y, spec.epsilon, spec.iterations);
    case AttackMethod::CW: {
      CwParams params;
      params.kappa = spec.kappa;
      params.lambda_f = spec.lambda_f;
      params.steps = spec.cw_steps;
      params.lr = spec.cw_lr;
      CwResult result = cw_l2(model, x, params);
      if (spec.magnitude_scale != 1.0)
        return scale_perturbation(x, result.adversarial, spec.magnitude_scale);
      return result.adversarial;
    }
    case AttackMethod::FGA: {
      const DefenseSpec* d = defense_override ? defense_override : spec.defense.get();
      DefenseSpec none;
      if (!d) d = &none;
      auto denoiser = make_gradient_denoiser(*d, x.height, x.width, x.channels);
      return fga(model, x, y, spec.epsilon, *denoiser);
    }
    case AttackMethod::BPDA: {
      const DefenseSpec* d = defense_override ? defense_override : spec.defense.get();
      DefenseSpec none;
      if (!d) d = &none;
      return bpda_fgsm(model, x, y, spec.epsilon, make_image_denoiser(*d));
    }
  }
  return x;
}

}  // namespace basisguard
