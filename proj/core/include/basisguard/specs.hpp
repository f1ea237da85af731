#ifndef BASISGUARD_SPECS_HPP
#define BASISGUARD_SPECS_HPP

#include <memory>
#include <string>

#include "basisguard/attacks.hpp"
#include "basisguard/image.hpp"

namespace basisguard {

enum class DefenseMethod {
  None,
  LowPass,
  PcaRows,
  PcaPatches,
  Jpeg,
  WaveletApprox,
  SoftThreshold,
};

// Method plus hyperparameters. Defaults follow the reference tuning for
// 299x299 inputs; `radius` is interpreted on that reference scale and the
// effective radius is radius * min(H, W) / 299 at apply time, so the same
// spec transfers to smaller images.
struct DefenseSpec {
  DefenseMethod method = DefenseMethod::None;
  double radius = 65.0;  // LowPass
  int k = 36;            // PcaRows / PcaPatches retained components
  int patch = 13;        // PcaPatches tile side
  int quality = 23;      // Jpeg
  int levels = 1;        // WaveletApprox / SoftThreshold

  std::string to_string() const;
  static DefenseSpec from_string(const std::string& text);

  // Structural and shape preconditions; throws "ConfigError".
  void validate() const;
  void validate_for(int h, int w, int c) const;
};

const char* defense_method_name(DefenseMethod m);
DefenseMethod defense_method_from_name(const std::string& name);

ImageTensor apply_defense(const DefenseSpec& spec, const ImageTensor& img);
ImageDenoiser make_image_denoiser(const DefenseSpec& spec);

// Gradient-side view of a defense for the filtered gradient attack: exact
// basis projectors where the defense is one (low-pass, wavelet
// approximation, none), the rescaling adapter otherwise.
std::unique_ptr<GradientDenoiser> make_gradient_denoiser(const DefenseSpec& spec,
                                                         int h, int w, int c);
bool defense_is_projector(DefenseMethod m);

enum class AttackMethod { None, FGSM, IFGSM, CW, FGA, BPDA };

struct AttackSpec {
  AttackMethod method = AttackMethod::FGSM;
  double epsilon = 0.02;       // l_inf step
  int iterations = 10;         // IFGSM only
  double kappa = 0.0;          // CW margin
  double lambda_f = 0.02;      // CW trade-off
  int cw_steps = 100;
  double cw_lr = 0.01;
  double magnitude_scale = 1.0;  // CW post-scaling, >= 1
  std::shared_ptr<AttackSpec> inner;   // base attack for FGA/BPDA (FGSM here)
  std::shared_ptr<DefenseSpec> defense;  // FGA filter / BPDA denoiser

  // Value a sweep varies: epsilon for FGSM, step*M for IFGSM, the
  // perturbation scale for CW.
  double sweep_value() const;
  std::string to_string() const;
  void validate() const;
};

const char* attack_method_name(AttackMethod m);
AttackMethod attack_method_from_name(const std::string& name);

// Runs one attack on one example. FGA/BPDA use spec.defense; pass
// `defense_override` to attack a specific defense (white-box runs).
ImageTensor run_attack(const Classifier& model, const ImageTensor& x, int y,
                       const AttackSpec& spec,
                       const DefenseSpec* defense_override = nullptr);

}  // namespace basisguard

#endif
