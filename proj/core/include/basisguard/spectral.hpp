#ifndef BASISGUARD_SPECTRAL_HPP
#define BASISGUARD_SPECTRAL_HPP

#include <array>
#include <complex>
#include <vector>

#include "basisguard/array2d.hpp"
#include "basisguard/image.hpp"

namespace basisguard {

// Unnormalized forward 2D DFT bins; idft2 applies the 1/(H*W) factor.
struct Spectrum2D {
  int height = 0;
  int width = 0;
  std::vector<std::complex<double>> coeffs;  // row-major bins

  std::complex<double>& at(int ky, int kx) {
    return coeffs[static_cast<std::size_t>(ky) * width + kx];
  }
  std::complex<double> at(int ky, int kx) const {
    return coeffs[static_cast<std::size_t>(ky) * width + kx];
  }
};

// Works for any H, W >= 1 (non power-of-two sizes go through Bluestein's
// chirp transform internally).
Spectrum2D dft2(const Array2D& channel);
Array2D idft2_real(const Spectrum2D& spectrum);
std::vector<std::complex<double>> idft2(const Spectrum2D& spectrum);

// Distance of bin (ky, kx) from the zero-frequency bin of the centered
// spectrum, in bin units.
double centered_bin_distance(int ky, int kx, int h, int w);

// Keeps every bin within `radius` of the centered zero frequency, zeroes the
// rest, per color channel. The imaginary residue after inversion must stay
// below 1e-9 (the mask is symmetric, so anything larger indicates a bug).
ImageTensor lowpass_filter(const ImageTensor& img, double radius);

// Fraction of spectral energy inside the disk of given radius (diagnostics
// and property tests).
double retained_energy_fraction(const Array2D& channel, double radius);

// Orthonormal 8x8 DCT-II coefficients.
struct DctBlock {
  std::array<double, 64> c{};
  double& at(int u, int v) { return c[static_cast<std::size_t>(u) * 8 + v]; }
  double at(int u, int v) const { return c[static_cast<std::size_t>(u) * 8 + v]; }
};

DctBlock dct8_forward(const std::array<double, 64>& block);
std::array<double, 64> dct8_inverse(const DctBlock& block);

}  // namespace basisguard

#endif
