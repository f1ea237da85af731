#include "basisguard/spectral.hpp"

#include <cmath>

#include "basisguard/error.hpp"

namespace basisguard {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

using cd = std::complex<double>;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey, in place. n must be a power of two.
void fft_pow2(std::vector<cd>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    cd wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cd w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        cd u = a[i + j];
        cd v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse)
    for (cd& x : a) x /= static_cast<double>(n);
}

// Bluestein's chirp transform: expresses a length-n DFT as a power-of-two
// circular convolution, so arbitrary (including prime) sizes are supported.
void fft_bluestein(std::vector<cd>& a, bool inverse) {
  const std::size_t n = a.size();
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;

  std::vector<cd> chirp(n);
  for (std::size_t i = 0; i < n; ++i) {
    // i^2 mod 2n keeps the angle argument small for large n.
    std::size_t sq = (i * i) % (2 * n);
    double ang = kPi * static_cast<double>(sq) / static_cast<double>(n);
    if (!inverse) ang = -ang;
    chirp[i] = cd(std::cos(ang), std::sin(ang));
  }

  std::vector<cd> x(m, cd(0, 0)), y(m, cd(0, 0));
  for (std::size_t i = 0; i < n; ++i) x[i] = a[i] * chirp[i];
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = std::conj(chirp[i]);
    if (i != 0) y[m - i] = std::conj(chirp[i]);
  }
  fft_pow2(x, false);
  fft_pow2(y, false);
  for (std::size_t i = 0; i < m; ++i) x[i] *= y[i];
  fft_pow2(x, true);
  for (std::size_t i = 0; i < n; ++i) a[i] = x[i] * chirp[i];
  if (inverse)
    for (cd& v : a) v /= static_cast<double>(n);
}

void fft(std::vector<cd>& a, bool inverse) {
  if (a.size() <= 1) return;
  if (is_pow2(a.size())) fft_pow2(a, inverse);
  else fft_bluestein(a, inverse);
}

// Row-column decomposition over a row-major complex grid.
void fft2_inplace(std::vector<cd>& grid, int h, int w, bool inverse) {
  std::vector<cd> line;
  line.resize(w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) line[c] = grid[static_cast<std::size_t>(r) * w + c];
    fft(line, inverse);
    for (int c = 0; c < w; ++c) grid[static_cast<std::size_t>(r) * w + c] = line[c];
  }
  line.resize(h);
  for (int c = 0; c < w; ++c) {
    for (int r = 0; r < h; ++r) line[r] = grid[static_cast<std::size_t>(r) * w + c];
    fft(line, inverse);
    for (int r = 0; r < h; ++r) grid[static_cast<std::size_t>(r) * w + c] = line[r];
  }
}

}  // namespace

Spectrum2D dft2(const Array2D& channel) {
  if (channel.rows < 1 || channel.cols < 1)
    throw Error("BadSize", "dft2 needs a non-empty channel");
  Spectrum2D s;
  s.height = channel.rows;
  s.width = channel.cols;
  s.coeffs.assign(channel.v.begin(), channel.v.end());
  fft2_inplace(s.coeffs, s.height, s.width, false);
  return s;
}

std::vector<std::complex<double>> idft2(const Spectrum2D& spectrum) {
  std::vector<cd> grid = spectrum.coeffs;
  fft2_inplace(grid, spectrum.height, spectrum.width, true);
  return grid;
}

Array2D idft2_real(const Spectrum2D& spectrum) {
  std::vector<cd> grid = idft2(spectrum);
  Array2D out(spectrum.height, spectrum.width);
  for (std::size_t i = 0; i < grid.size(); ++i) out.v[i] = grid[i].real();
  return out;
}

double centered_bin_distance(int ky, int kx, int h, int w) {
  int dy = std::min(ky, h - ky);
  int dx = std::min(kx, w - kx);
  return std::sqrt(static_cast<double>(dy) * dy + static_cast<double>(dx) * dx);
}

ImageTensor lowpass_filter(const ImageTensor& img, double radius) {
  if (radius <= 0.0) throw Error("BadRadius", "radius must be positive");
  ImageTensor out(img.height, img.width, img.channels);
  for (int ch = 0; ch < img.channels; ++ch) {
    Spectrum2D s = dft2(extract_channel(img, ch));
    for (int ky = 0; ky < s.height; ++ky)
      for (int kx = 0; kx < s.width; ++kx)
        if (centered_bin_distance(ky, kx, s.height, s.width) > radius)
          s.at(ky, kx) = 0.0;
    std::vector<cd> grid = idft2(s);
    double max_imag = 0.0;
    Array2D plane(img.height, img.width);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      max_imag = std::max(max_imag, std::fabs(grid[i].imag()));
      plane.v[i] = grid[i].real();
    }
    if (max_imag >= 1e-9)
      throw Error("NonRealResult", "imaginary residue after low-pass inversion");
    insert_channel(out, ch, plane);
  }
  return clip(out);
}

double retained_energy_fraction(const Array2D& channel, double radius) {
  Spectrum2D s = dft2(channel);
  double total = 0.0, kept = 0.0;
  for (int ky = 0; ky < s.height; ++ky)
    for (int kx = 0; kx < s.width; ++kx) {
      double e = std::norm(s.at(ky, kx));
      total += e;
      if (centered_bin_distance(ky, kx, s.height, s.width) <= radius) kept += e;
    }
  return total == 0.0 ? 1.0 : kept / total;
}

namespace {

// Basis matrix of the orthonormal DCT-II: row u, column x.
const std::array<double, 64>& dct_basis() {
  static const std::array<double, 64> m = [] {
    std::array<double, 64> b{};
    for (int u = 0; u < 8; ++u) {
      double alpha = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int x = 0; x < 8; ++x)
        b[static_cast<std::size_t>(u) * 8 + x] =
            alpha * std::cos((2.0 * x + 1.0) * u * kPi / 16.0);
    }
    return b;
  }();
  return m;
}

}  // namespace

DctBlock dct8_forward(const std::array<double, 64>& block) {
  const auto& m = dct_basis();
  // tmp = M * block (transform columns), out = tmp * M^T (transform rows).
  std::array<double, 64> tmp{};
  for (int u = 0; u < 8; ++u)
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int y = 0; y < 8; ++y) acc += m[u * 8 + y] * block[y * 8 + x];
      tmp[u * 8 + x] = acc;
    }
  DctBlock out;
  for (int u = 0; u < 8; ++u)
    for (int v = 0; v < 8; ++v) {
      double acc = 0.0;
      for (int x = 0; x < 8; ++x) acc += tmp[u * 8 + x] * m[v * 8 + x];
      out.at(u, v) = acc;
    }
  return out;
}

std::array<double, 64> dct8_inverse(const DctBlock& block) {
  const auto& m = dct_basis();
  std::array<double, 64> tmp{};
  for (int y = 0; y < 8; ++y)
    for (int v = 0; v < 8; ++v) {
      double acc = 0.0;
      for (int u = 0; u < 8; ++u) acc += m[u * 8 + y] * block.at(u, v);
      tmp[y * 8 + v] = acc;
    }
  std::array<double, 64> out{};
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int v = 0; v < 8; ++v) acc += tmp[y * 8 + v] * m[v * 8 + x];
      out[y * 8 + x] = acc;
    }
  return out;
}

}  // namespace basisguard
