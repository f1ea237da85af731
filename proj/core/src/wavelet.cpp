#include "basisguard/wavelet.hpp"

#include <algorithm>
#include <cmath>

#include "basisguard/error.hpp"

namespace basisguard {

namespace {

// Composite analysis+synthesis delay of the product filter; for the
// length-4 symmetric banks handled here the product filter is centered at
// tap 3.
constexpr int kDelay = 3;

void check_bank(const FilterBank& bank) {
  const auto sym = [](const std::vector<double>& f, double sign) {
    if (f.size() != 4) return false;
    return std::fabs(f[0] - sign * f[3]) < 1e-12 &&
           std::fabs(f[1] - sign * f[2]) < 1e-12;
  };
  if (!sym(bank.dec_lo, 1.0) || !sym(bank.rec_lo, 1.0) ||
      !sym(bank.dec_hi, -1.0) || !sym(bank.rec_hi, -1.0))
    throw Error("UnsupportedBank",
                "filter bank must be length-4 half-sample (anti)symmetric");
}

// x extended to period 2n by mirroring: [x0..x_{n-1}, x_{n-1}..x0].
double ext_at(const std::vector<double>& x, long j) {
  const long n = static_cast<long>(x.size());
  j %= 2 * n;
  if (j < 0) j += 2 * n;
  return j < n ? x[j] : x[2 * n - 1 - j];
}

}  // namespace

const FilterBank& bior31() {
  static const FilterBank bank = [] {
    const double s2 = std::sqrt(2.0);
    FilterBank b;
    b.dec_lo = {-s2 / 4.0, 3.0 * s2 / 4.0, 3.0 * s2 / 4.0, -s2 / 4.0};
    b.dec_hi = {-s2 / 8.0, 3.0 * s2 / 8.0, -3.0 * s2 / 8.0, s2 / 8.0};
    b.rec_lo = {s2 / 8.0, 3.0 * s2 / 8.0, 3.0 * s2 / 8.0, s2 / 8.0};
    b.rec_hi = {-s2 / 4.0, -3.0 * s2 / 4.0, 3.0 * s2 / 4.0, s2 / 4.0};
    return b;
  }();
  return bank;
}

// The mirrored signal is symmetric about sample -1/2, so the even-phase
// downsampled lowpass satisfies a[i] = a[(1-i) mod n] and the highpass
// d[i] = -d[(1-i) mod n]. Only one representative per orbit is stored:
// approx keeps indices 1..ceil(n/2), detail keeps {0} + 2..floor(n/2)
// (the fixed point of the detail symmetry at odd n is structurally zero).
void dwt1(const std::vector<double>& x, const FilterBank& bank,
          std::vector<double>& approx, std::vector<double>& detail) {
  check_bank(bank);
  const long n = static_cast<long>(x.size());
  if (n < 1) throw Error("BadSize", "dwt1 needs a non-empty signal");
  const long na = (n + 1) / 2, nd = n / 2;
  approx.resize(na);
  detail.resize(nd);
  auto filtered = [&](const std::vector<double>& f, long m) {
    double acc = 0.0;
    for (long k = 0; k < 4; ++k) acc += f[k] * ext_at(x, m - k);
    return acc;
  };
  for (long j = 0; j < na; ++j) approx[j] = filtered(bank.dec_lo, 2 * ((1 + j) % n));
  if (nd > 0) {
    detail[0] = filtered(bank.dec_hi, 0);
    for (long j = 2; j <= nd; ++j) detail[j - 1] = filtered(bank.dec_hi, 2 * j);
  }
}

std::vector<double> idwt1(const std::vector<double>& approx,
                          const std::vector<double>& detail, int n,
                          const FilterBank& bank) {
  check_bank(bank);
  const long ln = n;
  const long na = (ln + 1) / 2, nd = ln / 2;
  if (static_cast<long>(approx.size()) != na ||
      static_cast<long>(detail.size()) != nd)
    throw Error("ShapeMismatch", "idwt1 band sizes do not match n");

  // Re-expand the stored representatives to the full period-n subbands.
  std::vector<double> a_full(ln), d_full(ln, 0.0);
  for (long i = 0; i < ln; ++i) {
    long j = (1 <= i && i <= na) ? i : ((1 - i) % ln + ln) % ln;
    if (j == 0) j = ln;  // representative indices live in 1..na (mod n)
    a_full[i] = approx[j - 1];
  }
  for (long i = 0; i < ln && nd > 0; ++i) {
    if (i == 0) d_full[i] = detail[0];
    else if (i == 1) d_full[i] = -detail[0];
    else if (i <= nd) d_full[i] = detail[i - 1];
    else {
      long ip = ((1 - i) % ln + ln) % ln;
      d_full[i] = ip == i ? 0.0 : -(ip == 0 ? detail[0] : detail[ip - 1]);
    }
  }

  // Upsample, filter with the synthesis pair over period 2n, undo the delay.
  const long N = 2 * ln;
  std::vector<double> recon(N, 0.0);
  for (long i = 0; i < ln; ++i) {
    double av = a_full[i], dv = d_full[i];
    for (long k = 0; k < 4; ++k) {
      long m = (2 * i + k) % N;
      recon[m] += bank.rec_lo[k] * av + bank.rec_hi[k] * dv;
    }
  }
  std::vector<double> out(ln);
  for (long j = 0; j < ln; ++j) out[j] = recon[(j + kDelay) % N];
  return out;
}

namespace {

WaveletBands dwt2_single(const Array2D& in, const FilterBank& bank) {
  const int h = in.rows, w = in.cols;
  const int aw = (w + 1) / 2, dw = w / 2;
  const int ah = (h + 1) / 2, dh = h / 2;

  // Along rows (x axis) first.
  Array2D low(h, aw), high(h, dw);
  std::vector<double> line(w), a, d;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) line[c] = in.at(r, c);
    dwt1(line, bank, a, d);
    for (int c = 0; c < aw; ++c) low.at(r, c) = a[c];
    for (int c = 0; c < dw; ++c) high.at(r, c) = d[c];
  }

  WaveletBands bands;
  bands.input_rows = h;
  bands.input_cols = w;
  bands.ll = Array2D(ah, aw);
  bands.lh = Array2D(dh, aw);
  bands.hl = Array2D(ah, dw);
  bands.hh = Array2D(dh, dw);

  std::vector<double> col(h);
  for (int c = 0; c < aw; ++c) {
    for (int r = 0; r < h; ++r) col[r] = low.at(r, c);
    dwt1(col, bank, a, d);
    for (int r = 0; r < ah; ++r) bands.ll.at(r, c) = a[r];
    for (int r = 0; r < dh; ++r) bands.lh.at(r, c) = d[r];
  }
  for (int c = 0; c < dw; ++c) {
    for (int r = 0; r < h; ++r) col[r] = high.at(r, c);
    dwt1(col, bank, a, d);
    for (int r = 0; r < ah; ++r) bands.hl.at(r, c) = a[r];
    for (int r = 0; r < dh; ++r) bands.hh.at(r, c) = d[r];
  }
  return bands;
}

Array2D idwt2_single(const Array2D& ll, const WaveletPyramid::Detail& det,
                     const FilterBank& bank) {
  const int h = det.input_rows, w = det.input_cols;
  const int aw = (w + 1) / 2, dw = w / 2;

  // Invert columns of the low and high row-bands.
  Array2D low(h, aw), high(h, dw);
  std::vector<double> a((h + 1) / 2), d(h / 2);
  for (int c = 0; c < aw; ++c) {
    for (int r = 0; r < (h + 1) / 2; ++r) a[r] = ll.at(r, c);
    for (int r = 0; r < h / 2; ++r) d[r] = det.lh.at(r, c);
    std::vector<double> col = idwt1(a, d, h, bank);
    for (int r = 0; r < h; ++r) low.at(r, c) = col[r];
  }
  for (int c = 0; c < dw; ++c) {
    for (int r = 0; r < (h + 1) / 2; ++r) a[r] = det.hl.at(r, c);
    for (int r = 0; r < h / 2; ++r) d[r] = det.hh.at(r, c);
    std::vector<double> col = idwt1(a, d, h, bank);
    for (int r = 0; r < h; ++r) high.at(r, c) = col[r];
  }

  Array2D out(h, w);
  std::vector<double> ra(aw), rd(dw);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < aw; ++c) ra[c] = low.at(r, c);
    for (int c = 0; c < dw; ++c) rd[c] = high.at(r, c);
    std::vector<double> row = idwt1(ra, rd, w, bank);
    for (int c = 0; c < w; ++c) out.at(r, c) = row[c];
  }
  return out;
}

}  // namespace

WaveletPyramid dwt2(const Array2D& channel, int levels, const FilterBank& bank) {
  if (levels < 1) throw Error("BadLevels", "levels must be >= 1");
  int min_dim = std::min(channel.rows, channel.cols);
  if ((min_dim >> levels) < 1)
    throw Error("TooManyLevels", "image too small for requested level count");

  WaveletPyramid pyr;
  pyr.levels = levels;
  Array2D cur = channel;
  for (int l = 0; l < levels; ++l) {
    WaveletBands bands = dwt2_single(cur, bank);
    WaveletPyramid::Detail det;
    det.lh = std::move(bands.lh);
    det.hl = std::move(bands.hl);
    det.hh = std::move(bands.hh);
    det.input_rows = bands.input_rows;
    det.input_cols = bands.input_cols;
    pyr.details.push_back(std::move(det));
    cur = std::move(bands.ll);
  }
  pyr.approx = std::move(cur);
  return pyr;
}

Array2D idwt2(const WaveletPyramid& pyramid, const FilterBank& bank) {
  Array2D cur = pyramid.approx;
  for (int l = pyramid.levels - 1; l >= 0; --l)
    cur = idwt2_single(cur, pyramid.details[l], bank);
  return cur;
}

double soft_threshold(double c, double t) {
  if (t < 0.0) throw Error("BadThreshold", "threshold must be nonnegative");
  double mag = std::fabs(c) - t;
  if (mag <= 0.0) return 0.0;
  return c < 0.0 ? -mag : mag;
}

double estimate_sigma(const WaveletPyramid& pyramid) {
  if (pyramid.details.empty()) throw Error("EmptyBand", "pyramid has no detail bands");
  const Array2D& hh1 = pyramid.details[0].hh;
  if (hh1.v.empty()) throw Error("EmptyBand", "finest diagonal band is empty");
  std::vector<double> mags(hh1.v.size());
  for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = std::fabs(hh1.v[i]);
  std::sort(mags.begin(), mags.end());
  std::size_t n = mags.size();
  double median = n % 2 == 1 ? mags[n / 2] : 0.5 * (mags[n / 2 - 1] + mags[n / 2]);
  return median / 0.6745;
}

ImageTensor wavelet_approx_defense(const ImageTensor& img, int levels) {
  const FilterBank& bank = bior31();
  // Per-level 2D gain for a bank with sum(dec_lo) = sqrt(2) is 2; rescaling
  // keeps the approximation image in intensity range before the final clip.
  const double gain = std::pow(2.0, -levels);
  ImageTensor out(img.height, img.width, img.channels);
  for (int c = 0; c < img.channels; ++c) {
    WaveletPyramid pyr = dwt2(extract_channel(img, c), levels, bank);
    Array2D approx = pyr.approx;
    for (double& v : approx.v) v *= gain;
    insert_channel(out, c, resize_bicubic_plane(approx, img.height, img.width));
  }
  return clip(out);
}

ImageTensor soft_threshold_defense(const ImageTensor& img, int levels) {
  const FilterBank& bank = bior31();
  ImageTensor out(img.height, img.width, img.channels);
  const double n_pixels = static_cast<double>(img.height) * img.width;
  for (int c = 0; c < img.channels; ++c) {
    WaveletPyramid pyr = dwt2(extract_channel(img, c), levels, bank);
    double t = estimate_sigma(pyr) * std::sqrt(2.0 * std::log(n_pixels));
    for (auto& det : pyr.details) {
      for (double& v : det.lh.v) v = soft_threshold(v, t);
      for (double& v : det.hl.v) v = soft_threshold(v, t);
      for (double& v : det.hh.v) v = soft_threshold(v, t);
    }
    insert_channel(out, c, idwt2(pyr, bank));
  }
  return clip(out);
}

}  // namespace basisguard
