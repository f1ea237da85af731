#include "basisguard/pca.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "basisguard/error.hpp"

namespace basisguard {

PcaBasis pca_fit(const Array2D& data, int k) {
  const int n = data.rows, d = data.cols;
  if (k < 1 || k > std::min(n, d))
    throw Error("RankOutOfRange", "k must be in [1, min(n, d)]");

  Eigen::MatrixXd x(n, d);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < d; ++c) x(r, c) = data.at(r, c);

  Eigen::RowVectorXd mean = x.colwise().mean();
  Eigen::MatrixXd centered = x.rowwise() - mean;
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n);

  // Deterministic dense symmetric decomposition; eigenvalues come back
  // ascending.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success)
    throw Error("EigenFailure", "symmetric eigendecomposition failed");

  PcaBasis basis;
  basis.retained = k;
  basis.mean_row.assign(mean.data(), mean.data() + d);
  basis.eigenvalues.resize(d);
  for (int i = 0; i < d; ++i) basis.eigenvalues[i] = solver.eigenvalues()(d - 1 - i);

  basis.components = Array2D(d, k);
  for (int j = 0; j < k; ++j) {
    Eigen::VectorXd col = solver.eigenvectors().col(d - 1 - j);
    int arg = 0;
    double best = -1.0;
    for (int i = 0; i < d; ++i) {
      double m = std::fabs(col(i));
      if (m > best) {
        best = m;
        arg = i;
      }
    }
    if (col(arg) < 0.0) col = -col;
    for (int i = 0; i < d; ++i) basis.components.at(i, j) = col(i);
  }
  return basis;
}

Array2D pca_reconstruct(const Array2D& data, const PcaBasis& basis) {
  const int n = data.rows, d = data.cols, k = basis.retained;
  if (static_cast<int>(basis.mean_row.size()) != d)
    throw Error("ShapeMismatch", "basis dimension does not match data");

  Eigen::MatrixXd x(n, d);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < d; ++c) x(r, c) = data.at(r, c);
  Eigen::RowVectorXd mean(d);
  for (int c = 0; c < d; ++c) mean(c) = basis.mean_row[c];
  Eigen::MatrixXd u(d, k);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < k; ++c) u(r, c) = basis.components.at(r, c);

  Eigen::MatrixXd centered = x.rowwise() - mean;
  Eigen::MatrixXd recon = (centered * u) * u.transpose();
  recon.rowwise() += mean;

  Array2D out(n, d);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < d; ++c) out.at(r, c) = recon(r, c);
  return out;
}

ImageTensor pca_denoise_rows(const ImageTensor& img, int k) {
  if (k < 1 || k > std::min(img.height, img.width))
    throw Error("RankOutOfRange", "k must be in [1, min(H, W)]");
  ImageTensor out(img.height, img.width, img.channels);
  for (int c = 0; c < img.channels; ++c) {
    Array2D plane = extract_channel(img, c);
    PcaBasis basis = pca_fit(plane, k);
    insert_channel(out, c, pca_reconstruct(plane, basis));
  }
  return clip(out);
}

namespace {

Array2D pad_edge(const Array2D& in, int new_rows, int new_cols) {
  Array2D out(new_rows, new_cols);
  for (int r = 0; r < new_rows; ++r) {
    int sr = std::min(r, in.rows - 1);
    for (int c = 0; c < new_cols; ++c)
      out.at(r, c) = in.at(sr, std::min(c, in.cols - 1));
  }
  return out;
}

}  // namespace

ImageTensor pca_denoise_patches(const ImageTensor& img, int patch, int k) {
  if (patch < 1 || patch > std::min(img.height, img.width))
    throw Error("RankOutOfRange", "patch must be in [1, min(H, W)]");
  if (k < 1 || k > patch * patch)
    throw Error("RankOutOfRange", "k must be in [1, patch^2]");

  const int tiles_y = (img.height + patch - 1) / patch;
  const int tiles_x = (img.width + patch - 1) / patch;
  const int n = tiles_y * tiles_x, d = patch * patch;
  if (k > std::min(n, d))
    throw Error("RankOutOfRange", "k exceeds the number of patches");

  ImageTensor out(img.height, img.width, img.channels);
  for (int ch = 0; ch < img.channels; ++ch) {
    Array2D padded = pad_edge(extract_channel(img, ch), tiles_y * patch, tiles_x * patch);
    Array2D data(n, d);
    for (int ty = 0; ty < tiles_y; ++ty)
      for (int tx = 0; tx < tiles_x; ++tx) {
        int row = ty * tiles_x + tx;
        for (int py = 0; py < patch; ++py)
          for (int px = 0; px < patch; ++px)
            data.at(row, py * patch + px) = padded.at(ty * patch + py, tx * patch + px);
      }
    PcaBasis basis = pca_fit(data, k);
    Array2D recon = pca_reconstruct(data, basis);
    Array2D plane(img.height, img.width);
    for (int ty = 0; ty < tiles_y; ++ty)
      for (int tx = 0; tx < tiles_x; ++tx) {
        int row = ty * tiles_x + tx;
        for (int py = 0; py < patch; ++py) {
          int y = ty * patch + py;
          if (y >= img.height) break;
          for (int px = 0; px < patch; ++px) {
            int x = tx * patch + px;
            if (x >= img.width) break;
            plane.at(y, x) = recon.at(row, py * patch + px);
          }
        }
      }
    insert_channel(out, ch, plane);
  }
  return clip(out);
}

}  // namespace basisguard
