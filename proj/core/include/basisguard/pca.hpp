#ifndef BASISGUARD_PCA_HPP
#define BASISGUARD_PCA_HPP

#include <vector>

#include "basisguard/array2d.hpp"
#include "basisguard/image.hpp"

namespace basisguard {

// Top-k eigenvectors of the centered covariance, columns ordered by
// descending eigenvalue, each column's largest-magnitude entry made
// positive (ties broken toward the lowest index) so results are
// reproducible across runs.
struct PcaBasis {
  std::vector<double> mean_row;  // length d
  Array2D components;            // d x k, orthonormal columns
  int retained = 0;
  std::vector<double> eigenvalues;  // descending, length d (diagnostics)
};

PcaBasis pca_fit(const Array2D& data, int k);

// Reconstruction mean + (X - mean) U U^T of a single data matrix.
Array2D pca_reconstruct(const Array2D& data, const PcaBasis& basis);

// Per channel: rows of the HxW plane are the data points.
ImageTensor pca_denoise_rows(const ImageTensor& img, int k);

// Per channel: non-overlapping patch x patch tiles (bottom/right partial
// tiles are padded by edge replication and cropped after reconstruction),
// each tile flattened row-major into one data row.
ImageTensor pca_denoise_patches(const ImageTensor& img, int patch, int k);

}  // namespace basisguard

#endif
