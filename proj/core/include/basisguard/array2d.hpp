#ifndef BASISGUARD_ARRAY2D_HPP
#define BASISGUARD_ARRAY2D_HPP

#include <vector>

namespace basisguard {

// Dense row-major 2D array of doubles. Used for single image channels,
// wavelet bands and data matrices.
struct Array2D {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Array2D() = default;
  Array2D(int r, int c, double fill = 0.0)
      : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, fill) {}

  double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const {
    return v[static_cast<std::size_t>(r) * cols + c];
  }
  std::size_t size() const { return v.size(); }
};

}  // namespace basisguard

#endif
