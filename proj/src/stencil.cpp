#include "khx/stencil.hpp"

#include <algorithm>
#include <stdexcept>

namespace khx {

Eigen::MatrixXd fd_weights(const Eigen::VectorXd& xs, double z, int max_order) {
  const int count = static_cast<int>(xs.size());
  if (max_order < 0 || max_order >= count) {
    throw std::invalid_argument("fd_weights: need 0 <= max_order < node count");
  }
  for (int i = 0; i < count; ++i) {
    for (int j = i + 1; j < count; ++j) {
      if (xs[i] == xs[j]) {
        throw std::invalid_argument("fd_weights: repeated node");
      }
    }
  }
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(count, max_order + 1);
  double c1 = 1.0;
  double c4 = xs[0] - z;
  C(0, 0) = 1.0;
  for (int i = 1; i < count; ++i) {
    const int mn = std::min(i, max_order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int v = mn; v >= 1; --v) {
          C(i, v) = c1 * (v * C(i - 1, v - 1) - c5 * C(i - 1, v)) / c2;
        }
        C(i, 0) = -c1 * c5 * C(i - 1, 0) / c2;
      }
      for (int v = mn; v >= 1; --v) {
        C(j, v) = (c4 * C(j, v) - v * C(j, v - 1)) / c3;
      }
      C(j, 0) = c4 * C(j, 0) / c3;
    }
    c1 = c2;
  }
  return C;
}

StencilRow uniform_stencil_row(int count, double h, int i) {
  if (count < 6) {
    throw std::invalid_argument("uniform_stencil_row: need at least 6 nodes");
  }
  if (i < 0 || i >= count) {
    throw std::invalid_argument("uniform_stencil_row: index out of range");
  }
  StencilRow row;
  int first;
  int width;
  if (i >= 2 && i <= count - 3) {
    first = i - 2;
    width = 5;
  } else if (i < 2) {
    first = 0;
    width = 6;
  } else {
    first = count - 6;
    width = 6;
  }
  row.nodes.resize(static_cast<size_t>(width));
  Eigen::VectorXd xs(width);
  for (int m = 0; m < width; ++m) {
    row.nodes[static_cast<size_t>(m)] = first + m;
    xs[m] = (first + m) * h;
  }
  const Eigen::MatrixXd W = fd_weights(xs, i * h, 2);
  row.w1 = W.col(1);
  row.w2 = W.col(2);
  return row;
}

int fold_index(int j, int count) {
  if (j < 0) j = -j;
  if (j >= count) j = 2 * (count - 1) - j;
  if (j < 0 || j >= count) {
    throw std::invalid_argument("fold_index: stencil wider than the grid");
  }
  return j;
}

}  // namespace khx
