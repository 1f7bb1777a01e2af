#pragma once

// Finite-difference weight generation (Fornberg's recurrence) and the fixed
// stencil layouts used on the uniform computational grid: centered 5-point
// interior stencils, 6-point biased stencils at the s-edges, and index
// folding for the even symmetry across the poles theta = 0, pi.

#include <Eigen/Dense>

#include <vector>

namespace khx {

/// Weights w(i, d) such that f^(d)(z) ~= sum_i w(i, d) f(xs[i]) for
/// d = 0..max_order, exact on polynomials of degree xs.size()-1
/// (Fornberg's recurrence). Nodes must be pairwise distinct;
/// throws std::invalid_argument otherwise or when max_order < 0 or
/// max_order >= xs.size().
Eigen::MatrixXd fd_weights(const Eigen::VectorXd& xs, double z, int max_order);

/// First- and second-derivative row for one node of a uniform grid with
/// count points and spacing h: node indices and matching weights. Interior
/// nodes (2 <= i <= count-3) get the centered 5-point stencil; nodes within
/// two of an edge get the 6-point one-sided stencil anchored at that edge,
/// keeping the truncation order >= 4 for both derivatives everywhere.
struct StencilRow {
  std::vector<int> nodes;
  Eigen::VectorXd w1;  // first-derivative weights
  Eigen::VectorXd w2;  // second-derivative weights
};

/// Throws std::invalid_argument when count < 6 or i outside 0..count-1.
StencilRow uniform_stencil_row(int count, double h, int i);

/// Reflects an out-of-range index across the ends of 0..count-1
/// (j -> -j at the left end, j -> 2(count-1)-j at the right), implementing
/// the even extension of an axisymmetric field across the poles.
/// Throws std::invalid_argument when the reflection leaves the range
/// (stencil wider than the grid).
int fold_index(int j, int count);

}  // namespace khx
