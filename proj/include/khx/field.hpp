#pragma once

// Nodal solution field on an AnnulusGrid: values, 4th-order finite
// difference reconstruction of physical derivatives (axisymmetric, with
// even reflection across the poles), Hessian eigenvalues per node, and a
// deterministic dump/load format.

#include "khx/grid.hpp"

#include <optional>
#include <string>

namespace khx {

class SolutionField {
 public:
  explicit SolutionField(AnnulusGrid grid);

  const AnnulusGrid& grid() const { return grid_; }
  Eigen::MatrixXd& values() { return values_; }
  const Eigen::MatrixXd& values() const { return values_; }
  double value(int i, int j) const { return values_(i, j); }

  /// Physical derivatives at node (i, j): centered 5-point stencils in the
  /// interior, 6-point edge-biased stencils in s, pole folding in theta
  /// (even extension), composed with the grid chain rule. Truncation order
  /// 4 in both directions.
  struct Derivs {
    double u = 0.0;
    double ur = 0.0;
    double utheta = 0.0;
    double urr = 0.0;
    double urtheta = 0.0;
    double uthetatheta = 0.0;
  };
  Derivs reconstruct(int i, int j) const;

  /// Hessian spectrum at a node via axisym_hessian_eigs.
  Spectrum hessian_eigenvalues(int i, int j) const;

  /// |grad u| at node (i, j) = sqrt(U_r^2 + (U_theta / r)^2).
  double gradient_norm(int i, int j) const;

  /// Asymptotic constant carried from a continuation/extrapolation pass;
  /// consumers prefer it to a fresh window fit when present.
  std::optional<double> gamma_override;

  /// Extrapolated |grad u| profile on the inner boundary, one entry per
  /// theta node; consumers prefer it to the one-sided reconstruction.
  std::optional<Eigen::VectorXd> boundary_gradient_override;

  /// Serializes to a text header followed by a raw payload:
  ///   khx-field 1
  ///   n/k/R/eps/C0/C1/b_R/grading/coeffs/ns/ntheta lines (%.17g numbers)
  ///   gamma <value|none>
  ///   boundary_gradient <0|ntheta>
  ///   payload float64 little-endian row-major
  /// then ns*ntheta doubles (s-major) and, if flagged, ntheta doubles of
  /// the boundary-gradient profile. Byte-stable across runs.
  void dump(const std::string& path) const;

  /// Inverse of dump. Throws std::runtime_error on malformed input.
  static SolutionField load(const std::string& path);

 private:
  AnnulusGrid grid_;
  Eigen::MatrixXd values_;
};

}  // namespace khx
