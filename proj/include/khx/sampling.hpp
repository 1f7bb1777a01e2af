#pragma once

// Deterministic random sampling for the property suites: Gaussian-shell
// rejection into Garding cones, boundary-biased spectra near S_k = 0, and
// admissible adapted-frame configurations for the Kato suite.

#include "khx/symfun.hpp"

#include <cstdint>
#include <random>

namespace khx {

/// Seeded generator with explicit transforms (mt19937_64 bits, hand-rolled
/// Box-Muller) so identical seeds reproduce identical streams across
/// platforms; std::*_distribution is implementation-defined and avoided.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Standard normal via Box-Muller on the uniform stream.
  double normal();

  /// Uniform integer in [0, m).
  uint64_t integer(uint64_t m);

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Spectrum drawn from a Gaussian shell (unit direction scaled into
/// [0.5, 2]) and rejected into the open cone Gamma_k. When boundary_biased,
/// the accepted spectrum is slid along the diagonal direction toward the
/// S_k = 0 surface (bisection on t in lambda + t*ones), stopping at a small
/// interior margin; inequality equality cases live on that boundary.
Spectrum sample_gamma_k(Rng& rng, int n, int k, bool boundary_biased = false);

/// Admissible Kato configuration: lambda' Gaussian-shell rejected into the
/// open cone of degree k-1 with S_{k-1}(lambda') > 0, mixed entries normal
/// with a randomly chosen spread, u_nn resolved from the S_k = 0 frame
/// relation, and the full arrow matrix rejected unless its spectrum lies in
/// the closed cone Gamma_k. Loops internally until a sample is accepted.
KatoConfig sample_kato(Rng& rng, int n, int k);

}  // namespace khx
