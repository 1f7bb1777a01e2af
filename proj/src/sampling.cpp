#include "khx/sampling.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace khx {

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller; u1 in (0,1] so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double mag = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * std::numbers::pi * u2;
  spare_ = mag * std::sin(ang);
  have_spare_ = true;
  return mag * std::cos(ang);
}

uint64_t Rng::integer(uint64_t m) {
  if (m == 0) throw std::domain_error("Rng::integer: m must be positive");
  // Rejection to keep the draw exactly uniform.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % m;
  uint64_t x;
  do {
    x = gen_();
  } while (x >= limit);
  return x % m;
}

Spectrum sample_gamma_k(Rng& rng, int n, int k, bool boundary_biased) {
  if (n < 2 || k < 1 || k > n) {
    throw std::domain_error("sample_gamma_k: need n >= 2, 1 <= k <= n");
  }
  for (;;) {
    Spectrum lam(n);
    for (int i = 0; i < n; ++i) lam[i] = rng.normal();
    const double nrm = lam.norm();
    if (nrm == 0.0) continue;
    lam *= rng.uniform(0.5, 2.0) / nrm;
    if (!in_gamma_k(lam, k, /*strict=*/true)) continue;
    if (!boundary_biased) return lam;

    // Slide along lambda + t*ones toward S_k = 0. Inside Gamma_k the first
    // S_m to vanish as t decreases is S_k, so a point just inside the first
    // crossing stays in the closure of every lower cone. The crossing is
    // located by a fine downward walk: for even k the polynomial
    // S_k(lambda + t) turns positive again past the far root, so a coarse
    // doubling search can jump over the negative window entirely.
    const double span = 4.0 * (1.0 + lam.cwiseAbs().maxCoeff());
    const int steps = 4096;
    double t_in = 0.0;
    double t_out = 0.0;
    bool bracketed = false;
    for (int i = 1; i <= steps; ++i) {
      const double t = -span * i / steps;
      if (elem_sym(Spectrum(lam.array() + t), k) <= 0.0) {
        t_out = t;
        t_in = -span * (i - 1) / steps;
        bracketed = true;
        break;
      }
    }
    if (!bracketed) continue;  // window narrower than the walk; resample
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (t_in + t_out);
      if (elem_sym(Spectrum(lam.array() + mid), k) > 0.0) {
        t_in = mid;
      } else {
        t_out = mid;
      }
    }
    // Stop strictly inside, a relative hair away from the boundary.
    const double t = t_in * (1.0 - 1e-9);
    Spectrum biased = lam.array() + t;
    if (in_gamma_k(biased, k, /*strict=*/true)) return biased;
  }
}

KatoConfig sample_kato(Rng& rng, int n, int k) {
  if (!(n > 2 * k && k >= 1)) {
    throw std::domain_error("sample_kato: requires n > 2k >= 1");
  }
  for (;;) {
    Spectrum lp(n - 1);
    for (int i = 0; i < n - 1; ++i) lp[i] = rng.normal();
    const double nrm = lp.norm();
    if (nrm == 0.0) continue;
    lp *= rng.uniform(0.5, 2.0) / nrm;
    bool cone_ok = true;
    for (int m = 1; m <= k - 1 && cone_ok; ++m) {
      cone_ok = elem_sym(lp, m) > 0.0;
    }
    if (!cone_ok) continue;
    if (elem_sym(lp, k - 1) <= 1e-10) continue;

    // Mixed entries at one of three spreads; larger spreads push the arrow
    // matrix toward (and past) the cone boundary, diversifying the suite.
    static constexpr double spreads[3] = {0.1, 0.3, 1.0};
    const double sigma = spreads[rng.integer(3)];
    KatoConfig cfg;
    cfg.n = n;
    cfg.k = k;
    cfg.lambda_prime = lp;
    cfg.mixed = Eigen::VectorXd(n - 1);
    for (int i = 0; i < n - 1; ++i) cfg.mixed[i] = sigma * rng.normal();

    const SymMatrix M = kato_matrix(cfg);
    if (!in_gamma_k(M.eigenvalues(), k, /*strict=*/false)) continue;
    return cfg;
  }
}

}  // namespace khx
