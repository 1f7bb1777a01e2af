#include "khx/field.hpp"

#include "khx/stencil.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace khx {

static_assert(std::endian::native == std::endian::little,
              "field serialization assumes a little-endian host");

namespace {

struct CenteredWeights {
  Eigen::VectorXd w1;
  Eigen::VectorXd w2;
};

CenteredWeights centered5(double h) {
  Eigen::VectorXd xs(5);
  for (int o = -2; o <= 2; ++o) xs[o + 2] = o * h;
  const Eigen::MatrixXd W = fd_weights(xs, 0.0, 2);
  return {W.col(1), W.col(2)};
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SolutionField::SolutionField(AnnulusGrid grid)
    : grid_(std::move(grid)),
      values_(Eigen::MatrixXd::Zero(grid_.ns(), grid_.ntheta())) {}

SolutionField::Derivs SolutionField::reconstruct(int i, int j) const {
  const int ns = grid_.ns();
  const int nt = grid_.ntheta();
  const StencilRow srow = uniform_stencil_row(ns, grid_.hs(), i);
  const CenteredWeights tw = centered5(grid_.htheta());

  auto us_at = [&](int col) {
    double v = 0.0;
    for (size_t m = 0; m < srow.nodes.size(); ++m) {
      v += srow.w1[static_cast<int>(m)] * values_(srow.nodes[m], col);
    }
    return v;
  };

  double us = 0.0, uss = 0.0;
  for (size_t m = 0; m < srow.nodes.size(); ++m) {
    const double v = values_(srow.nodes[m], j);
    us += srow.w1[static_cast<int>(m)] * v;
    uss += srow.w2[static_cast<int>(m)] * v;
  }
  double ut = 0.0, utt = 0.0, ust = 0.0;
  for (int o = -2; o <= 2; ++o) {
    const int col = fold_index(j + o, nt);
    ut += tw.w1[o + 2] * values_(i, col);
    utt += tw.w2[o + 2] * values_(i, col);
    ust += tw.w1[o + 2] * us_at(col);
  }

  const AnnulusGrid::PhysicalDerivs d =
      grid_.to_physical(i, j, us, uss, ut, ust, utt);
  Derivs out;
  out.u = values_(i, j);
  out.ur = d.ur;
  out.utheta = d.utheta;
  out.urr = d.urr;
  out.urtheta = d.urtheta;
  out.uthetatheta = d.uthetatheta;
  return out;
}

Spectrum SolutionField::hessian_eigenvalues(int i, int j) const {
  const Derivs d = reconstruct(i, j);
  return axisym_hessian_eigs(d.ur, d.utheta, d.urr, d.urtheta, d.uthetatheta,
                             grid_.r(i, j), grid_.theta(j),
                             grid_.problem().n);
}

double SolutionField::gradient_norm(int i, int j) const {
  const Derivs d = reconstruct(i, j);
  const double tang = d.utheta / grid_.r(i, j);
  return std::sqrt(d.ur * d.ur + tang * tang);
}

void SolutionField::dump(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("SolutionField::dump: cannot open " + path);
  }
  const ApproxProblem& p = grid_.problem();
  out << "khx-field 1\n";
  out << "n " << p.n << "\n";
  out << "k " << p.k << "\n";
  out << "R " << fmt17(p.R) << "\n";
  out << "eps " << fmt17(p.eps) << "\n";
  out << "C0 " << fmt17(p.C0) << "\n";
  out << "C1 " << fmt17(p.C1) << "\n";
  out << "b_R " << fmt17(p.b_R) << "\n";
  out << "grading " << fmt17(grid_.grading()) << "\n";
  out << "coeffs " << p.surface.coeffs().size();
  for (double c : p.surface.coeffs()) out << " " << fmt17(c);
  out << "\n";
  out << "ns " << grid_.ns() << "\n";
  out << "ntheta " << grid_.ntheta() << "\n";
  out << "gamma " << (gamma_override ? fmt17(*gamma_override) : "none") << "\n";
  out << "boundary_gradient "
      << (boundary_gradient_override ? grid_.ntheta() : 0) << "\n";
  out << "payload float64 little-endian row-major\n";
  for (int i = 0; i < grid_.ns(); ++i) {
    for (int j = 0; j < grid_.ntheta(); ++j) {
      const double v = values_(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  }
  if (boundary_gradient_override) {
    for (int j = 0; j < grid_.ntheta(); ++j) {
      const double v = (*boundary_gradient_override)[j];
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  }
  if (!out) {
    throw std::runtime_error("SolutionField::dump: write failed for " + path);
  }
}

SolutionField SolutionField::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("SolutionField::load: cannot open " + path);
  }
  auto fail = [&](const std::string& why) -> std::runtime_error {
    return std::runtime_error("SolutionField::load: " + why + " in " + path);
  };
  std::string line;
  if (!std::getline(in, line) || line != "khx-field 1") {
    throw fail("bad magic line");
  }
  int n = 0, k = 0, ns = 0, ntheta = 0, bg_count = -1;
  double R = 0, eps = 0, C0 = 0, C1 = 0, b_R = 0, grading = 0;
  std::vector<double> coeffs;
  std::optional<double> gamma;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "payload") break;
    if (key == "n") ls >> n;
    else if (key == "k") ls >> k;
    else if (key == "R") ls >> R;
    else if (key == "eps") ls >> eps;
    else if (key == "C0") ls >> C0;
    else if (key == "C1") ls >> C1;
    else if (key == "b_R") ls >> b_R;
    else if (key == "grading") ls >> grading;
    else if (key == "ns") ls >> ns;
    else if (key == "ntheta") ls >> ntheta;
    else if (key == "gamma") {
      std::string v;
      ls >> v;
      if (v != "none") gamma = std::stod(v);
    } else if (key == "boundary_gradient") {
      ls >> bg_count;
    } else if (key == "coeffs") {
      size_t count = 0;
      ls >> count;
      coeffs.resize(count);
      for (size_t m = 0; m < count; ++m) ls >> coeffs[m];
    } else {
      throw fail("unknown header key '" + key + "'");
    }
    if (!ls) throw fail("malformed header line '" + line + "'");
  }
  if (n == 0 || ns == 0 || ntheta == 0 || coeffs.empty() || bg_count < 0) {
    throw fail("incomplete header");
  }
  ApproxProblem p{n, k, R, eps, RadialSurface(n, coeffs), C0, C1, b_R};
  SolutionField f(AnnulusGrid(std::move(p), ns, ntheta, grading));
  for (int i = 0; i < ns; ++i) {
    for (int j = 0; j < ntheta; ++j) {
      double v = 0.0;
      if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
        throw fail("payload truncated");
      }
      f.values_(i, j) = v;
    }
  }
  f.gamma_override = gamma;
  if (bg_count > 0) {
    if (bg_count != ntheta) throw fail("boundary_gradient count mismatch");
    Eigen::VectorXd bg(ntheta);
    for (int j = 0; j < ntheta; ++j) {
      double v = 0.0;
      if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
        throw fail("boundary-gradient payload truncated");
      }
      bg[j] = v;
    }
    f.boundary_gradient_override = bg;
  }
  return f;
}

}  // namespace khx
