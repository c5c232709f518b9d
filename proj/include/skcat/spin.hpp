#pragma once

// Spin-I operator algebra, spin coherent states and spin cat states.
//
// Basis ordering is m = I, I-1, ..., -I everywhere.  Index n = I - m, so the
// first basis vector is the fully polarized state |I, I>.

#include <cmath>
#include <string>

#include "skcat/core/linalg.hpp"
#include "skcat/core/types.hpp"

namespace skcat {

struct SpinLength {
  int two_i = 0;

  SpinLength() = default;
  explicit SpinLength(int two_i_) : two_i(two_i_) {
    if (two_i <= 0) throw DomainError("spin length requires 2I >= 1, got " + std::to_string(two_i));
  }
  static SpinLength from_double(double spin) {
    const double twice = 2.0 * spin;
    if (std::abs(twice - std::round(twice)) > 1e-12)
      throw DomainError("spin length must be a multiple of 1/2");
    return SpinLength(static_cast<int>(std::lround(twice)));
  }
  double value() const { return 0.5 * two_i; }
  Eigen::Index dim() const { return two_i + 1; }
  bool half_integer() const { return two_i % 2 == 1; }
  double m_of(Eigen::Index n) const { return value() - static_cast<double>(n); }
};

struct SpinOperatorSet {
  SpinLength spin;
  CMat iz, iplus, iminus, ix, iy, isq, parity;
};

inline SpinOperatorSet make_spin_ops(SpinLength s) {
  const Eigen::Index d = s.dim();
  const double j = s.value();
  SpinOperatorSet ops;
  ops.spin = s;
  ops.iz = CMat::Zero(d, d);
  ops.iplus = CMat::Zero(d, d);
  ops.parity = CMat::Zero(d, d);
  for (Eigen::Index n = 0; n < d; ++n) {
    const double m = s.m_of(n);
    ops.iz(n, n) = m;
    ops.parity(n, n) = std::exp(I_unit * (pi * m));
    // <m+1| I+ |m> sits one row above the diagonal.
    if (n > 0) ops.iplus(n - 1, n) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
  }
  ops.iminus = ops.iplus.adjoint();
  ops.ix = 0.5 * (ops.iplus + ops.iminus);
  ops.iy = (ops.iplus - ops.iminus) / (2.0 * I_unit);
  ops.isq = j * (j + 1.0) * CMat::Identity(d, d);
  return ops;
}

// Real diagonal matrix diag((-1)^n) = exp(i pi (Iz - I)).  It differs from the
// parity operator exp(i pi Iz) only by the global phase exp(i pi I) and has
// eigenvalues +1 and -1 for every I; its eigenvalue is the parity label used
// throughout (+1 for the symmetric cat, -1 for the antisymmetric one).
inline CMat parity_label_operator(SpinLength s) {
  CMat p = CMat::Zero(s.dim(), s.dim());
  for (Eigen::Index n = 0; n < s.dim(); ++n) p(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
  return p;
}

// Phase relating the two parity conventions: Pi = exp(i pi I) * label operator.
inline cplx parity_phase(SpinLength s) { return std::exp(I_unit * (pi * s.value())); }

inline double binomial(int n, int k) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

// Binomial closed form sqrt(C(2I,n)) * zeta^n / (1+|zeta|^2)^I with
// zeta = exp(i phi) tan(theta/2), written in half-angle form so theta = pi is
// finite.
inline CVec coherent_state(SpinLength s, double theta, double phi) {
  if (theta < -1e-12 || theta > pi + 1e-12) throw DomainError("coherent_state: theta outside [0, pi]");
  const double c = std::cos(0.5 * theta);
  const double sn = std::sin(0.5 * theta);
  CVec psi(s.dim());
  for (int n = 0; n <= s.two_i; ++n) {
    const double mag = std::sqrt(binomial(s.two_i, n)) * std::pow(c, s.two_i - n) * std::pow(sn, n);
    psi(n) = mag * std::exp(I_unit * (phi * n));
  }
  return psi;
}

// <theta, phi | theta, phi - pi> = cos^{2I}(theta).
inline double overlap_gamma(SpinLength s, double theta) {
  if (theta < -1e-12 || theta > pi + 1e-12) throw DomainError("overlap_gamma: theta outside [0, pi]");
  return std::pow(std::cos(theta), s.two_i);
}

struct CatParams {
  double theta = 0.0;
  double phi = 0.0;
  int parity_sign = +1;
};

// (|theta,phi> + s |theta,phi-pi>) * [2(1 + s gamma)]^{-1/2}.
inline CVec cat_state(SpinLength s, const CatParams& p) {
  if (p.parity_sign != 1 && p.parity_sign != -1) throw DomainError("cat_state: parity_sign must be +1 or -1");
  const double g = overlap_gamma(s, p.theta);
  const double denom = 1.0 + p.parity_sign * g;
  if (p.parity_sign < 0 && denom < 1e-14)
    throw DegenerateCat("antisymmetric cat normalization diverges at theta = " + std::to_string(p.theta));
  const CVec a = coherent_state(s, p.theta, p.phi);
  const CVec b = coherent_state(s, p.theta, p.phi - pi);
  return (a + static_cast<double>(p.parity_sign) * b) / std::sqrt(2.0 * denom);
}

}  // namespace skcat
