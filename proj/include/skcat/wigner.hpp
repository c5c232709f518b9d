#pragma once

// Spin Wigner function through the Stratonovich-Weyl kernel built from
// spherical multipole operators T_kq.
//
// Conventions:
//   <I m| T_kq |I m'> = (-1)^{I-m} sqrt(2k+1) (I k I; -m q m')
//   W(theta, phi)     = sqrt(4 pi / (2I+1)) * sum_kq Tr(rho T_kq^dagger) Y_kq(theta, phi)
// With this normalization the sphere integral with measure (2I+1)/(4 pi) dOmega
// equals Tr rho, and the maximally mixed state maps to the constant 1/(2I+1).

#include <cmath>
#include <vector>

#include "skcat/spin.hpp"

namespace skcat {

// Wigner 3j symbol via the Racah formula; arguments are doubled so
// half-integers are exact.
inline double wigner_3j_twice(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3) {
  if (tm1 + tm2 + tm3 != 0) return 0.0;
  if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tm3) > tj3) return 0.0;
  if ((tj1 + tm1) % 2 || (tj2 + tm2) % 2 || (tj3 + tm3) % 2) return 0.0;
  if (tj3 > tj1 + tj2 || tj3 < std::abs(tj1 - tj2)) return 0.0;
  if ((tj1 + tj2 + tj3) % 2) return 0.0;
  auto lf = [](int twice) { return std::lgamma(0.5 * twice + 1.0); };
  const double tri = 0.5 * (lf(tj1 + tj2 - tj3) + lf(tj1 - tj2 + tj3) + lf(-tj1 + tj2 + tj3) -
                            lf(tj1 + tj2 + tj3 + 2));
  const double pre = 0.5 * (lf(tj1 + tm1) + lf(tj1 - tm1) + lf(tj2 + tm2) + lf(tj2 - tm2) +
                            lf(tj3 + tm3) + lf(tj3 - tm3));
  // Summation bounds in integer units.
  const int kmin = std::max({0, (tj2 - tj3 - tm1) / 2, (tj1 - tj3 + tm2) / 2});
  const int kmax = std::min({(tj1 + tj2 - tj3) / 2, (tj1 - tm1) / 2, (tj2 + tm2) / 2});
  double sum = 0.0;
  for (int k = kmin; k <= kmax; ++k) {
    const double l = std::lgamma(k + 1.0) + lf(tj1 + tj2 - tj3 - 2 * k) + lf(tj1 - tm1 - 2 * k) +
                     lf(tj2 + tm2 - 2 * k) + lf(tj3 - tj2 + tm1 + 2 * k) + lf(tj3 - tj1 - tm2 + 2 * k);
    sum += ((k % 2) ? -1.0 : 1.0) * std::exp(tri + pre - l);
  }
  const int phase_exp = (tj1 - tj2 - tm3) / 2;
  return ((phase_exp % 2) ? -1.0 : 1.0) * sum;
}

inline CMat multipole_operator(SpinLength s, int k, int q) {
  const Eigen::Index d = s.dim();
  CMat t = CMat::Zero(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    const int tm = s.two_i - 2 * static_cast<int>(a);
    for (Eigen::Index b = 0; b < d; ++b) {
      const int tmp = s.two_i - 2 * static_cast<int>(b);
      const double w = wigner_3j_twice(s.two_i, 2 * k, s.two_i, -tm, 2 * q, tmp);
      if (w == 0.0) continue;
      const double sign = (a % 2) ? -1.0 : 1.0;  // (-1)^{I-m} with I-m = a
      t(a, b) = sign * std::sqrt(2.0 * k + 1.0) * w;
    }
  }
  return t;
}

inline cplx spherical_harmonic(int k, int q, double theta, double phi) {
  const int aq = std::abs(q);
  const double base = std::sph_legendre(static_cast<unsigned>(k), static_cast<unsigned>(aq), theta);
  cplx y = base * std::exp(I_unit * (static_cast<double>(aq) * phi));
  if (q < 0) y = ((aq % 2) ? -1.0 : 1.0) * std::conj(y);
  return y;
}

struct SphereSample {
  double theta = 0.0;
  double phi = 0.0;
};

inline std::vector<double> wigner_function(const CMat& rho, SpinLength s,
                                           const std::vector<SphereSample>& grid) {
  if (rho.rows() != s.dim() || rho.cols() != s.dim()) throw DomainError("wigner_function: dimension mismatch");
  if (!is_hermitian(rho, 1e-10)) throw NonHermitian("wigner_function: density matrix is not Hermitian");
  if (std::abs(rho.trace() - cplx(1.0, 0.0)) > 1e-10) throw NonUnitTrace("wigner_function: trace differs from 1");

  struct Term {
    int k, q;
    cplx coeff;
  };
  std::vector<Term> terms;
  for (int k = 0; k <= s.two_i; ++k)
    for (int q = -k; q <= k; ++q) {
      const cplx c = (rho * multipole_operator(s, k, q).adjoint()).trace();
      if (std::abs(c) > 1e-15) terms.push_back({k, q, c});
    }
  const double norm = std::sqrt(4.0 * pi / static_cast<double>(s.dim()));
  std::vector<double> out;
  out.reserve(grid.size());
  for (const auto& p : grid) {
    cplx acc = 0.0;
    for (const auto& t : terms) acc += t.coeff * spherical_harmonic(t.k, t.q, p.theta, p.phi);
    out.push_back(norm * acc.real());
  }
  return out;
}

}  // namespace skcat
