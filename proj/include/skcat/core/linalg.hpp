#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "skcat/core/types.hpp"

namespace skcat {

inline CMat commutator(const CMat& a, const CMat& b) { return a * b - b * a; }

inline bool is_hermitian(const CMat& m, double tol = 1e-12) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

inline CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline CVec kron(const CVec& a, const CVec& b) {
  CVec out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

// exp(-i H t) for Hermitian H through its eigendecomposition; exactly unitary
// up to rounding.
inline CMat expm_hermitian(const CMat& h, double t) {
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  const RVec& w = es.eigenvalues();
  CVec ph(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) ph(k) = std::exp(-I_unit * (w(k) * t));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

// Taylor series with scaling and squaring; intended for the small generators
// produced by one integrator step.
inline CMat expm_taylor(const CMat& a) {
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const CMat as = a / std::ldexp(1.0, squarings);
  CMat result = CMat::Identity(a.rows(), a.cols());
  CMat term = result;
  for (int k = 1; k < 30; ++k) {
    term = term * as / static_cast<double>(k);
    result += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

// Fourth-order Magnus propagator on a uniform grid.  `hamiltonian(t)` returns
// the Hermitian generator; the phase factor converts coefficients to phases
// (see units.hpp).  Returns the final state; the norm is checked, never
// renormalized.
template <class HamiltonianFn>
CVec magnus4(HamiltonianFn&& hamiltonian, CVec psi, double t0, double t1, long steps,
             double phase = 1.0, double norm_tol = 1e-10) {
  if (steps <= 0) return psi;
  const double h = (t1 - t0) / static_cast<double>(steps);
  const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
  const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
  const double n0 = psi.norm();
  for (long k = 0; k < steps; ++k) {
    const double t = t0 + h * static_cast<double>(k);
    const CMat a1 = -I_unit * phase * hamiltonian(t + c1 * h);
    const CMat a2 = -I_unit * phase * hamiltonian(t + c2 * h);
    const CMat omega = 0.5 * h * (a1 + a2) + (std::sqrt(3.0) / 12.0) * h * h * commutator(a2, a1);
    psi = expm_taylor(omega) * psi;
  }
  if (std::abs(psi.norm() - n0) > norm_tol)
    throw IntegratorTolerance("norm drift " + std::to_string(std::abs(psi.norm() - n0)) +
                              " exceeds tolerance");
  return psi;
}

// Same scheme, accumulating the propagator instead of a single state.
template <class HamiltonianFn>
CMat magnus4_propagator(HamiltonianFn&& hamiltonian, Eigen::Index dim, double t0, double t1,
                        long steps, double phase = 1.0) {
  CMat u = CMat::Identity(dim, dim);
  if (steps <= 0) return u;
  const double h = (t1 - t0) / static_cast<double>(steps);
  const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
  const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
  for (long k = 0; k < steps; ++k) {
    const double t = t0 + h * static_cast<double>(k);
    const CMat a1 = -I_unit * phase * hamiltonian(t + c1 * h);
    const CMat a2 = -I_unit * phase * hamiltonian(t + c2 * h);
    const CMat omega = 0.5 * h * (a1 + a2) + (std::sqrt(3.0) / 12.0) * h * h * commutator(a2, a1);
    u = expm_taylor(omega) * u;
  }
  return u;
}

// exp(a) v without forming exp(a): Taylor terms act on the vector, with the
// generator split into pieces of 1-norm at most 0.5.
inline CVec expm_apply(const CMat& a, CVec v) {
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  const int pieces = norm > 0.5 ? static_cast<int>(std::ceil(norm / 0.5)) : 1;
  const double inv = 1.0 / pieces;
  for (int p = 0; p < pieces; ++p) {
    CVec term = v;
    for (int k = 1; k < 30; ++k) {
      term = (inv / k) * (a * term);
      v += term;
      if (term.cwiseAbs().maxCoeff() < 1e-18) break;
    }
  }
  return v;
}

// Fourth-order Magnus stepping for H(t) = h0 + c(t) h1.  The commutator of the
// two Gauss-point generators reduces to (c2 - c1) [h0, h1], so it is formed
// once.  Same norm check as magnus4.
template <class CoeffFn>
CVec magnus4_affine(const CMat& h0, const CMat& h1, CoeffFn&& coeff, CVec psi, double t0, double t1, long steps,
                    double phase = 1.0, double norm_tol = 1e-10) {
  if (steps <= 0) return psi;
  const double h = (t1 - t0) / static_cast<double>(steps);
  const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
  const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
  const CMat k = commutator(h0, h1);
  const double n0 = psi.norm();
  CMat omega(h0.rows(), h0.cols());
  for (long s = 0; s < steps; ++s) {
    const double t = t0 + h * static_cast<double>(s);
    const double f1 = coeff(t + c1 * h), f2 = coeff(t + c2 * h);
    // [a2, a1] with a_j = -i phase (h0 + f_j h1) equals -phase^2 (f1 - f2) [h0, h1].
    omega.noalias() = (-I_unit * phase * h) * (h0 + (0.5 * (f1 + f2)) * h1);
    omega -= ((std::sqrt(3.0) / 12.0) * h * h * phase * phase * (f1 - f2)) * k;
    psi = expm_apply(omega, std::move(psi));
  }
  if (std::abs(psi.norm() - n0) > norm_tol)
    throw IntegratorTolerance("norm drift " + std::to_string(std::abs(psi.norm() - n0)) +
                              " exceeds tolerance");
  return psi;
}

// |<a|b>|^2 for normalized vectors.
inline double state_fidelity(const CVec& a, const CVec& b) { return std::norm(a.dot(b)); }

}  // namespace skcat
