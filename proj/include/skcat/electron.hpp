#pragma once

// Electron-spin mediated operations on the spin Kerr-cat: the hyperfine
// entangling gate, its Haar-averaged fidelity against the secular model, the
// electron-mediated CZ, parity readout and initialization.
//
// Joint states are ordered electron (x) nucleus with electron index 0 = up
// (sigma_z = +1).  The two-nucleus register used by the CZ protocol is
// electron (x) nucleus 1 (x) nucleus 2.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "skcat/core/linalg.hpp"
#include "skcat/core/random.hpp"
#include "skcat/core/units.hpp"
#include "skcat/spectrum.hpp"

namespace skcat {

struct HyperfineGateParams {
  double a_max = 101.5e6;     // A
  double gamma_e_b0 = 0.0;    // electron Zeeman coefficient
  double ramp_time = -1.0;    // negative selects 0.1 pi / A
  NuclearSpinModel model;     // nucleus at its clock field

  double tau_r() const { return ramp_time < 0.0 ? 0.1 * pi / a_max : ramp_time; }
};

// Gate parameters at quadrupole coupling q from a frame fitted at Q = 1; the
// clock field scales linearly with Q, eigenvectors do not change.
inline HyperfineGateParams make_gate_params(const CatQubitFrame& unit_frame, double q, double gamma_n,
                                            double a_max = 101.5e6, double gamma_e = constants::gamma_e) {
  HyperfineGateParams p;
  p.a_max = a_max;
  p.model = NuclearSpinModel{unit_frame.spin, q, unit_frame.eta, gamma_n, unit_frame.b0 * q / unit_frame.q};
  p.gamma_e_b0 = gamma_e * p.model.b / gamma_n;
  return p;
}

// gamma_n B0 << A << gamma_e B0.
inline void check_hierarchy(const HyperfineGateParams& p, Warnings* w) {
  if (p.model.b > 0.1 * p.a_max) warn(w, "hyperfine gate: gamma_n B0 is not small compared with A");
  if (p.a_max > 0.1 * p.gamma_e_b0) warn(w, "hyperfine gate: A is not small compared with gamma_e B0");
}

// ---------------------------------------------------------------------------
// Hyperfine ramps

enum class RampProfile { trapezoid, adiabatic };

// Linear detuning sweep from +eps_max (dot) to -eps_max (donor) and back.
struct AdiabaticSweep {
  double tunnel_coupling = 0.0;
  double eps_max = 0.0;
  double sweep_time = 0.0;
};

// Donor-orbital weight of the instantaneous charge ground state of
// eps nu_z / 2 + t_c nu_x.
inline double donor_weight(double eps, double tc) { return 0.5 * (1.0 - eps / std::sqrt(eps * eps + 4.0 * tc * tc)); }

struct RampSchedule {
  RampProfile profile = RampProfile::trapezoid;
  double a_max = 0.0;
  double ramp_time = 0.0;  // rise (and fall) duration
  double hold_time = 0.0;
  double total_time = 0.0;
  AdiabaticSweep sweep;

  double detuning(double t) const {
    const double e = sweep.eps_max;
    if (t <= ramp_time) return e - 2.0 * e * t / ramp_time;
    if (t <= ramp_time + hold_time) return -e;
    return -e + 2.0 * e * (t - ramp_time - hold_time) / ramp_time;
  }

  double value(double t) const {
    if (t < 0.0 || t > total_time) return 0.0;
    if (profile == RampProfile::adiabatic) return a_max * donor_weight(detuning(t), sweep.tunnel_coupling);
    if (ramp_time > 0.0 && t < ramp_time) return a_max * t / ramp_time;
    if (t <= ramp_time + hold_time) return a_max;
    return ramp_time > 0.0 ? a_max * (total_time - t) / ramp_time : 0.0;
  }

  // Segment boundaries; the coupling is constant on the middle segment.
  std::vector<double> breakpoints() const { return {0.0, ramp_time, ramp_time + hold_time, total_time}; }

  double integral() const {
    const auto b = breakpoints();
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < b.size(); ++k) {
      if (b[k + 1] <= b[k]) continue;
      sum += boost::math::quadrature::gauss_kronrod<double, 31>::integrate([&](double t) { return value(t); }, b[k],
                                                                           b[k + 1], 15, 1e-14);
    }
    return sum;
  }
};

inline void check_ramp_integral(const RampSchedule& r) {
  const double err = std::abs(r.integral() - pi);
  if (err > 1e-9) throw IntegralMismatch("ramp integral differs from pi by " + std::to_string(err));
}

// A rises linearly over tau_r, holds, and falls over tau_r so that the
// integral is pi: T = tau_r + pi / A.  tau_r = 0 gives a rectangular pulse.
inline RampSchedule make_trapezoid_ramp(double a_max, double ramp_time) {
  if (!(a_max > 0.0)) throw DomainError("make_trapezoid_ramp: A must be positive");
  if (ramp_time < 0.0 || ramp_time > pi / a_max)
    throw DomainError("make_trapezoid_ramp: ramp time must lie in [0, pi / A]");
  RampSchedule r;
  r.profile = RampProfile::trapezoid;
  r.a_max = a_max;
  r.ramp_time = ramp_time;
  r.hold_time = pi / a_max - ramp_time;
  r.total_time = ramp_time + pi / a_max;
  check_ramp_integral(r);
  return r;
}

inline RampSchedule make_ramp(const HyperfineGateParams& p) { return make_trapezoid_ramp(p.a_max, p.tau_r()); }

// A(t) = A xi(t) for a linear detuning sweep; the hold time on the donor is
// chosen so that the integral is pi.  Each sweep contributes A sweep_time / 2.
inline RampSchedule make_adiabatic_ramp(double a_max, const AdiabaticSweep& s, double tolerance = 0.1) {
  if (!(a_max > 0.0 && s.tunnel_coupling > 0.0 && s.eps_max > 0.0 && s.sweep_time > 0.0))
    throw DomainError("make_adiabatic_ramp: parameters must be positive");
  // Nonadiabatic coupling |<-|d/dt|+>| = t_c |eps'| / (eps^2 + 4 t_c^2), largest at eps = 0.
  const double rate = 2.0 * s.eps_max / s.sweep_time;
  const double coupling = rate / (4.0 * s.tunnel_coupling);
  if (coupling > tolerance * 2.0 * s.tunnel_coupling)
    throw AdiabaticityViolated("detuning sweep too fast: |<-|d+>| = " + std::to_string(coupling) +
                               " is not small compared with 2 t_c");
  if (a_max > tolerance * s.tunnel_coupling)
    throw AdiabaticityViolated("hyperfine coupling is not small compared with the tunnel coupling");
  const double plateau = donor_weight(-s.eps_max, s.tunnel_coupling);
  const double hold = (pi / a_max - s.sweep_time) / plateau;
  if (hold < 0.0) throw IntegralMismatch("detuning sweeps alone exceed a hyperfine phase of pi");
  RampSchedule r;
  r.profile = RampProfile::adiabatic;
  r.a_max = a_max;
  r.sweep = s;
  r.ramp_time = s.sweep_time;
  r.hold_time = hold;
  r.total_time = 2.0 * s.sweep_time + hold;
  check_ramp_integral(r);
  return r;
}

// ---------------------------------------------------------------------------
// Conditional rotations

inline double sigma_z_of(Eigen::Index e) { return e == 0 ? 1.0 : -1.0; }

// exp(-i (pi/2) sigma_z I_z) on electron (x) nucleus.
inline CMat u_cr_ideal(SpinLength s) {
  const Eigen::Index d = s.dim();
  CMat u = CMat::Zero(2 * d, 2 * d);
  for (Eigen::Index e = 0; e < 2; ++e)
    for (Eigen::Index n = 0; n < d; ++n) u(e * d + n, e * d + n) = std::exp(-I_unit * (0.5 * pi * sigma_z_of(e) * s.m_of(n)));
  return u;
}

// exp(-i (pi/2) sigma_z (I_z - I)): the ideal gate followed by the electron
// rotation exp(i (pi/2) I sigma_z).  On cat (x) |+> it flips the electron to
// |-> exactly when the cat label is -1.
inline CMat u_cr_parity(SpinLength s) {
  const Eigen::Index d = s.dim();
  CMat u = CMat::Zero(2 * d, 2 * d);
  for (Eigen::Index e = 0; e < 2; ++e)
    for (Eigen::Index n = 0; n < d; ++n)
      u(e * d + n, e * d + n) = std::exp(-I_unit * (0.5 * pi * sigma_z_of(e) * (s.m_of(n) - s.value())));
  return u;
}

// exp(-i a (I_z - I)) on a single nucleus; maps cat(theta, phi) onto
// cat(theta, phi + a) without a global phase.
inline CMat z_rotation(SpinLength s, double a) {
  CMat u = CMat::Zero(s.dim(), s.dim());
  for (Eigen::Index n = 0; n < s.dim(); ++n) u(n, n) = std::exp(I_unit * (a * static_cast<double>(n)));
  return u;
}

inline CVec electron_plus() { return CVec::Constant(2, cplx(1.0 / std::sqrt(2.0), 0.0)); }

inline CVec electron_minus() {
  CVec v(2);
  v << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  return v;
}

// ---------------------------------------------------------------------------
// Gate dynamics

struct ExactOptions {
  bool secular_hyperfine = false;  // sigma_z I_z only
  bool drop_quadrupole = false;
  int steps_per_ramp = 400;
  double norm_tol = 1e-10;
};

struct JointHamiltonian {
  CMat h_static;  // nuclear H, electron Zeeman
  CMat coupling;  // multiplies A(t)
};

inline JointHamiltonian joint_hamiltonian(const HyperfineGateParams& p, const ExactOptions& o = {}) {
  const auto ops = make_spin_ops(p.model.spin);
  const Eigen::Index d = p.model.spin.dim();
  NuclearSpinModel m = p.model;
  if (o.drop_quadrupole) m.q = 0.0;
  const CMat hn = build_hamiltonian(ops, m);
  CMat sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, -I_unit, I_unit, 0;
  sz << 1, 0, 0, -1;
  JointHamiltonian j;
  j.h_static = kron(CMat::Identity(2, 2), hn) + (0.5 * p.gamma_e_b0) * kron(sz, CMat::Identity(d, d));
  j.coupling = 0.5 * kron(sz, ops.iz);
  if (!o.secular_hyperfine) j.coupling += 0.5 * (kron(sx, ops.ix) + kron(sy, ops.iy));
  return j;
}

// Integrates H + (gamma_e B0 / 2) sigma_z + (A(t) / 2) sigma . I.  Segments
// with constant A use the exact exponential; ramps use fourth-order Magnus
// steps.  Returns the state at every requested time (ascending, within
// [0, T]).
inline std::vector<CVec> evolve_exact(const CVec& state, const HyperfineGateParams& p, const RampSchedule& r,
                                      const std::vector<double>& t_grid, const ExactOptions& o = {}) {
  const Eigen::Index dim = 2 * p.model.spin.dim();
  if (state.size() != dim) throw DomainError("evolve_exact: state dimension mismatch");
  if (std::abs(state.norm() - 1.0) > 1e-10) throw DomainError("evolve_exact: state is not normalized");
  const auto j = joint_hamiltonian(p, o);
  const auto bp = r.breakpoints();
  auto constant_on = [&](double a, double b) {
    const double mid = 0.5 * (a + b);
    return mid >= bp[1] && mid <= bp[2];
  };
  auto segment_of = [&](double t) {
    for (std::size_t k = 0; k + 1 < bp.size(); ++k)
      if (t < bp[k + 1]) return k;
    return bp.size() - 2;
  };
  auto advance = [&](CVec psi, double a, double b) -> CVec {
    if (b <= a) return psi;
    if (b <= 0.0 || a >= r.total_time) return expm_hermitian(j.h_static, b - a) * psi;
    if (constant_on(a, b)) return expm_hermitian(j.h_static + r.value(0.5 * (a + b)) * j.coupling, b - a) * psi;
    const double seg = std::max(r.ramp_time, 1e-300);
    const long steps = std::max<long>(1, static_cast<long>(std::ceil((b - a) / seg * o.steps_per_ramp)));
    return magnus4_affine(j.h_static, j.coupling, [&](double t) { return r.value(t); }, std::move(psi), a, b, steps,
                          1.0, std::numeric_limits<double>::infinity());
  };
  std::vector<CVec> out;
  CVec psi = state;
  double now = 0.0;
  for (double t : t_grid) {
    if (t < now) throw DomainError("evolve_exact: time grid must be ascending and non-negative");
    while (now < t) {
      const std::size_t k = segment_of(now);
      const double stop = (now < r.total_time) ? std::min(t, bp[k + 1] > now ? bp[k + 1] : t) : t;
      psi = advance(std::move(psi), now, stop);
      now = stop;
    }
    const double drift = std::abs(psi.norm() - 1.0);
    if (drift > o.norm_tol)
      throw IntegratorTolerance("evolve_exact: norm drift " + std::to_string(drift) + " exceeds tolerance");
    out.push_back(psi);
  }
  return out;
}

inline CVec evolve_exact(const CVec& state, const HyperfineGateParams& p, const RampSchedule& r,
                         const ExactOptions& o = {}) {
  return evolve_exact(state, p, r, std::vector<double>{r.total_time}, o).back();
}

// Secular model with Q I_z^2 dropped: every term is diagonal, so the
// propagator over the full schedule is the phase
// exp(-i [(-gamma_n B0 m + gamma_e B0 sigma / 2) T + sigma m (int A) / 2]).
inline CMat approx_propagator(const HyperfineGateParams& p, const RampSchedule& r) {
  const SpinLength s = p.model.spin;
  const Eigen::Index d = s.dim();
  const double area = r.integral();
  CMat u = CMat::Zero(2 * d, 2 * d);
  for (Eigen::Index e = 0; e < 2; ++e)
    for (Eigen::Index n = 0; n < d; ++n) {
      const double sg = sigma_z_of(e), m = s.m_of(n);
      const double phase = (-p.model.b * m + 0.5 * p.gamma_e_b0 * sg) * r.total_time + 0.5 * sg * m * area;
      u(e * d + n, e * d + n) = std::exp(-I_unit * phase);
    }
  return u;
}

inline CVec evolve_approx(const CVec& state, const HyperfineGateParams& p, const RampSchedule& r) {
  if (state.size() != 2 * p.model.spin.dim()) throw DomainError("evolve_approx: state dimension mismatch");
  return approx_propagator(p, r) * state;
}

// ---------------------------------------------------------------------------
// Haar-averaged gate fidelity

struct GateFidelity {
  double closed_form = 0.0;
  double sampled = std::numeric_limits<double>::quiet_NaN();
  double sampled_stderr = std::numeric_limits<double>::quiet_NaN();
  long samples = 0;
  Eigen::Matrix2cd overlaps = Eigen::Matrix2cd::Zero();  // c_{ss'} = <Phi_s|Phi'_s'>
};

// Second Haar moment over a qubit: E |psi^dag C psi|^2 = (|Tr C|^2 + Tr C C^dag) / 6.
inline double haar_average_closed_form(const Eigen::Matrix2cd& c) {
  return (std::norm(c.trace()) + (c * c.adjoint()).trace().real()) / 6.0;
}

inline Eigen::Matrix2cd gate_overlaps(const HyperfineGateParams& p, const RampSchedule& r, const CVec& exact0,
                                      const CVec& exact1, const CVec& cat0, const CVec& cat1,
                                      const ExactOptions& o = {}) {
  const CVec plus = electron_plus();
  const CVec phi[2] = {evolve_exact(kron(plus, exact0), p, r, o), evolve_exact(kron(plus, exact1), p, r, o)};
  const CVec apx[2] = {evolve_approx(kron(plus, cat0), p, r), evolve_approx(kron(plus, cat1), p, r)};
  Eigen::Matrix2cd c;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) c(a, b) = phi[a].dot(apx[b]);
  return c;
}

// Sample mean of |psi^dag C psi|^2 over Haar-random qubit states.
inline void haar_sample(GateFidelity& g, long samples, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  double sum = 0.0, sum2 = 0.0;
  for (long k = 0; k < samples; ++k) {
    const CVec psi = haar_state(rng, 2);
    const double f = std::norm(psi.dot(g.overlaps * psi));
    sum += f;
    sum2 += f * f;
  }
  const double n = static_cast<double>(samples);
  g.samples = samples;
  g.sampled = sum / n;
  g.sampled_stderr = std::sqrt(std::max(0.0, sum2 / n - g.sampled * g.sampled) / (n - 1.0));
}

// Exact dynamics from the exact eigenvectors against the secular model on
// the cat approximations, electron prepared in |+>.
inline GateFidelity gate_fidelity_haar(const HyperfineGateParams& p, const RampSchedule& r,
                                       const CatQubitFrame& frame, long samples = 0, std::uint64_t seed = 1,
                                       const ExactOptions& o = {}) {
  GateFidelity g;
  g.overlaps = gate_overlaps(p, r, frame.ground, frame.excited, frame.cat0, frame.cat1, o);
  g.closed_form = haar_average_closed_form(g.overlaps);
  if (samples > 1) haar_sample(g, samples, seed);
  return g;
}

// The secular model compared with itself.
inline GateFidelity gate_fidelity_self(const HyperfineGateParams& p, const RampSchedule& r, const CVec& cat0,
                                       const CVec& cat1) {
  const CVec plus = electron_plus();
  const CVec a[2] = {evolve_approx(kron(plus, cat0), p, r), evolve_approx(kron(plus, cat1), p, r)};
  GateFidelity g;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) g.overlaps(i, k) = a[i].dot(a[k]);
  g.closed_form = haar_average_closed_form(g.overlaps);
  return g;
}

struct GateMapPoint {
  double q = 0.0, eta = 0.0;
  GateFidelity fidelity;
};

// F_CZ = (2 F_g - 1) - eps_shuttle - eps_m.
inline double cz_fidelity_estimate(double f_g, double eps_shuttle, double eps_m) {
  return 2.0 * f_g - 1.0 - eps_shuttle - eps_m;
}

// ---------------------------------------------------------------------------
// Electron-mediated CZ

struct CatBasis {
  SpinLength spin;
  CVec zero, one;  // label -1 and +1 cats at phi = pi/2
};

inline CatBasis make_cat_basis(SpinLength s, double theta0) {
  return {s, cat_state(s, {theta0, 0.5 * pi, -1}), cat_state(s, {theta0, 0.5 * pi, +1})};
}

// Logical two-qubit amplitudes are indexed 2 s1 + s2 (|00>, |01>, |10>, |11>).
inline CVec embed_two_qubit(const CatBasis& b, const Eigen::Vector4cd& a) {
  const CVec* q[2] = {&b.zero, &b.one};
  CVec out = CVec::Zero(b.spin.dim() * b.spin.dim());
  for (int s1 = 0; s1 < 2; ++s1)
    for (int s2 = 0; s2 < 2; ++s2) out += a(2 * s1 + s2) * kron(*q[s1], *q[s2]);
  return out;
}

inline Eigen::Vector4cd project_two_qubit(const CatBasis& b, const CVec& psi, double* residual = nullptr) {
  Eigen::Vector4cd a;
  const CVec* q[2] = {&b.zero, &b.one};
  for (int s1 = 0; s1 < 2; ++s1)
    for (int s2 = 0; s2 < 2; ++s2) a(2 * s1 + s2) = kron(*q[s1], *q[s2]).dot(psi);
  if (residual) *residual = (psi - embed_two_qubit(b, a)).norm();
  return a;
}

// CZ with the -1 on |00>, i.e. diag(1, 1, 1, -1) on (|11>, |10>, |01>, |00>).
inline Eigen::Matrix4cd cz_gate() {
  Eigen::Matrix4cd c = Eigen::Matrix4cd::Identity();
  c(0, 0) = -1.0;
  return c;
}

struct CzResult {
  CVec state;               // nuclear register after correction
  int outcome = +1;         // electron X outcome
  double probability = 0.0;
  bool corrected = false;   // R_- applied to the first nucleus
  std::vector<std::string> record;
};

// U_CR(1) -> Hadamard -> U_CR(2) -> X measurement -> R_sigma on nucleus 1.
// U_CR is the parity-referenced form; R_- = exp(i pi |0><0|) acts as the
// label operator diag((-1)^n) on the first nucleus.
inline CzResult cz_protocol(const CatBasis& b, const CVec& psi, int outcome) {
  if (outcome != 1 && outcome != -1) throw DomainError("cz_protocol: outcome must be +1 or -1");
  const Eigen::Index d = b.spin.dim();
  if (psi.size() != d * d) throw DomainError("cz_protocol: register dimension mismatch");
  double residual = 0.0;
  project_two_qubit(b, psi, &residual);
  if (residual > 1e-9 * std::max(1.0, psi.norm()))
    throw NotInCatSubspace("cz_protocol: register has weight " + std::to_string(residual) + " outside the cat subspace");

  const Eigen::Index nd = d * d;
  CVec joint = kron(electron_plus(), psi);
  const double I = b.spin.value();
  // Diagonal phases of U_CR on nucleus k.
  auto apply_cr = [&](int k) {
    for (Eigen::Index e = 0; e < 2; ++e)
      for (Eigen::Index n1 = 0; n1 < d; ++n1)
        for (Eigen::Index n2 = 0; n2 < d; ++n2) {
          const double m = b.spin.m_of(k == 1 ? n1 : n2);
          joint(e * nd + n1 * d + n2) *= std::exp(-I_unit * (0.5 * pi * sigma_z_of(e) * (m - I)));
        }
  };
  apply_cr(1);
  const CVec up = joint.head(nd), down = joint.tail(nd);
  joint.head(nd) = (up + down) / std::sqrt(2.0);
  joint.tail(nd) = (up - down) / std::sqrt(2.0);
  apply_cr(2);
  CzResult r;
  r.outcome = outcome;
  CVec nuc = (joint.head(nd) + static_cast<double>(outcome) * joint.tail(nd)) / std::sqrt(2.0);
  r.probability = nuc.squaredNorm() / psi.squaredNorm();
  r.record.push_back("U_CR on nucleus 1, Hadamard, U_CR on nucleus 2");
  r.record.push_back("electron X outcome " + std::string(outcome > 0 ? "+" : "-") + " with probability " +
                     std::to_string(r.probability));
  if (outcome < 0) {
    for (Eigen::Index n1 = 0; n1 < d; ++n1)
      if (n1 % 2 == 1) nuc.segment(n1 * d, d) *= -1.0;
    r.corrected = true;
    r.record.push_back("R_- applied to nucleus 1");
  }
  r.state = nuc / nuc.norm() * psi.norm();
  return r;
}

// Sampled electron outcome.
inline CzResult cz_protocol(const CatBasis& b, const CVec& psi, Rng& rng) {
  const CzResult plus = cz_protocol(b, psi, +1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng) < plus.probability ? plus : cz_protocol(b, psi, -1);
}

// U_CZ followed by exp(-i (pi/2)(I_z - I)) on both nuclei.
inline CVec cz_target(const CatBasis& b, const Eigen::Vector4cd& a) {
  const CMat rot = z_rotation(b.spin, 0.5 * pi);
  return kron(rot, rot) * embed_two_qubit(b, cz_gate() * a);
}

// ---------------------------------------------------------------------------
// Readout and initialization

struct ReadoutResult {
  double p_plus = 0.0, p_minus = 0.0;
  cplx alpha = 0.0, beta = 0.0;  // cat-basis amplitudes of the input
  double residual = 0.0;         // norm outside the cat subspace
  CVec post_plus, post_minus;    // nuclear states after the measurement
  bool compensation_required = true;  // exp(-i (pi/2) I_z) must be undone
};

inline ReadoutResult readout(const CatBasis& b, const CVec& psi) {
  const Eigen::Index d = b.spin.dim();
  if (psi.size() != d) throw DomainError("readout: state dimension mismatch");
  ReadoutResult r;
  r.alpha = b.zero.dot(psi);
  r.beta = b.one.dot(psi);
  r.residual = (psi - r.alpha * b.zero - r.beta * b.one).norm();
  const CVec joint = u_cr_parity(b.spin) * kron(electron_plus(), psi);
  auto project = [&](const CVec& e) {
    CVec v = std::conj(e(0)) * joint.head(d) + std::conj(e(1)) * joint.tail(d);
    return v;
  };
  const CVec vp = project(electron_plus()), vm = project(electron_minus());
  r.p_plus = vp.squaredNorm();
  r.p_minus = vm.squaredNorm();
  if (r.p_plus > 0) r.post_plus = vp / std::sqrt(r.p_plus);
  if (r.p_minus > 0) r.post_minus = vm / std::sqrt(r.p_minus);
  return r;
}

struct InitOptions {
  double theta_axis = 0.5 * pi;  // rotation axis for step (2)
};

struct InitResult {
  CVec state;
  int outcome = +1;  // +1 -> |1>, -1 -> |0>
  double lambda_sq = 0.0;
  double probability_plus = 0.0;
  std::vector<std::string> transcript;
};

// (1) |I, I> (projective Iz measurement and pi pulses, assumed ideal);
// (2) rotation about the drive axis to polar angle theta0, followed by free
// precession correcting the azimuth when the axis is not y;
// (3) parity measurement through U_CR and an electron X measurement.
inline InitResult initialize(SpinLength s, double theta0, std::uint64_t seed, const InitOptions& o = {}) {
  InitResult r;
  const auto ops = make_spin_ops(s);
  CVec psi = CVec::Zero(s.dim());
  psi(0) = 1.0;
  r.transcript.push_back("step 1: prepared |I, I> by projective Iz measurement");
  const CMat axis = std::cos(o.theta_axis) * ops.ix + std::sin(o.theta_axis) * ops.iy;
  psi = expm_hermitian(axis, theta0) * psi;
  r.transcript.push_back("step 2: rotated by " + std::to_string(theta0) + " about axis angle " +
                         std::to_string(o.theta_axis));
  const double misalign = o.theta_axis - 0.5 * pi;
  if (std::abs(misalign) > 1e-15) {
    psi = z_rotation(s, -misalign) * psi;
    r.transcript.push_back("step 2b: electron-assisted precession by " + std::to_string(-misalign));
  }
  const CatBasis b = make_cat_basis(s, theta0);
  const CVec joint = u_cr_parity(s) * kron(electron_plus(), psi);
  const Eigen::Index d = s.dim();
  const CVec vp = (joint.head(d) + joint.tail(d)) / std::sqrt(2.0);
  const CVec vm = (joint.head(d) - joint.tail(d)) / std::sqrt(2.0);
  r.probability_plus = vp.squaredNorm();
  r.lambda_sq = 0.5 * (1.0 + overlap_gamma(s, theta0));
  Rng rng = make_rng(seed, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  r.outcome = u(rng) < r.probability_plus ? +1 : -1;
  r.state = (r.outcome > 0 ? vp : vm).normalized();
  const cplx ov = (r.outcome > 0 ? b.one : b.zero).dot(r.state);
  if (std::abs(ov) > 0) r.state *= std::conj(ov) / std::abs(ov);
  r.transcript.push_back("step 3: parity measurement outcome " + std::string(r.outcome > 0 ? "+ -> |1>" : "- -> |0>") +
                         " (P(+) = " + std::to_string(r.probability_plus) + ")");
  return r;
}

}  // namespace skcat
