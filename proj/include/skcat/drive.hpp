#pragma once

// NMR control of the spin Kerr-cat qubit: rotating-wave analytics, full
// driven dynamics and the multi-tone global rotation used for preparation.
//
// Drive amplitudes and frequencies are Hamiltonian coefficients (phase per
// unit time), like every other coefficient in the library.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "skcat/core/linalg.hpp"
#include "skcat/spectrum.hpp"

namespace skcat {

struct DriveSpec {
  double b_perp = 0.0;            // T
  double gamma_n = 1.0;           // coefficient per tesla
  double theta_axis = 0.5 * pi;   // drive axis in the PAS xy plane
  double phase = 0.0;             // phi of cos(w t + phi)
  double frequency = 0.0;         // <= 0 means resonant with the numeric splitting
  std::vector<double> tones;      // multi-tone preparation only

  double amplitude() const { return gamma_n * b_perp; }
};

inline CMat transverse_operator(const SpinOperatorSet& ops, double theta_axis) {
  return std::cos(theta_axis) * ops.ix + std::sin(theta_axis) * ops.iy;
}

// gamma_n B_perp I / Delta; the rotating-wave picture needs it small.
inline double drive_ratio(const DriveSpec& d, SpinLength s, double delta) {
  return d.amplitude() * s.value() / delta;
}

inline void check_drive_regime(const DriveSpec& d, SpinLength s, double delta, Warnings* w) {
  if (drive_ratio(d, s, delta) > 0.1)
    warn(w, "drive: gamma_n B_perp I / Delta exceeds 0.1, rotating-wave picture unreliable");
}

struct RabiParams {
  double omega_r = 0.0;
  double f_theta = 0.0;
  double theta_drive = 0.0;  // in [0, 2 pi)
};

inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * pi);
  return a < 0.0 ? a + 2.0 * pi : a;
}

// Orientation factor of the qubit matrix element,
// |<1|I_perp|0>| = I f(theta) for cat states at theta0.
inline double rabi_orientation_factor(SpinLength s, double theta0, double theta) {
  const double g = overlap_gamma(s, theta0);
  const double c0 = std::cos(theta0);
  const double st = std::sin(theta), ct = std::cos(theta);
  return std::tan(theta0) / std::sqrt(1.0 - g * g) * std::sqrt(c0 * c0 * st * st + g * g * ct * ct);
}

// Closed forms.  theta_drive refers to the qubit basis |0> = cat_-,
// |1> = -i cat_+ (see qubit_basis_vectors); atan2 keeps the branch right for
// drive axes beyond pi/2.
inline RabiParams rabi_params(SpinLength s, double theta0, const DriveSpec& d) {
  RabiParams r;
  r.f_theta = rabi_orientation_factor(s, theta0, d.theta_axis);
  r.omega_r = 0.5 * d.amplitude() * s.value() * r.f_theta;
  const double g = overlap_gamma(s, theta0);
  r.theta_drive = wrap_angle(pi + d.phase +
                             std::atan2(std::sin(d.theta_axis) * std::cos(theta0), g * std::cos(d.theta_axis)));
  return r;
}

// Qubit basis used by the rotating-wave generator, as columns (|0>, |1>).
inline CMat qubit_basis_vectors(const CVec& zero, const CVec& one) {
  CMat b(zero.size(), 2);
  b.col(0) = zero;
  b.col(1) = -I_unit * one;
  return b;
}

inline CMat qubit_basis_vectors(SpinLength s, double theta0) {
  return qubit_basis_vectors(cat_state(s, {theta0, 0.5 * pi, -1}), cat_state(s, {theta0, 0.5 * pi, +1}));
}

// Same quantities from the matrix element (gamma_n B_perp / 2) e^{-i phi} I_10.
inline RabiParams rabi_params_from_states(const CMat& basis, const DriveSpec& d) {
  const auto ops = make_spin_ops(SpinLength(static_cast<int>(basis.rows()) - 1));
  const cplx i10 = basis.col(1).dot(transverse_operator(ops, d.theta_axis) * basis.col(0));
  RabiParams r;
  r.omega_r = 0.5 * d.amplitude() * std::abs(i10);
  r.f_theta = std::abs(i10) / ops.spin.value();
  r.theta_drive = wrap_angle(d.phase - std::arg(i10));
  return r;
}

inline RabiParams rabi_params_matrix_element(SpinLength s, double theta0, const DriveSpec& d) {
  return rabi_params_from_states(qubit_basis_vectors(s, theta0), d);
}

// 2x2 generator in the ordered basis (|0>, |1>), with tau_+ = |1><0|:
// Omega_R (tau_x cos theta_drive + tau_y sin theta_drive).
inline CMat rwa_hamiltonian(const CatQubitFrame& frame, const DriveSpec& d) {
  const auto r = rabi_params(frame.spin, frame.theta0, d);
  CMat h = CMat::Zero(2, 2);
  h(1, 0) = r.omega_r * std::exp(-I_unit * r.theta_drive);
  h(0, 1) = std::conj(h(1, 0));
  return h;
}

// Probability of |1> after time t from |0> at detuning delta (drive minus
// splitting) in the rotating-wave picture.
inline double rabi_population(double omega_r, double detuning, double t) {
  const double w = std::sqrt(omega_r * omega_r + 0.25 * detuning * detuning);
  if (w == 0.0) return 0.0;
  const double s = std::sin(w * t);
  return omega_r * omega_r / (w * w) * s * s;
}

inline double rabi_contrast(double omega_r, double detuning) {
  return omega_r * omega_r / (omega_r * omega_r + 0.25 * detuning * detuning);
}

// Time for a full |0> -> |1> -> |0> population cycle.
inline double rabi_period(double omega_r) { return pi / omega_r; }

// ---------------------------------------------------------------------------
// Full driven dynamics

struct DrivenEvolution {
  std::vector<double> t, p0, p1, leakage;
  double drive_frequency = 0.0;
  double max_norm_drift = 0.0;
  long steps_per_period = 0;
};

namespace detail {

inline double spectral_width(const RVec& e) { return e.maxCoeff() - e.minCoeff(); }

inline long steps_for(double span, double shortest_period, double fraction = 1.0 / 200.0) {
  return std::max<long>(1, static_cast<long>(std::ceil(span / (fraction * shortest_period))));
}

inline CMat matrix_power(CMat u, long n) {
  CMat out = CMat::Identity(u.rows(), u.cols());
  while (n > 0) {
    if (n & 1) out = u * out;
    u = u * u;
    n >>= 1;
  }
  return out;
}

}  // namespace detail

// Integrates H0 + gamma_n B_perp cos(w t + phi) I_perp starting from the exact
// ground state.  The Hamiltonian is periodic in the drive period, so one
// period's propagator is computed with fourth-order Magnus steps no longer
// than 1/200 of the shortest period in H and reused for later periods.
inline DrivenEvolution driven_evolution(const NuclearSpinModel& model, const CatQubitFrame& frame,
                                        const DriveSpec& d, const std::vector<double>& t_grid,
                                        Warnings* warnings = nullptr, double norm_tol = 1e-10) {
  const auto ops = make_spin_ops(model.spin);
  const CMat h0 = build_hamiltonian(ops, model);
  const auto sp = eigensystem_with_parity(h0, model.spin);
  const double delta = sp.energies(1) - sp.energies(0);
  check_drive_regime(d, model.spin, delta, warnings);
  const double w = d.frequency > 0.0 ? d.frequency : delta;
  const CMat hd = d.amplitude() * transverse_operator(ops, d.theta_axis);
  auto ham = [&](double t) -> CMat { return h0 + std::cos(w * t + d.phase) * hd; };

  const double period = 2.0 * pi / w;
  const double fastest = std::max({detail::spectral_width(sp.energies) + d.amplitude() * 2.0 * model.spin.value(), w});
  const double shortest = 2.0 * pi / fastest;
  const long steps = detail::steps_for(period, shortest);
  const double h = period / static_cast<double>(steps);
  const CMat u_period = magnus4_propagator(ham, model.spin.dim(), 0.0, period, steps);

  CVec psi0 = frame.ground;
  DrivenEvolution out;
  out.drive_frequency = w;
  out.steps_per_period = steps;
  const CVec g = sp.vectors.col(0), e = sp.vectors.col(1);
  for (double t : t_grid) {
    if (t < 0.0) throw DomainError("driven_evolution: negative time");
    const long n = static_cast<long>(std::floor(t / period + 1e-12));
    const double rem = std::max(0.0, t - n * period);
    CVec psi = detail::matrix_power(u_period, n) * psi0;
    if (rem > 0.0) {
      const long k = std::max<long>(1, static_cast<long>(std::ceil(rem / h)));
      psi = magnus4_affine(h0, hd, [&](double s) { return std::cos(w * s + d.phase); }, psi, 0.0, rem, k, 1.0,
                           std::numeric_limits<double>::infinity());
    }
    const double drift = std::abs(psi.norm() - psi0.norm());
    out.max_norm_drift = std::max(out.max_norm_drift, drift);
    if (drift > norm_tol)
      throw IntegratorTolerance("driven_evolution: norm drift " + std::to_string(drift) + " exceeds tolerance");
    const double a0 = std::norm(g.dot(psi)), a1 = std::norm(e.dot(psi));
    out.t.push_back(t);
    out.p0.push_back(a0);
    out.p1.push_back(a1);
    out.leakage.push_back(std::max(0.0, 1.0 - a0 - a1));
  }
  return out;
}

// Least-squares fit of p(t) = c sin^2(Omega t) near an initial guess.
struct RabiFit {
  double omega = 0.0;
  double contrast = 0.0;
  double rms = 0.0;
};

inline RabiFit fit_rabi(const std::vector<double>& t, const std::vector<double>& p, double guess) {
  auto solve = [&](double om, double& c) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double s = std::sin(om * t[k]);
      num += p[k] * s * s;
      den += s * s * s * s;
    }
    c = den > 0 ? num / den : 0.0;
    double r = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double s = std::sin(om * t[k]);
      r += (p[k] - c * s * s) * (p[k] - c * s * s);
    }
    return r;
  };
  boost::uintmax_t iters = 200;
  double c = 0.0;
  const auto best = boost::math::tools::brent_find_minima([&](double om) { return solve(om, c); }, 0.7 * guess,
                                                          1.3 * guess, 50, iters);
  RabiFit f;
  f.omega = best.first;
  f.rms = std::sqrt(solve(f.omega, c) / static_cast<double>(std::max<std::size_t>(1, t.size())));
  f.contrast = c;
  return f;
}

// ---------------------------------------------------------------------------
// Multi-tone preparation

struct Transition {
  int upper = 0, lower = 0;
  double frequency = 0.0;
};

// Every transition between eigenstates of opposite parity; (I + 1/2)^2 of
// them for half-integer I.
inline std::vector<Transition> opposite_parity_transitions(const NuclearSpinModel& model) {
  const auto sp = eigensystem_with_parity(build_hamiltonian(model), model.spin);
  std::vector<Transition> out;
  const int d = static_cast<int>(model.spin.dim());
  for (int m = 0; m < d; ++m)
    for (int n = 0; n < m; ++n)
      if (sp.parities[m] != sp.parities[n]) out.push_back({m, n, sp.energies(m) - sp.energies(n)});
  std::sort(out.begin(), out.end(), [](const Transition& a, const Transition& b) { return a.frequency < b.frequency; });
  return out;
}

inline std::vector<double> opposite_parity_tones(const NuclearSpinModel& model) {
  std::vector<double> f;
  for (const auto& t : opposite_parity_transitions(model)) f.push_back(t.frequency);
  return f;
}

struct MultiToneResult {
  CVec lab_state;          // Schroedinger picture
  CVec interaction_state;  // exp(i H0 t) applied
  long steps = 0;
  double norm_drift = 0.0;
};

// Drives H0 + gamma_n B_perp sum_i cos(w_i t + phi) I_perp from |I, I>.  The
// tone list must contain every opposite-parity transition frequency.
inline MultiToneResult multi_tone_rotation(const NuclearSpinModel& model, const DriveSpec& d, double t,
                                           const CVec* initial = nullptr, double rel_tol = 1e-9) {
  const auto needed = opposite_parity_tones(model);
  const double scale = needed.empty() ? 1.0 : needed.back();
  for (double f : needed) {
    const bool present = std::any_of(d.tones.begin(), d.tones.end(),
                                     [&](double g) { return std::abs(g - f) <= rel_tol * scale; });
    if (!present) throw MissingTone("multi_tone_rotation: no tone at transition frequency " + std::to_string(f));
  }
  if (d.tones.size() != needed.size())
    throw MissingTone("multi_tone_rotation: expected " + std::to_string(needed.size()) + " tones, got " +
                      std::to_string(d.tones.size()));
  if (t < 0.0) throw DomainError("multi_tone_rotation: negative time");

  const auto ops = make_spin_ops(model.spin);
  const CMat h0 = build_hamiltonian(ops, model);
  const CMat hd = d.amplitude() * transverse_operator(ops, d.theta_axis);
  CVec psi = CVec::Zero(model.spin.dim());
  if (initial) psi = *initial;
  else psi(0) = 1.0;

  const auto sp = eigensystem_with_parity(h0, model.spin);
  const double fastest = std::max(detail::spectral_width(sp.energies) + 2.0 * d.amplitude() * d.tones.size() *
                                                                            model.spin.value(),
                                  needed.empty() ? 1.0 : needed.back());
  MultiToneResult r;
  r.steps = t > 0.0 ? detail::steps_for(t, 2.0 * pi / fastest) : 0;
  auto coeff = [&](double s) {
    double c = 0.0;
    for (double w : d.tones) c += std::cos(w * s + d.phase);
    return c;
  };
  const CVec out = magnus4_affine(h0, hd, coeff, psi, 0.0, t, r.steps);
  r.norm_drift = std::abs(out.norm() - psi.norm());
  r.lab_state = out;
  r.interaction_state = expm_hermitian(h0, -t) * out;
  return r;
}

// Rotation target exp(-i (gamma_n B_perp / 2) I_perp t) |I, I>.
inline CVec multi_tone_target(SpinLength s, const DriveSpec& d, double t) {
  const auto ops = make_spin_ops(s);
  CVec psi = CVec::Zero(s.dim());
  psi(0) = 1.0;
  return expm_hermitian(0.5 * d.amplitude() * transverse_operator(ops, d.theta_axis), t) * psi;
}

}  // namespace skcat
