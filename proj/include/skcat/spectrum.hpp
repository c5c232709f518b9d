#pragma once

// Quadrupole and nuclear-spin Hamiltonians, parity-resolved spectra, clock
// transitions and the spin Kerr-cat frame.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "skcat/core/units.hpp"
#include "skcat/spin.hpp"

namespace skcat {

// ---------------------------------------------------------------------------
// Electric-field-gradient tensor and its principal axis system

struct PASFrame {
  double q_coupling = 0.0;  // Hz
  double eta = 0.0;
  Mat3 r0 = Mat3::Identity();  // columns are the principal axes x, y, z
  Vec3 d0 = Vec3::Zero();      // (D_xx, D_yy, D_zz) with |D_xx| <= |D_yy| <= |D_zz|
  bool tie = false;            // |D_yy| == |D_zz| within tolerance
};

inline void check_efg(const Mat3& v) {
  const double scale = std::max(1e-300, v.cwiseAbs().maxCoeff());
  if ((v - v.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw NonSymmetric("EFG tensor is not symmetric");
  if (std::abs(v.trace()) > 1e-10 * scale) throw NonTraceless("EFG tensor is not traceless");
}

// Coupling constant e q D_zz / [2I(2I-1)], expressed as a Hamiltonian
// coefficient under the chosen convention.
inline double quadrupole_coupling(double dzz, double q_moment, SpinLength s,
                                  Convention conv = Convention::paper_literal) {
  if (s.two_i < 2) throw DomainError("quadrupole coupling needs I >= 1");
  const double energy = constants::e_charge * q_moment * dzz / (s.two_i * (s.two_i - 1.0));
  return energy_to_coefficient(energy, conv);
}

inline PASFrame efg_to_pas(const Mat3& v, double q_moment, SpinLength s,
                           Convention conv = Convention::paper_literal) {
  check_efg(v);
  Eigen::SelfAdjointEigenSolver<Mat3> es(v);
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(es.eigenvalues()(a)) < std::abs(es.eigenvalues()(b));
  });
  PASFrame f;
  for (int k = 0; k < 3; ++k) {
    f.d0(k) = es.eigenvalues()(order[k]);
    f.r0.col(k) = es.eigenvectors().col(order[k]);
  }
  if (f.r0.determinant() < 0) f.r0.col(0) = -f.r0.col(0);
  const double scale = std::max(1e-300, std::abs(f.d0(2)));
  f.tie = std::abs(std::abs(f.d0(1)) - std::abs(f.d0(2))) < 1e-12 * scale;
  f.eta = (f.d0(2) == 0.0) ? 0.0 : (f.d0(0) - f.d0(1)) / f.d0(2);
  f.q_coupling = quadrupole_coupling(f.d0(2), q_moment, s, conv);
  return f;
}

// ---------------------------------------------------------------------------
// Hamiltonians

struct NuclearSpinModel {
  SpinLength spin{7};
  double q = 1.0;        // quadrupole coupling Q (Hz)
  double eta = 0.0;      // asymmetry parameter
  double gamma_n = 1.0;  // Hz / T
  double b = 0.0;        // gamma_n * B (Hz)
};

inline CMat build_quadrupole(const SpinOperatorSet& ops, double q, double eta) {
  const double j = ops.spin.value();
  const Eigen::Index d = ops.spin.dim();
  const CMat ip2 = ops.iplus * ops.iplus;
  const CMat im2 = ops.iminus * ops.iminus;
  return 0.5 * q * (3.0 * ops.iz * ops.iz + 0.5 * eta * (ip2 + im2) - j * (j + 1.0) * CMat::Identity(d, d));
}

inline CMat build_quadrupole(SpinLength s, double q, double eta) {
  return build_quadrupole(make_spin_ops(s), q, eta);
}

inline CMat build_hamiltonian(const SpinOperatorSet& ops, const NuclearSpinModel& m) {
  return -m.b * ops.iz + build_quadrupole(ops, m.q, m.eta);
}

inline CMat build_hamiltonian(const NuclearSpinModel& m) {
  return build_hamiltonian(make_spin_ops(m.spin), m);
}

// ---------------------------------------------------------------------------
// Parity-labelled spectra

struct ParityLabeledSpectrum {
  RVec energies;
  std::vector<int> parities;  // eigenvalue of the label operator diag((-1)^n)
  CMat vectors;               // columns, ascending energy
};

// Diagonalizes a Hamiltonian that conserves parity by treating the even-n and
// odd-n sectors separately, which also resolves degenerate doublets into
// definite-parity states.  Hamiltonians that break parity are diagonalized as a
// whole and rejected if any eigenvector is parity-mixed.
inline ParityLabeledSpectrum eigensystem_with_parity(const CMat& h, SpinLength s) {
  const Eigen::Index d = s.dim();
  if (h.rows() != d || h.cols() != d) throw DomainError("eigensystem_with_parity: dimension mismatch");
  const CMat p = parity_label_operator(s);
  ParityLabeledSpectrum out;
  out.energies.resize(d);
  out.vectors = CMat::Zero(d, d);
  out.parities.assign(static_cast<std::size_t>(d), 0);

  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (commutator(h, p).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    for (Eigen::Index k = 0; k < d; ++k) {
      const CVec v = es.eigenvectors().col(k);
      const double label = v.dot(p * v).real();
      if (std::abs(label) < 0.99) throw ParityMixing("eigenvector " + std::to_string(k) + " is parity-mixed");
      out.energies(k) = es.eigenvalues()(k);
      out.vectors.col(k) = v;
      out.parities[static_cast<std::size_t>(k)] = label > 0 ? 1 : -1;
    }
    return out;
  }

  struct Level {
    double e;
    int parity;
    CVec v;
  };
  std::vector<Level> levels;
  levels.reserve(static_cast<std::size_t>(d));
  for (int parity_bit = 0; parity_bit < 2; ++parity_bit) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index n = parity_bit; n < d; n += 2) idx.push_back(n);
    const auto m = static_cast<Eigen::Index>(idx.size());
    CMat block(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b < m; ++b) block(a, b) = h(idx[a], idx[b]);
    Eigen::SelfAdjointEigenSolver<CMat> es(block);
    for (Eigen::Index k = 0; k < m; ++k) {
      CVec v = CVec::Zero(d);
      for (Eigen::Index a = 0; a < m; ++a) v(idx[a]) = es.eigenvectors()(a, k);
      levels.push_back({es.eigenvalues()(k), parity_bit == 0 ? 1 : -1, v});
    }
  }
  std::stable_sort(levels.begin(), levels.end(), [](const Level& a, const Level& b) { return a.e < b.e; });
  for (Eigen::Index k = 0; k < d; ++k) {
    const auto& l = levels[static_cast<std::size_t>(k)];
    out.energies(k) = l.e;
    out.parities[static_cast<std::size_t>(k)] = l.parity;
    out.vectors.col(k) = l.v;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Qubit splitting and the clock transition

// Precomputed operator pieces so sweeps over b only rebuild -b Iz.
class SplittingEvaluator {
 public:
  SplittingEvaluator(SpinLength s, double eta, double q = 1.0)
      : spin_(s), ops_(make_spin_ops(s)), hq_(build_quadrupole(ops_, q, eta)) {}

  ParityLabeledSpectrum spectrum(double b) const { return eigensystem_with_parity(-b * ops_.iz + hq_, spin_); }

  double delta(double b) const {
    const auto sp = spectrum(b);
    return sp.energies(1) - sp.energies(0);
  }

  // Hellmann-Feynman derivative dDelta/db = <0|Iz|0> - <1|Iz|1>.
  double delta_prime(double b) const {
    const auto sp = spectrum(b);
    const CVec v0 = sp.vectors.col(0);
    const CVec v1 = sp.vectors.col(1);
    return v0.dot(ops_.iz * v0).real() - v1.dot(ops_.iz * v1).real();
  }

  // Five-point central second difference with one Richardson step.
  double delta_second(double b, double h) const {
    auto d2 = [&](double step) {
      return (-delta(b + 2 * step) + 16 * delta(b + step) - 30 * delta(b) + 16 * delta(b - step) -
              delta(b - 2 * step)) /
             (12.0 * step * step);
    };
    return (16.0 * d2(0.5 * h) - d2(h)) / 15.0;
  }

  const SpinOperatorSet& ops() const { return ops_; }

 private:
  SpinLength spin_;
  SpinOperatorSet ops_;
  CMat hq_;
};

inline std::vector<double> splitting_curve(SpinLength s, double eta, const std::vector<double>& b_grid,
                                           double q = 1.0) {
  for (std::size_t k = 1; k < b_grid.size(); ++k)
    if (!(b_grid[k] > b_grid[k - 1])) throw DomainError("splitting_curve: b grid must be ascending");
  SplittingEvaluator ev(s, eta, q);
  std::vector<double> out;
  out.reserve(b_grid.size());
  for (double b : b_grid) out.push_back(ev.delta(b));
  return out;
}

struct ClockTransition {
  double b0 = 0.0;         // Hz
  double delta = 0.0;      // Hz
  double curvature = 0.0;  // Hz^-1
  double delta_prime = 0.0;
};

// Every smooth local maximum of Delta(b) on b/Q in [0.05, 4I], ascending in b.
inline std::vector<ClockTransition> local_maxima(SpinLength s, double eta, double q = 1.0, int grid_points = 1200) {
  if (!(eta > 0.0)) throw DomainError("clock transitions are undefined at eta = 0");
  SplittingEvaluator ev(s, eta, q);
  const double lo = std::log(0.05), hi = std::log(4.0 * s.value());
  std::vector<double> b(grid_points), dp(grid_points);
  for (int k = 0; k < grid_points; ++k) {
    b[k] = q * std::exp(lo + (hi - lo) * k / (grid_points - 1.0));
    dp[k] = ev.delta_prime(b[k]);
  }
  std::vector<ClockTransition> found;
  for (int k = 0; k + 1 < grid_points; ++k) {
    if (!(dp[k] > 0.0 && dp[k + 1] < 0.0)) continue;
    auto f = [&](double x) { return ev.delta_prime(x); };
    boost::uintmax_t iters = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(50);
    const auto r = boost::math::tools::toms748_solve(f, b[k], b[k + 1], dp[k], dp[k + 1], tol, iters);
    const double root = 0.5 * (r.first + r.second);
    const double slope = ev.delta_prime(root);
    // A kink from a level crossing flips the sign of Delta' without passing
    // through zero; those are not clock transitions.
    if (std::abs(slope) > 1e-8) continue;
    ClockTransition c;
    c.b0 = root;
    c.delta = ev.delta(root);
    c.delta_prime = slope;
    c.curvature = ev.delta_second(root, 1e-3 * q);
    if (c.curvature < 0.0) found.push_back(c);
  }
  return found;
}

inline ClockTransition find_clock_transition(SpinLength s, double eta, double q = 1.0) {
  const auto maxima = local_maxima(s, eta, q);
  if (maxima.empty())
    throw NoClockTransition("no resolvable local maximum of the qubit splitting at eta = " + std::to_string(eta));
  return maxima.back();
}

inline double curvature_coefficient(const ClockTransition& c, double q) { return 1.0 / (2.0 * q * std::abs(c.curvature)); }

inline double curvature_coefficient(SpinLength s, double eta, double q = 1.0) {
  return curvature_coefficient(find_clock_transition(s, eta, q), q);
}

// ---------------------------------------------------------------------------
// Spin Kerr-cat frame

struct CatQubitFrame {
  SpinLength spin;
  double eta = 0.0;
  double q = 1.0;
  double theta0 = 0.0;
  double fidelity = 0.0;
  double b0 = 0.0;
  double delta = 0.0;
  double curvature = 0.0;
  double a_coeff = 0.0;
  CVec ground, excited;  // exact eigenvectors |0>, |1>
  int ground_parity = 0, excited_parity = 0;
  CVec cat0, cat1;       // cat approximations at theta0, phi = pi/2
};

// Average overlap of the two lowest eigenvectors with the cat states of
// matching parity at polar angle theta and phi = pi/2.
inline double mean_cat_fidelity(SpinLength s, const CVec& v0, int p0, const CVec& v1, int p1, double theta) {
  const CVec c0 = cat_state(s, {theta, 0.5 * pi, p0});
  const CVec c1 = cat_state(s, {theta, 0.5 * pi, p1});
  return 0.5 * (std::norm(v0.dot(c0)) + std::norm(v1.dot(c1)));
}

inline CatQubitFrame fit_cat_frame(SpinLength s, double eta, double q, const ClockTransition& clock) {
  SplittingEvaluator ev(s, eta, q);
  const auto sp = ev.spectrum(clock.b0);
  CatQubitFrame f;
  f.spin = s;
  f.eta = eta;
  f.q = q;
  f.b0 = clock.b0;
  f.delta = clock.delta;
  f.curvature = clock.curvature;
  f.a_coeff = curvature_coefficient(clock, q);
  f.ground = sp.vectors.col(0);
  f.excited = sp.vectors.col(1);
  f.ground_parity = sp.parities[0];
  f.excited_parity = sp.parities[1];
  if (f.ground_parity == f.excited_parity)
    throw ParityMixing("lowest two levels share a parity; no cat qubit at this field");

  auto fbar = [&](double th) {
    return mean_cat_fidelity(s, f.ground, f.ground_parity, f.excited, f.excited_parity, th);
  };
  // Coarse pre-scan locates the basin, Brent refinement finishes it.
  const double lo = 1e-3, hi = 0.5 * pi;
  const int scan = 256;
  int best = 0;
  double best_val = -1.0;
  for (int k = 0; k <= scan; ++k) {
    const double th = lo + (hi - lo) * k / scan;
    const double v = fbar(th);
    if (v > best_val) best_val = v, best = k;
  }
  const double step = (hi - lo) / scan;
  const double a = std::max(lo, lo + (best - 1) * step);
  const double b = std::min(hi, lo + (best + 1) * step);
  boost::uintmax_t iters = 200;
  const auto r = boost::math::tools::brent_find_minima([&](double th) { return -fbar(th); }, a, b, 40, iters);
  f.theta0 = r.first;
  f.fidelity = -r.second;
  f.cat0 = cat_state(s, {f.theta0, 0.5 * pi, f.ground_parity});
  f.cat1 = cat_state(s, {f.theta0, 0.5 * pi, f.excited_parity});
  // Align eigenvector phases with their cat counterparts so overlaps are real
  // and positive; downstream fidelity comparisons rely on it.
  const cplx o0 = f.ground.dot(f.cat0);
  const cplx o1 = f.excited.dot(f.cat1);
  if (std::abs(o0) > 0) f.ground *= o0 / std::abs(o0);
  if (std::abs(o1) > 0) f.excited *= o1 / std::abs(o1);
  return f;
}

inline CatQubitFrame fit_cat_frame(SpinLength s, double eta, double q = 1.0) {
  return fit_cat_frame(s, eta, q, find_clock_transition(s, eta, q));
}

}  // namespace skcat
