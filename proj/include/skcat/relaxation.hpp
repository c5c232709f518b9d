#pragma once

// Charge-noise induced bitflips.  A fluctuating electric-field gradient tilts
// the principal axis system away from the applied field; the resulting
// transverse Zeeman field couples opposite-parity eigenstates.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "skcat/core/parallel.hpp"
#include "skcat/core/random.hpp"
#include "skcat/core/units.hpp"
#include "skcat/spectrum.hpp"

namespace skcat {

struct EFGPerturbation {
  Mat3 delta_v = Mat3::Zero();
  Mat3 omega = Mat3::Zero();    // R0^T dV R0
  Mat3 s_delta = Mat3::Zero();  // first-order generator, R_delta = R0 exp(S)
  double beta_x = 0.0;
  double beta_y = 0.0;
  double delta_q = 0.0;
  double delta_eta = 0.0;
  double strength_ratio = 0.0;  // ||dV|| / |D_zz|
};

inline EFGPerturbation perturbation_frame(const PASFrame& pas, const Mat3& delta_v, Warnings* warnings = nullptr) {
  if ((delta_v - delta_v.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1e-300, delta_v.cwiseAbs().maxCoeff()))
    throw NonSymmetric("perturbation_frame: delta V is not symmetric");
  const Vec3& d = pas.d0;
  const double dzz = d(2);
  if (std::abs(dzz) == 0.0) throw DegenerateDenominator("perturbation_frame: unperturbed EFG tensor vanishes");
  EFGPerturbation p;
  p.delta_v = delta_v;
  p.omega = pas.r0.transpose() * delta_v * pas.r0;
  p.strength_ratio = delta_v.norm() / std::abs(dzz);
  if (p.strength_ratio > 0.1) warn(warnings, "perturbation_frame: ||dV|| / |D_zz| exceeds 0.1, first order unreliable");
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      const double gap = d(j) - d(i);
      if (std::abs(gap) < 1e-14 * std::abs(dzz)) {
        if (std::abs(p.omega(i, j)) > 0.0 && (i == 2 || j == 2))
          throw DegenerateDenominator("perturbation_frame: degenerate principal values");
        continue;
      }
      p.s_delta(i, j) = p.omega(i, j) / gap;
    }
  p.beta_x = p.omega(0, 2) / (dzz - d(0));
  p.beta_y = p.omega(1, 2) / (dzz - d(1));
  p.delta_q = pas.q_coupling * p.omega(2, 2) / dzz;
  const Vec3 shifted = d + p.omega.diagonal();
  p.delta_eta = (shifted(0) - shifted(1)) / shifted(2) - pas.eta;
  return p;
}

// Principal axes of V + dV at first order.
inline Mat3 perturbed_axes(const PASFrame& pas, const EFGPerturbation& p) {
  const Mat3 s = p.s_delta;
  return pas.r0 * s.exp();
}

// A point charge e hopping by `jump` at mean distance `distance` along a
// lab-frame direction.  Only the direction-direction element of its field
// gradient is kept.
struct TLF {
  double distance = 10e-9;                 // m
  double jump = constants::angstrom;       // m
  double kappa = 1.0;                      // switching rate
  Vec3 direction = Vec3::UnitX();
};

inline double tlf_delta_v_xx(const TLF& tlf) {
  if (!(tlf.distance > 0.0)) throw DomainError("TLF distance must be positive");
  if (tlf.jump < 0.0) throw DomainError("TLF jump must be non-negative");
  const double r = tlf.distance;
  return -tlf.jump * 6.0 * constants::k_coulomb * constants::e_charge / (r * r * r * r);
}

inline Mat3 tlf_delta_v(const TLF& tlf) {
  const Vec3 n = tlf.direction.normalized();
  return tlf_delta_v_xx(tlf) * n * n.transpose();
}

// |beta_i| <= | e q / (2I(2I-1)) * dV_x'x' / Q |, valid for 0.5 <= eta <= 1.
inline double beta_bound(SpinLength s, double q_moment, double q_coupling, double delta_v_xx,
                         Convention conv = Convention::paper_literal) {
  if (s.two_i < 2) throw DomainError("beta_bound needs I >= 1");
  const double energy = constants::e_charge * q_moment * delta_v_xx / (s.two_i * (s.two_i - 1.0));
  return std::abs(energy_to_coefficient(energy, conv) / q_coupling);
}

// Prefactor-free scale k e^2 q dr / (hbar x^4) for Q |beta|.
inline double beta_scale_prefactor_free(double distance, double jump, double q_moment,
                                        Convention conv = Convention::paper_literal) {
  const double r = distance;
  const double energy = constants::k_coulomb * constants::e_charge * constants::e_charge * q_moment * jump / (r * r * r * r);
  return std::abs(energy_to_coefficient(energy, conv));
}

struct TransitionRates {
  std::map<int, double> gamma;          // I^2 (b0 beta)^2 kappa / (eps^2 + 4 kappa^2)
  std::map<int, double> matrix_element; // same with |<m|Ix|0>|^2 in place of I^2
  std::map<int, double> bound;          // kappa-independent I^2 (b0 beta)^2 / (2 |eps|)
  std::map<int, double> gap;            // eps_m - eps_0
};

inline double lorentzian_weight(double kappa, double eps) { return kappa / (eps * eps + 4.0 * kappa * kappa); }

// Rates out of the ground state for every opposite-parity level, for a
// telegraph fluctuator xi = +-1/2 producing the transverse field b0 beta_x xi.
inline TransitionRates single_tlf_rate(const CatQubitFrame& frame, const TLF& tlf, double b0, double beta_x) {
  const SpinOperatorSet ops = make_spin_ops(frame.spin);
  const auto sp = eigensystem_with_parity(-b0 * ops.iz + build_quadrupole(ops, frame.q, frame.eta), frame.spin);
  const double spin = frame.spin.value();
  const double amp2 = std::pow(b0 * beta_x, 2);
  TransitionRates r;
  const CVec v0 = sp.vectors.col(0);
  for (Eigen::Index m = 1; m < sp.energies.size(); ++m) {
    if (sp.parities[static_cast<std::size_t>(m)] == sp.parities[0]) continue;
    const double eps = sp.energies(m) - sp.energies(0);
    const double elem = std::norm(sp.vectors.col(m).dot(ops.ix * v0));
    const int key = static_cast<int>(m);
    r.gap[key] = eps;
    r.gamma[key] = spin * spin * amp2 * lorentzian_weight(tlf.kappa, eps);
    r.matrix_element[key] = elem * amp2 * lorentzian_weight(tlf.kappa, eps);
    r.bound[key] = spin * spin * amp2 / (2.0 * std::abs(eps));
  }
  return r;
}

struct MultiTLFRates {
  TransitionRates rates;
  std::vector<double> betas;
  double beta_max = 0.0;
  std::map<int, double> beta_max_bound;  // I^2 (b0 beta_max)^2 sum_j kappa_j / (eps^2 + 4 kappa_j^2)
};

inline MultiTLFRates multi_tlf_rate(const CatQubitFrame& frame, const std::vector<TLF>& tlfs, double b0,
                                    double q_moment = constants::barn,
                                    Convention conv = Convention::paper_literal) {
  MultiTLFRates out;
  for (const auto& t : tlfs) {
    out.betas.push_back(beta_bound(frame.spin, q_moment, frame.q, tlf_delta_v_xx(t), conv));
    out.beta_max = std::max(out.beta_max, out.betas.back());
  }
  for (std::size_t j = 0; j < tlfs.size(); ++j) {
    const auto r = single_tlf_rate(frame, tlfs[j], b0, out.betas[j]);
    for (const auto& [m, g] : r.gamma) {
      out.rates.gamma[m] += g;
      out.rates.matrix_element[m] += r.matrix_element.at(m);
      out.rates.bound[m] += r.bound.at(m);
      out.rates.gap[m] = r.gap.at(m);
      const double spin = frame.spin.value();
      out.beta_max_bound[m] += spin * spin * std::pow(b0 * out.beta_max, 2) * lorentzian_weight(tlfs[j].kappa, r.gap.at(m));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Direct simulation of a telegraph-driven transverse field

struct TelegraphDrive {
  double amplitude = 0.0;  // b0 * beta; the field is amplitude * xi with xi = +-1/2
  double kappa = 1.0;
  double axis = 0.0;       // in-plane field direction, 0 along x
};

struct TransitionSimulation {
  std::vector<double> t;
  std::vector<double> p1, p1_stderr;
  double depletion = 0.0;  // mean 1 - |c_0|^2 at the final time
  double slope = 0.0, slope_stderr = 0.0;
  double golden_rule = 0.0;  // |<1|I_axis|0>|^2 amplitude^2 kappa / (Delta^2 + 4 kappa^2)
};

inline TransitionSimulation direct_transition_sim(const NuclearSpinModel& model, const TelegraphDrive& drive,
                                                  const std::vector<double>& t_grid, std::size_t n_traj,
                                                  std::uint64_t seed, unsigned jobs = 1, double slope_from = -1.0) {
  if (t_grid.size() < 2) throw DomainError("direct_transition_sim needs at least two time points");
  for (std::size_t k = 1; k < t_grid.size(); ++k)
    if (!(t_grid[k] > t_grid[k - 1])) throw DomainError("direct_transition_sim: time grid must be ascending");
  const SpinOperatorSet ops = make_spin_ops(model.spin);
  const CMat h0 = build_hamiltonian(ops, model);
  const auto sp = eigensystem_with_parity(h0, model.spin);
  const CVec e0 = sp.vectors.col(0), e1 = sp.vectors.col(1);
  const CMat coupling = std::cos(drive.axis) * ops.ix + std::sin(drive.axis) * ops.iy;

  // Exact propagators for the two telegraph levels.
  struct Level {
    RVec e;
    CMat v;
  };
  auto level = [&](double xi) {
    Eigen::SelfAdjointEigenSolver<CMat> es(h0 - drive.amplitude * xi * coupling);
    return Level{es.eigenvalues(), es.eigenvectors()};
  };
  const Level up = level(0.5), down = level(-0.5);
  auto evolve = [](const Level& l, const CVec& psi, double dt) {
    CVec c = l.v.adjoint() * psi;
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::exp(-I_unit * (l.e(k) * dt));
    return CVec(l.v * c);
  };

  const std::size_t nt = t_grid.size();
  const double t_end = t_grid.back();
  if (slope_from < 0.0) slope_from = 0.5 * t_end;
  std::size_t ia = 0;
  while (ia + 1 < nt && t_grid[ia] < slope_from) ++ia;
  if (ia + 1 >= nt) throw DomainError("direct_transition_sim: slope window is empty");

  std::vector<std::vector<double>> p(n_traj, std::vector<double>(nt, 0.0));
  std::vector<double> depl(n_traj, 0.0);
  parallel_for(n_traj, jobs, [&](std::size_t j) {
    Rng rng = make_rng(seed, j);
    std::bernoulli_distribution coin(0.5);
    std::exponential_distribution<double> wait(drive.kappa);
    bool high = coin(rng);
    CVec psi = e0;
    double now = 0.0;
    std::size_t next = 0;
    while (next < nt) {
      const double flip = now + wait(rng);
      const Level& l = high ? up : down;
      while (next < nt && t_grid[next] <= flip) {
        psi = evolve(l, psi, t_grid[next] - now);
        now = t_grid[next];
        p[j][next] = std::norm(e1.dot(psi));
        ++next;
      }
      if (next >= nt) break;
      psi = evolve(l, psi, flip - now);
      now = flip;
      high = !high;
    }
    depl[j] = 1.0 - std::norm(e0.dot(psi));
  });

  TransitionSimulation out;
  out.t = t_grid;
  const double n = static_cast<double>(n_traj);
  for (std::size_t k = 0; k < nt; ++k) {
    double s = 0.0, s2 = 0.0;
    for (std::size_t j = 0; j < n_traj; ++j) s += p[j][k], s2 += p[j][k] * p[j][k];
    const double m = s / n;
    out.p1.push_back(m);
    out.p1_stderr.push_back(std::sqrt(std::max(0.0, s2 / n - m * m) / (n - 1.0)));
  }
  double sd = 0.0, ss = 0.0, ss2 = 0.0;
  const double span = t_grid[nt - 1] - t_grid[ia];
  for (std::size_t j = 0; j < n_traj; ++j) {
    sd += depl[j];
    const double slope = (p[j][nt - 1] - p[j][ia]) / span;
    ss += slope;
    ss2 += slope * slope;
  }
  out.depletion = sd / n;
  out.slope = ss / n;
  out.slope_stderr = std::sqrt(std::max(0.0, ss2 / n - out.slope * out.slope) / (n - 1.0));
  const double delta = sp.energies(1) - sp.energies(0);
  out.golden_rule = std::norm(e1.dot(coupling * e0)) * drive.amplitude * drive.amplitude *
                    lorentzian_weight(drive.kappa, delta);
  if (out.depletion > 0.1)
    throw PerturbationTooStrong("ground-state depletion " + std::to_string(out.depletion) + " exceeds 10%");
  return out;
}

}  // namespace skcat
