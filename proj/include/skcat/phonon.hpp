#pragma once

// Phonon-induced relaxation through the gradient-elastic tensor, as an
// order-of-magnitude bound for a single-velocity Debye bath.

#include <cmath>
#include <optional>

#include "skcat/core/units.hpp"
#include "skcat/relaxation.hpp"

namespace skcat {

struct GradientElasticParams {
  double s11 = 2.4e22;      // V / m^2
  double s44 = 6.1e22;      // V / m^2
  double rho_mass = 2300;   // kg / m^3
  double v_sound = 6500;    // m / s
  double s_typical = 1e22;  // scale used for the bound, V / m^2

  void validate() const {
    if (!(s11 > 0 && s44 > 0 && rho_mass > 0 && v_sound > 0 && s_typical > 0))
      throw DomainError("gradient-elastic parameters must be positive");
  }
};

// Six-component Voigt vectors ordered (xx, yy, zz, yz, xz, xy).
using Voigt = Eigen::Matrix<double, 6, 1>;

inline Eigen::Matrix<double, 6, 6> gradient_elastic_matrix(const GradientElasticParams& p) {
  Eigen::Matrix<double, 6, 6> m = Eigen::Matrix<double, 6, 6>::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = (i == j) ? p.s11 : -0.5 * p.s11;
  for (int i = 3; i < 6; ++i) m(i, i) = 2.0 * p.s44;
  return m;
}

inline Voigt strain_to_efg(const Voigt& strain, const GradientElasticParams& p) {
  return gradient_elastic_matrix(p) * strain;
}

inline Mat3 voigt_to_matrix(const Voigt& v) {
  Mat3 m;
  m << v(0), v(5), v(4), v(5), v(1), v(3), v(4), v(3), v(2);
  return m;
}

// Bose-Einstein occupation with the energy h f of a frequency numeral f.
inline double bose_einstein(double f, double temperature) {
  if (!(temperature > 0.0)) return 0.0;
  return 1.0 / std::expm1(constants::h * f / (constants::k_b * temperature));
}

// Debye density of states V w^2 / (2 pi^2 v^3) and single-mode coupling
// hbar (w / v)^2 / (2 rho w V).
inline double phonon_dos(double w, double volume, double v) { return volume * w * w / (2.0 * pi * pi * v * v * v); }

inline double phonon_coupling(double w, double volume, double rho, double v) {
  return constants::hbar * (w / v) * (w / v) / (2.0 * rho * w * volume);
}

struct PhononRate {
  double nbar = 0.0;
  double c_coeff = 0.0;       // (b0 / Q) e q S / (2I(2I-1) hbar)
  double dos_coupling = 0.0;  // D(Delta) g(Delta), volume-free
  double j_perp = 0.0;        // bound on the absorption spectral density at -Delta
  double j_emit = 0.0;        // emission counterpart (nbar + 1)
  double gamma10 = 0.0;       // I^2 J_perp
  double gamma01 = 0.0;
};

inline PhononRate phonon_rate_bound(double delta, double temperature, double b0_over_q, SpinLength s,
                                    double q_moment, const GradientElasticParams& p,
                                    Convention conv = Convention::paper_literal, double volume = 1.0) {
  p.validate();
  if (!(delta > 0.0)) throw DomainError("phonon_rate_bound needs Delta > 0");
  if (temperature < 0.0) throw DomainError("phonon_rate_bound needs T >= 0");
  if (s.two_i < 2) throw DomainError("phonon_rate_bound needs I >= 1");
  PhononRate r;
  r.nbar = bose_einstein(delta / phase_factor(conv), temperature);
  const double energy = constants::e_charge * q_moment * p.s_typical / (s.two_i * (s.two_i - 1.0));
  r.c_coeff = b0_over_q * energy_to_coefficient(energy, conv);
  r.dos_coupling = phonon_dos(delta, volume, p.v_sound) * phonon_coupling(delta, volume, p.rho_mass, p.v_sound);
  r.j_perp = r.c_coeff * r.c_coeff * r.dos_coupling * r.nbar;
  r.j_emit = r.c_coeff * r.c_coeff * r.dos_coupling * (r.nbar + 1.0);
  const double spin = s.value();
  r.gamma10 = spin * spin * r.j_perp;
  r.gamma01 = spin * spin * r.j_emit;
  return r;
}

struct PhononChargeComparison {
  PhononRate phonon;
  std::optional<double> charge_rate;       // kappa-independent single-TLF bound
  std::optional<double> ratio;             // phonon / charge
  std::optional<double> crossover_distance;  // TLF distance where both rates agree
};

inline PhononChargeComparison phonon_vs_charge_report(const CatQubitFrame& frame, const std::optional<TLF>& tlf,
                                                      double temperature, const GradientElasticParams& p,
                                                      double q_moment = constants::barn,
                                                      Convention conv = Convention::paper_literal) {
  PhononChargeComparison out;
  out.phonon = phonon_rate_bound(frame.delta, temperature, frame.b0 / frame.q, frame.spin, q_moment, p, conv);
  if (!tlf) return out;
  const double beta = beta_bound(frame.spin, q_moment, frame.q, tlf_delta_v_xx(*tlf), conv);
  const auto rates = single_tlf_rate(frame, *tlf, frame.b0, beta);
  out.charge_rate = rates.bound.at(1);
  out.ratio = out.phonon.gamma10 / *out.charge_rate;
  // Charge-noise rate scales as distance^-8.
  out.crossover_distance = tlf->distance * std::pow(*out.charge_rate / out.phonon.gamma10, 1.0 / 8.0);
  return out;
}

}  // namespace skcat
