#include <gtest/gtest.h>

#include <random>

#include "skcat/phonon.hpp"

using namespace skcat;

namespace {

Voigt voigt(double xx, double yy, double zz, double yz, double xz, double xy) {
  Voigt v;
  v << xx, yy, zz, yz, xz, xy;
  return v;
}

}  // namespace

TEST(GradientElastic, HydrostaticIsInvisible) {
  const GradientElasticParams p;
  const Voigt out = strain_to_efg(voigt(1e-6, 1e-6, 1e-6, 0, 0, 0), p);
  EXPECT_NEAR(out.norm(), 0.0, 1e-9 * p.s11 * 1e-6);
}

TEST(GradientElastic, ShearAndUniaxial) {
  const GradientElasticParams p;
  const Voigt shear = strain_to_efg(voigt(0, 0, 0, 1, 0, 0), p);
  EXPECT_EQ(shear(3), 2.0 * p.s44);
  EXPECT_EQ(shear.head<3>().norm(), 0.0);
  const Voigt axial = strain_to_efg(voigt(1, 0, 0, 0, 0, 0), p);
  EXPECT_EQ(axial(0), p.s11);
  EXPECT_EQ(axial(1), -0.5 * p.s11);
  EXPECT_EQ(axial(2), -0.5 * p.s11);
  EXPECT_EQ(axial.tail<3>().norm(), 0.0);
  // The normal response is traceless, so the EFG matrix is too.
  EXPECT_NEAR(voigt_to_matrix(axial).trace(), 0.0, 1e-6);
}

TEST(GradientElastic, Superposition) {
  const GradientElasticParams p;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int k = 0; k < 20; ++k) {
    Voigt a, b;
    for (int i = 0; i < 6; ++i) a(i) = g(rng), b(i) = g(rng);
    const double x = g(rng), y = g(rng);
    const Voigt lhs = strain_to_efg(x * a + y * b, p);
    const Voigt rhs = x * strain_to_efg(a, p) + y * strain_to_efg(b, p);
    EXPECT_NEAR((lhs - rhs).norm(), 0.0, 1e-12 * rhs.norm());
  }
}

TEST(PhononRate, ThermalOccupation) {
  const double nbar = bose_einstein(50e3, 0.01);
  EXPECT_NEAR(nbar / 4200.0, 1.0, 0.05);
  EXPECT_NEAR(nbar, 1.0 / std::expm1(6.62607015e-34 * 50e3 / (1.380649e-23 * 0.01)), 1e-9);
  // Occupations use h f under both conventions.
  const auto lit = phonon_rate_bound(5e4, 0.01, 10.0, SpinLength(7), 1e-28, {}, Convention::paper_literal);
  const auto ang = phonon_rate_bound(2.0 * pi * 5e4, 0.01, 10.0, SpinLength(7), 1e-28, {}, Convention::angular);
  EXPECT_NEAR(lit.nbar, ang.nbar, 1e-9 * lit.nbar);
}

TEST(PhononRate, OrderOfMagnitudeBound) {
  const auto r = phonon_rate_bound(5e4, 0.01, 10.0, SpinLength(7), 1e-28, {});
  EXPECT_LT(r.j_perp, 1e-23);
  EXPECT_GT(r.j_perp, 1e-24);
  EXPECT_NEAR(r.gamma10, 12.25 * r.j_perp, 1e-12 * r.gamma10);
}

TEST(PhononRate, VolumeCancels) {
  const auto a = phonon_rate_bound(5e4, 0.01, 10.0, SpinLength(7), 1e-28, {}, Convention::paper_literal, 1.0);
  for (double v : {1e-27, 1e-18, 1e3}) {
    const auto b = phonon_rate_bound(5e4, 0.01, 10.0, SpinLength(7), 1e-28, {}, Convention::paper_literal, v);
    EXPECT_NEAR(b.j_perp / a.j_perp, 1.0, 1e-12);
    EXPECT_NEAR(phonon_dos(5e4, v, 6500) * phonon_coupling(5e4, v, 2300, 6500) / a.dos_coupling, 1.0, 1e-12);
  }
}

TEST(PhononRate, ZeroTemperatureAndDetailedBalance) {
  const auto cold = phonon_rate_bound(5e4, 0.0, 10.0, SpinLength(7), 1e-28, {});
  EXPECT_EQ(cold.nbar, 0.0);
  EXPECT_EQ(cold.gamma10, 0.0);
  EXPECT_GT(cold.gamma01, 0.0);
  for (double t : {1e-6, 1e-3, 0.01, 1.0}) {
    const auto r = phonon_rate_bound(5e4, t, 10.0, SpinLength(7), 1e-28, {});
    EXPECT_NEAR(r.gamma10 / r.gamma01, r.nbar / (r.nbar + 1.0), 1e-12);
  }
  EXPECT_THROW(phonon_rate_bound(0.0, 0.01, 10.0, SpinLength(7), 1e-28, {}), DomainError);
  GradientElasticParams bad;
  bad.v_sound = -1.0;
  EXPECT_THROW(phonon_rate_bound(5e4, 0.01, 10.0, SpinLength(7), 1e-28, bad), DomainError);
}

TEST(PhononVsCharge, ChargeNoiseDominates) {
  const auto frame = fit_cat_frame(SpinLength(7), 0.75, 1e5);
  TLF tlf;
  tlf.distance = 10e-9;
  const auto c = phonon_vs_charge_report(frame, tlf, 0.01, {});
  ASSERT_TRUE(c.ratio.has_value());
  EXPECT_LT(*c.ratio, 1e-15);

  // The charge bound falls as r^-8, and at the crossover distance it meets
  // the phonon rate.
  tlf.distance = 1e-6;
  const auto far = phonon_vs_charge_report(frame, tlf, 0.01, {});
  EXPECT_NEAR(*far.charge_rate / *c.charge_rate, 1e-16, 1e-24);
  TLF cross = tlf;
  cross.distance = *c.crossover_distance;
  const auto at = phonon_vs_charge_report(frame, cross, 0.01, {});
  EXPECT_NEAR(*at.ratio, 1.0, 1e-9);

  const auto alone = phonon_vs_charge_report(frame, std::nullopt, 0.01, {});
  EXPECT_FALSE(alone.charge_rate.has_value());
  EXPECT_GT(alone.phonon.gamma10, 0.0);

  for (double eta : {0.5, 0.75, 1.0})
    for (double t : {1e-3, 0.01, 0.1}) {
      const auto fr = fit_cat_frame(SpinLength(7), eta, 1e5);
      EXPECT_LT(*phonon_vs_charge_report(fr, TLF{}, t, {}).ratio, 1.0);
    }
}
