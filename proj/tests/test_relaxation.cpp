#include <gtest/gtest.h>

#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "skcat/relaxation.hpp"

using namespace skcat;

namespace {

const SpinLength kSb(7);

// Principal values with the given Q and eta for I = 7/2 and q = 1 barn.
PASFrame make_pas(double q_hz, double eta, const Mat3& rotation = Mat3::Identity()) {
  const double dzz = q_hz * 42.0 * constants::hbar / (constants::e_charge * constants::barn);
  const Vec3 d(dzz * (eta - 1.0) / 2.0, -dzz * (1.0 + eta) / 2.0, dzz);
  return efg_to_pas(rotation * d.asDiagonal() * rotation.transpose(), constants::barn, kSb);
}

Mat3 random_symmetric(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat3 a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = g(rng);
  return 0.5 * (a + a.transpose());
}

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  return q.normalized().toRotationMatrix();
}

double offdiag_norm(const Mat3& m) {
  Mat3 o = m;
  o.diagonal().setZero();
  return o.norm();
}

const CatQubitFrame& sb_frame() {
  static const CatQubitFrame f = fit_cat_frame(kSb, 0.75, 1e5);
  return f;
}

double beta_at(double distance) {
  TLF t;
  t.distance = distance;
  return beta_bound(kSb, constants::barn, 1e5, tlf_delta_v_xx(t));
}

}  // namespace

TEST(PerturbationFrame, DiagonalGivesNoTilt) {
  const auto pas = make_pas(1e5, 0.6);
  const auto p = perturbation_frame(pas, Mat3(Vec3(1e18, -3e17, 2e17).asDiagonal()));
  EXPECT_EQ(p.beta_x, 0.0);
  EXPECT_EQ(p.beta_y, 0.0);
  EXPECT_NE(p.delta_q, 0.0);
  EXPECT_NE(p.delta_eta, 0.0);
}

TEST(PerturbationFrame, SingleOffDiagonalElement) {
  const auto pas = make_pas(1e5, 0.6);
  const double eps = 1e17;
  Mat3 dv = Mat3::Zero();
  dv(0, 2) = dv(2, 0) = eps;
  const auto p = perturbation_frame(pas, dv);
  EXPECT_NEAR(p.beta_x, eps / (pas.d0(2) - pas.d0(0)), 1e-15);
  EXPECT_EQ(p.beta_y, 0.0);
  EXPECT_EQ(p.delta_q, 0.0);
}

TEST(PerturbationFrame, GeneratorPropertiesAndNorm) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    const auto pas = make_pas(1e5, 0.3 + 0.01 * k, random_rotation(rng));
    const Mat3 dv = 1e-3 * pas.d0(2) * random_symmetric(rng);
    const auto p = perturbation_frame(pas, dv);
    EXPECT_NEAR((p.s_delta + p.s_delta.transpose()).norm(), 0.0, 1e-15 * p.s_delta.norm());
    EXPECT_NEAR(p.omega.norm(), dv.norm(), 1e-12 * dv.norm());
  }
}

// Re-diagonalize V + dV in the first-order axes: the leftover off-diagonal
// part is second order in dV.
TEST(PerturbationFrame, FirstOrderResidualScaling) {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 10; ++k) {
    const Mat3 rot = random_rotation(rng);
    const auto pas = make_pas(1e5, 0.2 + 0.07 * k, rot);
    const Mat3 v = pas.r0 * pas.d0.asDiagonal() * pas.r0.transpose();
    const Mat3 dir = random_symmetric(rng);
    auto residual = [&](double scale) {
      const Mat3 dv = scale * pas.d0(2) * dir;
      const auto p = perturbation_frame(pas, dv);
      const Mat3 r = perturbed_axes(pas, p);
      return offdiag_norm(r.transpose() * (v + dv) * r);
    };
    const double ratio = residual(1e-3) / residual(5e-4);
    EXPECT_NEAR(ratio, 4.0, 0.05) << k;
  }
}

TEST(PerturbationFrame, ScaleInvariantBeta) {
  std::mt19937_64 rng(21);
  const Mat3 rot = random_rotation(rng);
  const Mat3 dir = random_symmetric(rng);
  const auto a = make_pas(1e5, 0.7, rot);
  const auto b = make_pas(3.7e5, 0.7, rot);
  const auto pa = perturbation_frame(a, 1e-3 * a.d0(2) * dir);
  const auto pb = perturbation_frame(b, 1e-3 * b.d0(2) * dir);
  EXPECT_NEAR(pa.beta_x, pb.beta_x, 1e-12 * std::abs(pa.beta_x));
  EXPECT_NEAR(pa.beta_y, pb.beta_y, 1e-12 * std::abs(pa.beta_y));
}

TEST(PerturbationFrame, Errors) {
  const auto pas = make_pas(1e5, 0.6);
  Mat3 bad = Mat3::Zero();
  bad(0, 1) = 1e17;
  EXPECT_THROW(perturbation_frame(pas, bad), NonSymmetric);
  Warnings w;
  perturbation_frame(pas, 0.5 * pas.d0(2) * Mat3::Identity(), &w);
  EXPECT_FALSE(w.empty());
  EXPECT_THROW(perturbation_frame(PASFrame{}, Mat3::Zero()), DegenerateDenominator);
}

TEST(TlfField, Magnitudes) {
  TLF t;
  t.distance = 10e-9;
  t.jump = 1e-10;
  const double v = tlf_delta_v_xx(t);
  EXPECT_NEAR(std::abs(v), 6.0 * 8.9875517923e9 * 1.602176634e-19 * 1e-10 / 1e-32, 1e-12 * std::abs(v));
  t.distance = 20e-9;
  EXPECT_NEAR(tlf_delta_v_xx(t) / v, 1.0 / 16.0, 1e-14);
  t.jump = 0.0;
  EXPECT_EQ(tlf_delta_v(t).norm(), 0.0);
  const Mat3 m = tlf_delta_v(TLF{});
  EXPECT_EQ(offdiag_norm(m), 0.0);
  EXPECT_EQ(m(1, 1), 0.0);
  EXPECT_THROW(tlf_delta_v_xx(TLF{-1.0}), DomainError);
}

TEST(BetaBound, ScaleAtTenNanometres) {
  const double qb = 1e5 * beta_at(10e-9);
  EXPECT_GT(qb, 0.1);
  EXPECT_LT(qb, 10.0);
  // e q |dV| / (2I(2I-1) hbar) with dV = 6 k e dr / x^4.
  EXPECT_NEAR(qb, 6.0 * 8.9875517923e9 * std::pow(1.602176634e-19, 2) * 1e-28 * 1e-10 / 1e-32 / (42.0 * 1.054571817e-34),
              1e-12);
  // Without numerical prefactors the same scale is k e^2 q dr / (hbar x^4), about 2.2 Hz.
  const double free = beta_scale_prefactor_free(10e-9, 1e-10, constants::barn);
  EXPECT_NEAR(free, 2.2, 0.05);
  EXPECT_NEAR(free / qb, 7.0, 1e-12);
  TLF t;
  EXPECT_NEAR(beta_bound(kSb, constants::barn, 2e5, tlf_delta_v_xx(t)), 0.5 * beta_at(10e-9), 1e-18);
}

// The exact perturbed frame respects the bound and gives dQ ~ 1 Hz and
// d eta ~ 1e-5 for a 10 nm fluctuator.
TEST(BetaBound, PerturbedFrameAtTenNanometres) {
  std::mt19937_64 rng(2);
  for (double eta : {0.5, 0.75, 1.0 - 1e-9}) {
    for (int k = 0; k < 20; ++k) {
      const auto pas = make_pas(1e5, eta, random_rotation(rng));
      TLF t;
      const auto p = perturbation_frame(pas, tlf_delta_v(t));
      const double bound = beta_at(10e-9);
      EXPECT_LE(std::abs(p.beta_x), bound * (1.0 + 1e-9));
      EXPECT_LE(std::abs(p.beta_y), bound * (1.0 + 1e-9));
      EXPECT_LT(std::abs(p.delta_q), 10.0);
      EXPECT_LT(std::abs(p.delta_eta), 1e-4);
    }
    TLF t;
    t.direction = Vec3::UnitZ();
    const auto p = perturbation_frame(make_pas(1e5, eta), tlf_delta_v(t));
    EXPECT_GT(std::abs(p.delta_q), 0.1);
    EXPECT_GT(std::abs(p.delta_eta), 1e-6);
  }
}

TEST(SingleTlf, BitflipTimes) {
  const auto& f = sb_frame();
  TLF t;
  t.distance = 10e-9;
  auto r = single_tlf_rate(f, t, f.b0, beta_at(10e-9));
  EXPECT_GT(1.0 / r.bound.at(1), 1e3);
  t.distance = 5e-9;
  r = single_tlf_rate(f, t, f.b0, beta_at(5e-9));
  EXPECT_GT(1.0 / r.bound.at(1), 2.0);
  EXPECT_LT(1.0 / r.bound.at(1), 20.0);
  // Upward and downward rates coincide for symmetric classical noise.
  EXPECT_EQ(lorentzian_weight(t.kappa, r.gap.at(1)), lorentzian_weight(t.kappa, -r.gap.at(1)));
}

TEST(SingleTlf, OppositeParityLevelsAndLeakage) {
  const auto& f = sb_frame();
  const auto ops = make_spin_ops(kSb);
  const auto sp = eigensystem_with_parity(-f.b0 * ops.iz + build_quadrupole(ops, f.q, f.eta), kSb);
  for (Eigen::Index m = 0; m < sp.energies.size(); ++m)
    for (Eigen::Index n = 0; n < sp.energies.size(); ++n) {
      if (sp.parities[m] != sp.parities[n]) continue;
      EXPECT_LT(std::abs(sp.vectors.col(m).dot(ops.ix * sp.vectors.col(n))), 1e-10);
      EXPECT_LT(std::abs(sp.vectors.col(m).dot(ops.iy * sp.vectors.col(n))), 1e-10);
    }
  TLF t;
  t.kappa = 0.5 * f.delta;
  const auto r = single_tlf_rate(f, t, f.b0, 1e-5);
  for (const auto& [m, g] : r.gamma) {
    EXPECT_NE(sp.parities[m], sp.parities[0]);
    EXPECT_LE(r.matrix_element.at(m), g);
    if (m >= 2) EXPECT_LT(g, r.gamma.at(1));
  }
}

TEST(SingleTlf, BoundDominatesEveryKappa) {
  const auto& f = sb_frame();
  for (double k = 1e-3 * f.delta; k < 1e3 * f.delta; k *= 1.7) {
    TLF t;
    t.kappa = k;
    const auto r = single_tlf_rate(f, t, f.b0, 3e-5);
    for (const auto& [m, g] : r.gamma) EXPECT_LE(g, r.bound.at(m) * (1.0 + 1e-12));
  }
  // Motional narrowing: the rate falls as 1/kappa for kappa >> gap.
  TLF a, b;
  a.kappa = 1e3 * f.delta;
  b.kappa = 2e3 * f.delta;
  EXPECT_NEAR(single_tlf_rate(f, a, f.b0, 1e-5).gamma.at(1) / single_tlf_rate(f, b, f.b0, 1e-5).gamma.at(1), 2.0,
              1e-5);
}

TEST(MultiTlf, ReductionAdditivityAndDominance) {
  const auto& f = sb_frame();
  TLF near;
  near.distance = 10e-9;
  near.kappa = 0.5 * f.delta;
  const double one = single_tlf_rate(f, near, f.b0, beta_at(10e-9)).gamma.at(1);
  EXPECT_NEAR(multi_tlf_rate(f, {near}, f.b0).rates.gamma.at(1), one, 1e-12 * one);
  EXPECT_NEAR(multi_tlf_rate(f, {near, near}, f.b0).rates.gamma.at(1), 2.0 * one, 1e-12 * one);

  std::vector<TLF> list{near};
  TLF far = near;
  far.distance = 30e-9;
  for (int k = 0; k < 5; ++k) list.push_back(far);
  const auto all = multi_tlf_rate(f, list, f.b0);
  EXPECT_NEAR(all.rates.gamma.at(1) / one, 1.0, 0.01);
  const double others = all.rates.gamma.at(1) - one;
  EXPECT_GT(one, others);
  EXPECT_EQ(all.beta_max, beta_at(10e-9));
  EXPECT_GE(all.beta_max_bound.at(1), all.rates.gamma.at(1));
}

TEST(DirectSimulation, ZeroCouplingStaysInGround) {
  const auto unit = fit_cat_frame(kSb, 0.75, 1.0);
  const NuclearSpinModel model{kSb, 1.0, 0.75, 1.0, unit.b0};
  const auto sim = direct_transition_sim(model, {0.0, unit.delta / 2.0, 0.0}, {1.0, 10.0, 30.0, 50.0}, 100, 1);
  for (double p : sim.p1) EXPECT_LT(p, 1e-20);
  EXPECT_EQ(sim.golden_rule, 0.0);
}

TEST(DirectSimulation, GoldenRuleSlope) {
  const auto unit = fit_cat_frame(kSb, 0.75, 1.0);
  const NuclearSpinModel model{kSb, 1.0, 0.75, 1.0, unit.b0};
  std::vector<double> grid;
  for (int k = 1; k <= 20; ++k) grid.push_back(20.0 * k);
  const auto sim = direct_transition_sim(model, {0.02, unit.delta / 2.0, 0.0}, grid, 800, 17, 2);
  EXPECT_LT(std::abs(sim.slope - sim.golden_rule), 3.0 * sim.slope_stderr)
      << sim.slope << " +- " << sim.slope_stderr << " vs " << sim.golden_rule;
  EXPECT_LT(sim.depletion, 0.1);
}

TEST(DirectSimulation, StrongDriveRejected) {
  const auto unit = fit_cat_frame(kSb, 0.75, 1.0);
  const NuclearSpinModel model{kSb, 1.0, 0.75, 1.0, unit.b0};
  EXPECT_THROW(direct_transition_sim(model, {2.0, unit.delta / 2.0, 0.0}, {10.0, 100.0, 200.0}, 100, 3),
               PerturbationTooStrong);
  EXPECT_THROW(direct_transition_sim(model, {0.02, 1.0, 0.0}, {1.0}, 100, 3), DomainError);
}
