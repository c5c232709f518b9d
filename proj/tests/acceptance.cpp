// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.  Timings are single-threaded wall clock.  Criterion
// numbers given on the command line restrict the run to those criteria.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "skcat/reports.hpp"
#include "skcat/skcat.hpp"

using namespace skcat;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0, ran = 0;
std::set<int> selected;

void report(int id, const std::string& title, const std::function<void(Outcome&)>& body) {
  if (!selected.empty() && !selected.count(id)) return;
  ++ran;
  Outcome o;
  o.detail.precision(6);
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  if (!o.pass) ++failures;
  std::printf("C%-2d %s  %s:%s\n", id, o.pass ? "PASS" : "FAIL", title.c_str(), o.detail.str().c_str());
  std::fflush(stdout);
}

bool within_factor(double value, double target, double factor) {
  return value >= target / factor && value <= target * factor;
}

// t^2 / pi * int_0^{1/t} S_Delta(omega) d omega, piecewise Gauss-Kronrod in
// log omega above the kinks at omega_ir and 2 omega_ir.
double cutoff_quadrature(double t, const OneOverFSpec& spec, double d2) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  auto s = [&](double w) { return s_delta(w, spec, d2); };
  double acc = GK::integrate(s, 0.0, spec.omega_ir, 0, 0.0) + GK::integrate(s, spec.omega_ir, 2.0 * spec.omega_ir, 0, 0.0);
  const double a = std::log(2.0 * spec.omega_ir), b = std::log(1.0 / t);
  const int pieces = std::max(4, static_cast<int>(4.0 * (b - a)));
  for (int k = 0; k < pieces; ++k) {
    const double lo = a + (b - a) * k / pieces, hi = a + (b - a) * (k + 1) / pieces;
    acc += GK::integrate([&](double u) { return s(std::exp(u)) * std::exp(u); }, lo, hi, 0, 0.0);
  }
  return t * t / pi * acc;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  report(1, "clock field b0/Q ranges", [](Outcome& o) {
    for (int two_i : {7, 9}) {
      const double lo = two_i == 7 ? 6.0 : 9.0, hi = two_i == 7 ? 8.0 : 11.0;
      for (double eta : {0.5, 0.75, 1.0}) {
        const auto t0 = Clock::now();
        const double b0 = find_clock_transition(SpinLength(two_i), eta).b0;
        const double dt = seconds_since(t0);
        o.detail << " I=" << two_i << "/2 eta=" << eta << ": " << b0 << " (" << dt << " s)";
        o.require(b0 >= lo && b0 <= hi, "b0/Q range");
        o.require(dt < 10.0, "runtime");
      }
    }
  });

  report(2, "cat fidelity F >= 0.99 for eta >= 0.5 and monotone", [](Outcome& o) {
    for (int two_i : {7, 9}) {
      const SpinLength s(two_i);
      double prev = -1.0, worst_drop = 0.0, min_high = 1.0;
      for (int k = 0; k < 20; ++k) {
        const double eta = 0.1 + 0.9 * k / 19.0;
        const double f = fit_cat_frame(s, eta).fidelity;
        if (prev >= 0.0) worst_drop = std::max(worst_drop, prev - f);
        prev = f;
        if (eta >= 0.5) min_high = std::min(min_high, f);
      }
      min_high = std::min(min_high, fit_cat_frame(s, 0.5).fidelity);
      o.detail << " I=" << two_i << "/2: min F(eta>=0.5) = " << min_high << ", largest drop " << worst_drop;
      o.require(min_high >= 0.99, "F >= 0.99 at I=" + std::to_string(two_i) + "/2");
      o.require(worst_drop <= 1e-4, "monotonicity at I=" + std::to_string(two_i) + "/2");
    }
  });

  report(3, "field anchors at Q = 100 kHz", [](Outcome& o) {
    struct Anchor {
      const char* iso;
      double lo, hi;
    };
    for (const Anchor a : {Anchor{"Sb-123", 110.0, 130.0}, Anchor{"Bi-209", 134.0, 154.0}}) {
      const auto p = isotope_preset(a.iso);
      for (double eta : {0.5, 0.75, 1.0}) {
        const double mt = 1e3 * find_clock_transition(SpinLength(p.two_i), eta).b0 * 1e5 / p.gamma_n;
        o.detail << " " << a.iso << " eta=" << eta << ": " << mt << " mT";
        o.require(mt >= a.lo && mt <= a.hi, std::string(a.iso) + " in range");
      }
    }
  });

  report(4, "enhancement bound arithmetic", [](Outcome& o) {
    const double a = enhancement_bound(1e5, 0.01, 1.0), b = enhancement_bound(1e5, 0.05, 1.0);
    o.detail << " " << a << " s, " << b << " s";
    o.require(std::abs(a / 3.99 - 1.0) < 0.01, "3.99 s");
    o.require(std::abs(b / 99.7 - 1.0) < 0.01, "99.7 s");
  });

  report(5, "T2,ct at the reference noise parameters", [](Outcome& o) {
    const auto f = fit_cat_frame(SpinLength(7), 1.0, 1e5);
    const double d2 = f.curvature;
    const double targets[2][3] = {{0.01, 4.7, 3.4}, {0.05, 190.0, 6.3}};
    for (const auto& tg : targets) {
      const OneOverFSpec spec{nu_from_t2(tg[0], 1e-5), 1e-5, 1e12};
      const auto r1 = t2ct_solve(spec, d2, Lambda2Threshold::lambda2_eq_1);
      const auto r2 = t2ct_solve(spec, d2, Lambda2Threshold::lambda2_eq_2);
      const double ratio1 = r1.t2ct / r1.short_time, ratio2 = r2.t2ct / r2.short_time;
      o.detail << " T2*=" << tg[0] << ": T2ct " << r1.t2ct << " s (Lambda2=1), " << r2.t2ct
               << " s (Lambda2=2); T2ct/Ts " << ratio1 << " (Lambda2=1), " << ratio2 << " (Lambda2=2);";
      o.require(within_factor(r1.t2ct, tg[1], 2.0), "Lambda2=1 time within factor 2 of " + format_number(tg[1]) + " s");
      o.require(std::abs(ratio2 / tg[2] - 1.0) < 0.25, "ratio " + format_number(tg[2]) + " within 25%");
    }
  });

  report(6, "dephasing oracles", [](Outcome& o) {
    const auto t0 = Clock::now();
    const double sigma = 1.3, d2 = -0.8;
    const std::vector<double> grid{0.1, 0.3, 0.6, 1.0, 1.5, 2.5};
    const auto lin = mc_coherence_quasistatic({sigma}, {0.0, 1.0, 0.0}, grid, 100000, 101);
    const auto clk = mc_coherence_quasistatic({sigma}, {0.0, 0.0, d2}, grid, 100000, 102);
    double worst = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      worst = std::max(worst, std::abs(lin.mean[k] - coherence_quasistatic_linear(grid[k], sigma)) / lin.stderr_abs(k));
      worst = std::max(worst, std::abs(clk.mean[k] - coherence_quasistatic_clock(grid[k], sigma, d2)) / clk.stderr_abs(k));
    }
    o.detail << " worst MC residual " << worst << " stderr;";
    o.require(worst < 3.0, "MC within 3 stderr");

    const double curvature = fit_cat_frame(SpinLength(7), 1.0, 1e5).curvature;
    double gap = 0.0;
    for (double t2 : {0.01, 0.05}) {
      const OneOverFSpec spec{nu_from_t2(t2, 1e-5), 1e-5, 1e12};
      for (double t : {0.1, 1.0, 10.0, 100.0, 1000.0}) {
        const double exact = lambda2_clock(t, spec, curvature);
        gap = std::max(gap, std::abs(exact / cutoff_quadrature(t, spec, curvature) - 1.0));
      }
    }
    o.detail << " polylog vs quadrature relative gap " << gap << ";";
    o.require(gap < 0.01, "polylog within 1%");
    const double dt = seconds_since(t0);
    o.detail << " " << dt << " s";
    o.require(dt < 120.0, "runtime");
  });

  report(7, "relaxation anchors", [](Outcome& o) {
    const SpinLength s(7);
    const auto f = fit_cat_frame(s, 0.75, 1e5);
    auto inverse_rate = [&](double x) {
      TLF t;
      t.distance = x;
      return 1.0 / single_tlf_rate(f, t, f.b0, beta_bound(s, constants::barn, 1e5, tlf_delta_v_xx(t))).bound.at(1);
    };
    const double t10 = inverse_rate(10e-9), t5 = inverse_rate(5e-9);
    o.detail << " 1/Gamma10 = " << t10 << " s at 10 nm, " << t5 << " s at 5 nm;";
    o.require(t10 > 1e3, "10 nm above 1e3 s");
    o.require(t5 >= 1.0 && t5 <= 10.0, "5 nm in [1, 10] s");

    const auto unit = fit_cat_frame(s, 0.75, 1.0);
    const NuclearSpinModel model{s, 1.0, 0.75, 1.0, unit.b0};
    std::vector<double> grid;
    for (int k = 1; k <= 40; ++k) grid.push_back(10.0 * k);
    const auto sim = direct_transition_sim(model, {0.02, unit.delta / 2.0, 0.0}, grid, 4000, 7);
    const double z = std::abs(sim.slope - sim.golden_rule) / sim.slope_stderr;
    o.detail << " simulated slope " << sim.slope << " +- " << sim.slope_stderr << " vs golden rule " << sim.golden_rule
             << " (" << z << " stderr)";
    o.require(z < 3.0, "golden rule within 3 stderr");
  });

  report(8, "phonon anchors", [](Outcome& o) {
    const double nbar = bose_einstein(50e3, 0.01);
    const auto r = phonon_rate_bound(5e4, 0.01, 10.0, SpinLength(7), 1e-28, {});
    double spread = 0.0;
    for (double v : {1e-27, 1e-20, 1.0, 1e6}) {
      const auto rv = phonon_rate_bound(5e4, 0.01, 10.0, SpinLength(7), 1e-28, {}, Convention::paper_literal, v);
      spread = std::max(spread, std::abs(rv.j_perp / r.j_perp - 1.0));
    }
    o.detail << " nbar " << nbar << ", J_perp " << r.j_perp << " Hz, volume spread " << spread;
    o.require(std::abs(nbar / 4200.0 - 1.0) <= 0.05, "nbar");
    o.require(r.j_perp <= 1e-22, "J_perp bound");
    o.require(spread < 1e-12, "volume independence");
  });

  report(9, "control anchors", [](Outcome& o) {
    const SpinLength s(7);
    DriveSpec d;
    d.b_perp = 1.0;
    d.theta_axis = 0.5 * pi;
    const double side = rabi_params(s, 0.9, d).f_theta;
    d.theta_axis = 0.0;
    const double along = rabi_params(s, 0.9, d).f_theta;
    o.detail << " f(pi/2) = " << side << " vs sin 0.9 = " << std::sin(0.9) << ", f(0) = " << along << ";";
    o.require(std::abs(side / std::sin(0.9) - 1.0) < 0.1, "f(pi/2)");
    o.require(std::abs(along / 0.045 - 1.0) < 0.1, "f(0)");

    const auto frame = fit_cat_frame(s, 0.75, 1.0);
    const NuclearSpinModel model{s, 1.0, 0.75, 1.0, frame.b0};
    DriveSpec drive;
    drive.gamma_n = 1.0;
    drive.b_perp = 0.02 * frame.delta / s.value();
    drive.theta_axis = 0.5 * pi;
    const double om = rabi_params(s, frame.theta0, drive).omega_r;
    std::vector<double> grid;
    for (int k = 1; k <= 60; ++k) grid.push_back(k * 1.5 * rabi_period(om) / 60.0);
    const auto ev = driven_evolution(model, frame, drive, grid);
    const double fitted = fit_rabi(ev.t, ev.p1, om).omega;
    o.detail << " simulated Rabi frequency / closed form = " << fitted / om;
    o.require(std::abs(fitted / om - 1.0) < 0.02, "Rabi frequency within 2%");
  });

  report(10, "gate anchors and fidelity map", [](Outcome& o) {
    HyperfineGateParams p;
    p.a_max = 101.5e6;
    const auto ramp = make_ramp(p);
    const double expected = p.tau_r() + pi / p.a_max;
    o.detail << " T = " << ramp.total_time * 1e9 << " ns;";
    o.require(std::abs(ramp.total_time - expected) <= 1e-15 * expected, "T = tau_r + pi/A");
    o.require(std::abs(ramp.total_time * 1e9 - 34.0) < 0.5, "T about 34 ns");

    Config cfg;
    RunContext ctx;
    const auto t0 = Clock::now();
    const Report rep = cmd_gatemap(cfg, ctx);
    const double dt = seconds_since(t0);
    const Dataset& map = rep.datasets.at(0);
    const Dataset& contour = rep.datasets.at(1);
    const std::size_t ie = contour.column_index("eta"), ib = contour.column_index("max_f_g");
    bool region = false;
    double best_low = 0.0, first_eta = 2.0;
    for (const auto& row : contour.rows) {
      if (row[ie] >= 0.7 && row[ib] >= 0.99) region = true, first_eta = std::min(first_eta, row[ie]);
      if (row[ie] <= 0.5 && !std::isnan(row[ib])) best_low = std::max(best_low, row[ib]);
    }
    const std::size_t iz = map.column_index("residual_over_stderr");
    std::size_t beyond = 0, counted = 0;
    double worst = 0.0;
    for (const auto& row : map.rows) {
      if (std::isnan(row[iz])) continue;
      ++counted;
      worst = std::max(worst, row[iz]);
      if (row[iz] >= 3.0) ++beyond;
    }
    o.detail << " F_g >= 0.99 region from eta = " << first_eta << "; best F_g at eta <= 0.5 = " << best_low << "; "
             << beyond << " of " << counted << " points beyond 3 stderr (worst " << worst << "); map " << dt << " s";
    o.require(region, "region for eta >= 0.7");
    o.require(best_low < 0.99, "no point at eta <= 0.5");
    o.require(beyond == 0, "closed form vs sampled within 3 stderr everywhere");
    o.require(dt < 1800.0, "runtime");
  });

  report(11, "protocol identities", [](Outcome& o) {
    const SpinLength s(7);
    const auto b = make_cat_basis(s, fit_cat_frame(s, 0.75).theta0);
    Rng rng = make_rng(11, 0);
    double worst = 1.0;
    for (int k = 0; k < 100; ++k) {
      const Eigen::Vector4cd a = haar_state(rng, 4);
      const CVec psi = embed_two_qubit(b, a);
      const CVec target = cz_target(b, a);
      for (int outcome : {+1, -1}) worst = std::min(worst, std::norm(target.dot(cz_protocol(b, psi, outcome).state)));
    }
    o.detail << " worst CZ fidelity 1 - " << 1.0 - worst << ";";
    o.require(worst > 1.0 - 1e-10, "CZ fidelity");

    double readout_err = 0.0;
    for (int k = 0; k < 100; ++k) {
      const CVec q = haar_state(rng, 2);
      const auto r = readout(b, CVec(q(0) * b.zero + q(1) * b.one));
      readout_err = std::max({readout_err, std::abs(r.p_plus - std::norm(q(1))), std::abs(r.p_minus - std::norm(q(0)))});
    }
    o.detail << " readout error " << readout_err << ";";
    o.require(readout_err < 1e-12, "readout distributions");

    double init_err = 0.0;
    for (double theta : {0.3, 0.9, 1.2, 0.5 * pi}) {
      const auto r = initialize(s, theta, 3);
      init_err = std::max(init_err, std::abs(r.lambda_sq - 0.5 * (1.0 + std::pow(std::cos(theta), 7))));
    }
    o.detail << " lambda^2 error " << init_err;
    o.require(init_err <= 1e-12, "initialization weight");
  });

  report(12, "structural invariants", [](Outcome& o) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double comm = 0.0, same_parity = 0.0, coherent = 0.0, trace = 0.0;
    for (int two_i : {2, 7, 9}) {
      const SpinLength s(two_i);
      const auto ops = make_spin_ops(s);
      const CMat p = parity_label_operator(s);
      for (int k = 0; k < 20; ++k) {
        const NuclearSpinModel m{s, 1.0, u(rng), 1.0, 12.0 * u(rng)};
        const CMat h = build_hamiltonian(ops, m);
        comm = std::max(comm, commutator(h, p).cwiseAbs().maxCoeff() / h.cwiseAbs().maxCoeff());
        const auto sp = eigensystem_with_parity(h, s);
        for (Eigen::Index a = 0; a < sp.energies.size(); ++a)
          for (Eigen::Index c = 0; c < sp.energies.size(); ++c)
            if (sp.parities[a] == sp.parities[c])
              same_parity = std::max({same_parity, std::abs(sp.vectors.col(a).dot(ops.ix * sp.vectors.col(c))),
                                      std::abs(sp.vectors.col(a).dot(ops.iy * sp.vectors.col(c)))});
        const double th = pi * u(rng), ph = 2.0 * pi * u(rng);
        const CMat gen = -I_unit * th * (-std::sin(ph) * ops.ix + std::cos(ph) * ops.iy);
        CVec top = CVec::Zero(s.dim());
        top(0) = 1.0;
        coherent = std::max(coherent, (coherent_state(s, th, ph) - gen.exp() * top).norm());
      }
      // Gauss-Legendre in cos(theta) times a uniform phi grid integrates the
      // multipole expansion exactly.
      std::vector<double> x, w;
      const int n = two_i + 2, nphi = 2 * two_i + 3;
      Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
      for (int i = 1; i < n; ++i) jac(i, i - 1) = jac(i - 1, i) = i / std::sqrt(4.0 * i * i - 1.0);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
      std::vector<SphereSample> grid;
      std::vector<double> weight;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < nphi; ++j) {
          grid.push_back({std::acos(es.eigenvalues()(i)), 2.0 * pi * j / nphi});
          weight.push_back(2.0 * std::pow(es.eigenvectors()(0, i), 2) * 2.0 * pi / nphi);
        }
      CMat a = CMat::Random(s.dim(), s.dim());
      CMat rho = a * a.adjoint();
      rho /= rho.trace().real();
      const auto wf = wigner_function(rho, s, grid);
      double acc = 0.0;
      for (std::size_t k = 0; k < wf.size(); ++k) acc += weight[k] * wf[k];
      trace = std::max(trace, std::abs(acc * s.dim() / (4.0 * pi) - 1.0));
    }
    o.detail << " [H, P] " << comm << ", same-parity Ix/Iy " << same_parity << ", coherent-state forms " << coherent
             << ", Wigner trace " << trace << ";";
    o.require(comm < 1e-12, "[H, P] = 0");
    o.require(same_parity < 1e-10, "opposite-parity matrix elements");
    o.require(coherent < 1e-10, "coherent-state forms agree");
    o.require(trace < 1e-10, "Wigner trace rule");

    // First-order perturbed axes leave a residual quadratic in dV.
    double worst_ratio = 0.0;
    for (int k = 0; k < 10; ++k) {
      Eigen::Quaterniond qr(u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5);
      const Mat3 rot = qr.normalized().toRotationMatrix();
      const double eta = 0.2 + 0.07 * k, dzz = 1e20;
      const Vec3 d(dzz * (eta - 1.0) / 2.0, -dzz * (1.0 + eta) / 2.0, dzz);
      const auto pas = efg_to_pas(rot * d.asDiagonal() * rot.transpose(), constants::barn, SpinLength(7));
      const Mat3 v = pas.r0 * pas.d0.asDiagonal() * pas.r0.transpose();
      Mat3 dir = Mat3::Random();
      dir = (0.5 * (dir + dir.transpose())).eval();
      auto residual = [&](double scale) {
        const Mat3 dv = scale * pas.d0(2) * dir;
        const Mat3 r = perturbed_axes(pas, perturbation_frame(pas, dv));
        Mat3 m = r.transpose() * (v + dv) * r;
        m.diagonal().setZero();
        return m.norm();
      };
      worst_ratio = std::max(worst_ratio, std::abs(residual(1e-3) / residual(5e-4) - 4.0));
    }
    o.detail << " residual halving ratio within " << worst_ratio << " of 4";
    o.require(worst_ratio < 0.05, "quadratic residual");
  });

  std::printf("%d of %d criteria failed\n", failures, ran);
  return failures == 0 ? 0 : 1;
}
