#pragma once

// Figure-data generators behind the command-line tool.  Each cmd_* reads its
// own config section(s), runs the library, and returns datasets plus a short
// textual report.  Frequencies in the config are numerals in Hz; they are
// turned into Hamiltonian coefficients with phase_factor(convention).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include "skcat/core/parallel.hpp"
#include "skcat/core/random.hpp"
#include "skcat/core/units.hpp"
#include "skcat/dephasing.hpp"
#include "skcat/electron.hpp"
#include "skcat/io/config.hpp"
#include "skcat/io/dataset.hpp"
#include "skcat/phonon.hpp"
#include "skcat/relaxation.hpp"
#include "skcat/spectrum.hpp"
#include "skcat/wigner.hpp"

namespace skcat {

struct RunContext {
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  Convention convention = Convention::paper_literal;
  std::ostream* progress = nullptr;  // stderr in the CLI; null keeps quiet
};

struct Report {
  std::vector<Dataset> datasets;
  std::vector<std::string> lines;
};

// Physical model shared by all commands ([model] section).
struct ModelConfig {
  std::string isotope = "Sb-123";
  SpinLength spin{7};
  double gamma_n = 5.55e6;
  double hyperfine = 101.52e6;
  double q_hz = 1e5;
  double eta = 0.75;
};

inline ModelConfig read_model(Config& c) {
  ModelConfig m;
  m.isotope = c.get_string("model.isotope", m.isotope);
  if (m.isotope != "custom") {
    const auto p = isotope_preset(m.isotope);
    m.spin = SpinLength(p.two_i);
    m.gamma_n = p.gamma_n;
    m.hyperfine = p.hyperfine;
  }
  if (c.has("model.spin")) {
    try {
      m.spin = SpinLength::from_double(c.get_double("model.spin", 3.5));
    } catch (const DomainError& e) {
      throw ConfigError(std::string("model.spin: ") + e.what());
    }
  }
  m.gamma_n = c.get_double("model.gamma_n", m.gamma_n);
  m.hyperfine = c.get_double("model.hyperfine_hz", m.hyperfine);
  m.q_hz = c.get_double("model.q_hz", m.q_hz);
  m.eta = c.get_double("model.eta", m.eta);
  if (!(m.q_hz > 0.0)) throw ConfigError("model.q_hz must be positive");
  if (!(m.eta >= 0.0 && m.eta <= 1.0)) throw ConfigError("model.eta must lie in [0, 1]");
  if (!(m.gamma_n > 0.0)) throw ConfigError("model.gamma_n must be positive");
  if (!(m.hyperfine > 0.0)) throw ConfigError("model.hyperfine_hz must be positive");
  return m;
}

namespace detail {

inline void progress(const RunContext& ctx, const std::string& msg) {
  if (ctx.progress) *ctx.progress << msg << "\n" << std::flush;
}

inline std::vector<double> linspace(double a, double b, long n) {
  if (n < 1) throw ConfigError("grid needs at least one point");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (long k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = n == 1 ? a : a + (b - a) * k / (n - 1.0);
  return v;
}

inline std::vector<double> logspace(double a, double b, long n) {
  if (!(a > 0.0 && b > 0.0)) throw ConfigError("logarithmic grid needs positive bounds");
  auto v = linspace(std::log(a), std::log(b), n);
  for (auto& x : v) x = std::exp(x);
  return v;
}

inline long positive_int(Config& c, const std::string& key, long fallback) {
  const long v = c.get_int(key, fallback);
  if (v < 1) throw ConfigError(key + " must be >= 1");
  return v;
}

inline std::string spin_label(SpinLength s) { return std::to_string(s.two_i) + "/2"; }

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

// Provenance common to every dataset: convention, seed, constants, model and
// the full configuration echo.
inline void stamp(Dataset& d, const std::string& command, const RunContext& ctx, const ModelConfig& m,
                  const Config& cfg) {
  d.add_meta("command", command);
  d.add_meta("convention", to_string(ctx.convention));
  d.add_meta("phase_factor", phase_factor(ctx.convention));
  d.add_meta("seed", std::to_string(ctx.seed));
  d.add_meta("isotope", m.isotope);
  d.add_meta("spin", spin_label(m.spin));
  d.add_meta("gamma_n_hz_per_t", m.gamma_n);
  d.add_meta("hyperfine_hz", m.hyperfine);
  d.add_meta("q_hz", m.q_hz);
  d.add_meta("eta", m.eta);
  d.add_meta("const_e_charge", constants::e_charge);
  d.add_meta("const_h", constants::h);
  d.add_meta("const_hbar", constants::hbar);
  d.add_meta("const_k_b", constants::k_b);
  d.add_meta("const_gamma_e", constants::gamma_e);
  d.add_meta("const_barn", constants::barn);
  for (const auto& [k, v] : cfg.entries()) d.add_meta("config." + k, v);
}

// Frame with the clock field found at the given coupling; nullopt-like flag
// when the splitting has no clock transition (eta = 0 or tiny).
struct FrameOrNone {
  bool ok = false;
  CatQubitFrame frame;
};

inline FrameOrNone try_frame(SpinLength s, double eta, double q) {
  FrameOrNone f;
  try {
    f.frame = fit_cat_frame(s, eta, q);
    f.ok = true;
  } catch (const NoClockTransition&) {
  } catch (const DomainError&) {
  }
  return f;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// spectrum: energies, parities and splitting along b/Q, clock marker, Wigner
// maps of the two qubit states at the clock field.

inline Report cmd_spectrum(Config& cfg, const RunContext& ctx) {
  const ModelConfig m = read_model(cfg);
  const double b_min = cfg.get_double("spectrum.b_min", 0.0);
  const double b_max = cfg.get_double("spectrum.b_max", 2.5 * m.spin.two_i);
  const long points = detail::positive_int(cfg, "spectrum.points", 401);
  const long wigner_theta = cfg.get_int("spectrum.wigner_theta_points", 37);
  const long wigner_phi = cfg.get_int("spectrum.wigner_phi_points", 72);
  cfg.reject_unknown();
  if (!(b_max > b_min && b_min >= 0.0)) throw ConfigError("spectrum needs 0 <= b_min < b_max");

  // Energies in units of Q are independent of Q and of the convention.
  SplittingEvaluator ev(m.spin, m.eta, 1.0);
  Report rep;
  Dataset d;
  d.name = "spectrum";
  detail::stamp(d, "spectrum", ctx, m, cfg);
  d.add_column("b_over_q");
  d.add_column("delta_over_q");
  const Eigen::Index dim = m.spin.dim();
  for (Eigen::Index k = 0; k < dim; ++k) d.add_column("E" + std::to_string(k) + "_over_q");
  for (Eigen::Index k = 0; k < dim; ++k) d.add_column("P" + std::to_string(k));

  const auto grid = detail::linspace(b_min, b_max, points);
  std::vector<std::vector<double>> rows(grid.size());
  parallel_for(grid.size(), ctx.jobs, [&](std::size_t i) {
    const auto sp = ev.spectrum(grid[i]);
    std::vector<double> r{grid[i], sp.energies(1) - sp.energies(0)};
    for (Eigen::Index k = 0; k < dim; ++k) r.push_back(sp.energies(k));
    for (Eigen::Index k = 0; k < dim; ++k) r.push_back(sp.parities[static_cast<std::size_t>(k)]);
    rows[i] = std::move(r);
  });
  for (auto& r : rows) d.add_row(std::move(r));

  const auto fr = detail::try_frame(m.spin, m.eta, 1.0);
  if (fr.ok) {
    d.add_meta("clock_b0_over_q", fr.frame.b0);
    d.add_meta("clock_delta_over_q", fr.frame.delta);
    d.add_meta("clock_b0_mT", 1e3 * fr.frame.b0 * m.q_hz / m.gamma_n);
    rep.lines.push_back("clock transition at b0/Q = " + format_number(fr.frame.b0) +
                        ", Delta/Q = " + format_number(fr.frame.delta));
  } else {
    d.add_meta("clock_b0_over_q", "none");
    rep.lines.push_back("no clock transition at eta = " + format_number(m.eta));
  }
  rep.datasets.push_back(std::move(d));

  if (fr.ok && wigner_theta > 1 && wigner_phi > 0) {
    // Azimuthal equidistant projection about the north pole: (x, y) =
    // theta (cos phi, sin phi).
    Dataset w;
    w.name = "spectrum_wigner";
    detail::stamp(w, "spectrum", ctx, m, cfg);
    w.add_meta("field_b_over_q", fr.frame.b0);
    for (const char* c : {"theta", "phi", "x", "y"}) w.add_column(c, "rad");
    w.add_column("w_ground");
    w.add_column("w_excited");
    std::vector<SphereSample> samples;
    for (long a = 0; a < wigner_theta; ++a)
      for (long b = 0; b < wigner_phi; ++b)
        samples.push_back({pi * a / (wigner_theta - 1.0), 2.0 * pi * b / static_cast<double>(wigner_phi)});
    const auto w0 = wigner_function(fr.frame.ground * fr.frame.ground.adjoint(), m.spin, samples);
    const auto w1 = wigner_function(fr.frame.excited * fr.frame.excited.adjoint(), m.spin, samples);
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const double th = samples[k].theta, ph = samples[k].phi;
      w.add_row({th, ph, th * std::cos(ph), th * std::sin(ph), w0[k], w1[k]});
    }
    rep.datasets.push_back(std::move(w));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// catfit: F, theta0, b0/Q versus eta for several spins, plus field anchors.

inline Report cmd_catfit(Config& cfg, const RunContext& ctx) {
  const ModelConfig m = read_model(cfg);
  const auto spins = cfg.get_list("catfit.spins", {3.5, 4.5});
  const double eta_min = cfg.get_double("catfit.eta_min", 0.1);
  const double eta_max = cfg.get_double("catfit.eta_max", 1.0);
  const long points = detail::positive_int(cfg, "catfit.points", 20);
  const auto anchor_etas = cfg.get_list("catfit.anchor_etas", {0.5, 0.75, 1.0});
  const double anchor_q = cfg.get_double("catfit.anchor_q_hz", 1e5);
  cfg.reject_unknown();
  if (!(eta_min > 0.0 && eta_max <= 1.0 && eta_min <= eta_max)) throw ConfigError("catfit needs 0 < eta_min <= eta_max <= 1");

  std::vector<SpinLength> sl;
  for (double s : spins) {
    try {
      sl.push_back(SpinLength::from_double(s));
    } catch (const DomainError& e) {
      throw ConfigError(std::string("catfit.spins: ") + e.what());
    }
  }
  const auto etas = detail::linspace(eta_min, eta_max, points);

  Report rep;
  Dataset d;
  d.name = "catfit";
  detail::stamp(d, "catfit", ctx, m, cfg);
  for (const char* c : {"spin", "eta", "fidelity"}) d.add_column(c);
  d.add_column("theta0", "rad");
  for (const char* c : {"b0_over_q", "delta_over_q", "a_coeff"}) d.add_column(c);

  const std::size_t n = sl.size() * etas.size();
  std::vector<std::vector<double>> rows(n);
  parallel_for(n, ctx.jobs, [&](std::size_t i) {
    const SpinLength s = sl[i / etas.size()];
    const double eta = etas[i % etas.size()];
    const auto f = detail::try_frame(s, eta, 1.0);
    if (f.ok)
      rows[i] = {s.value(), eta, f.frame.fidelity, f.frame.theta0, f.frame.b0, f.frame.delta, f.frame.a_coeff};
    else
      rows[i] = {s.value(), eta, detail::nan, detail::nan, detail::nan, detail::nan, detail::nan};
  });
  int missing = 0;
  for (auto& r : rows) {
    if (std::isnan(r[2])) ++missing;
    d.add_row(std::move(r));
  }
  d.add_meta("points_without_clock", std::to_string(missing));
  rep.lines.push_back("cat fits: " + std::to_string(n - missing) + " of " + std::to_string(n) + " grid points");
  rep.datasets.push_back(std::move(d));

  // Field anchors B0 = b0 / gamma_n for both isotope presets.
  Dataset a;
  a.name = "catfit_anchors";
  detail::stamp(a, "catfit", ctx, m, cfg);
  a.add_column("spin");
  a.add_column("eta");
  a.add_column("gamma_n", "Hz/T");
  a.add_column("q", "Hz");
  a.add_column("b0_over_q");
  a.add_column("b0_field", "mT");
  for (const char* iso : {"Sb-123", "Bi-209"}) {
    const auto p = isotope_preset(iso);
    for (double eta : anchor_etas) {
      const auto f = detail::try_frame(SpinLength(p.two_i), eta, 1.0);
      const double b0 = f.ok ? f.frame.b0 : detail::nan;
      const double field = 1e3 * b0 * anchor_q / p.gamma_n;
      a.add_row({0.5 * p.two_i, eta, p.gamma_n, anchor_q, b0, field});
      rep.lines.push_back(std::string(iso) + " eta = " + format_number(eta) + ": B0 = " + format_number(field) + " mT");
    }
  }
  rep.datasets.push_back(std::move(a));
  return rep;
}

// ---------------------------------------------------------------------------
// dephasing: T2* <-> nu, T2,ct table, Lambda2 curves, A(I, eta) table and
// Monte Carlo overlays.

inline Report cmd_dephasing(Config& cfg, const RunContext& ctx) {
  const ModelConfig m = read_model(cfg);
  const auto t2_list = cfg.get_list("dephasing.t2_star", {0.01, 0.05});
  const double omega_ir = cfg.get_double("dephasing.omega_ir", 1e-5);
  const double omega_uv = cfg.get_double("dephasing.omega_uv", 1e12);
  const long curve_points = detail::positive_int(cfg, "dephasing.curve_points", 61);
  const auto table_spins = cfg.get_list("dephasing.table_spins", {3.5, 4.5});
  const long table_points = detail::positive_int(cfg, "dephasing.table_points", 10);
  const long n_traj = detail::positive_int(cfg, "dephasing.mc_trajectories", 100000);
  const long mc_points = detail::positive_int(cfg, "dephasing.mc_points", 8);
  const double mc_nu = cfg.get_double("dephasing.mc_nu", 1.0);
  const double mc_ir = cfg.get_double("dephasing.mc_omega_ir", 1.0);
  const double mc_uv = cfg.get_double("dephasing.mc_omega_uv", 1e3);
  const double mc_d2 = cfg.get_double("dephasing.mc_d2", -1.0);
  cfg.reject_unknown();

  const double pf = phase_factor(ctx.convention);
  const double q = pf * m.q_hz;
  const auto frame = fit_cat_frame(m.spin, m.eta, 1.0);
  const double a_coeff = frame.a_coeff;
  const double d2 = -1.0 / (2.0 * q * a_coeff);

  Report rep;
  rep.lines.push_back("A(" + detail::spin_label(m.spin) + ", " + format_number(m.eta) + ") = " + format_number(a_coeff) +
                      ", d2 = " + format_number(d2) + " s");

  Dataset t;
  t.name = "dephasing_t2ct";
  detail::stamp(t, "dephasing", ctx, m, cfg);
  t.add_meta("a_coeff", a_coeff);
  t.add_meta("d2", d2);
  t.add_meta("omega_ir", omega_ir);
  t.add_meta("omega_uv", omega_uv);
  t.add_column("t2_star", "s");
  t.add_column("nu", "1/s^2");
  t.add_column("t_s", "s");
  t.add_column("t2ct_lambda2_1", "s");
  t.add_column("t2ct_lambda2_2", "s");
  t.add_column("closed_form", "s");
  t.add_column("enhancement_bound", "s");
  t.add_column("ratio_lambda2_1");
  t.add_column("ratio_lambda2_2");
  for (double t2 : t2_list) {
    const OneOverFSpec spec{nu_from_t2(t2, omega_ir), omega_ir, omega_uv};
    const auto r1 = t2ct_solve(spec, d2, Lambda2Threshold::lambda2_eq_1);
    const auto r2 = t2ct_solve(spec, d2, Lambda2Threshold::lambda2_eq_2);
    const double bound = enhancement_bound(q, t2, a_coeff);
    t.add_row({t2, spec.nu, r1.short_time, r1.t2ct, r2.t2ct, r1.closed_form, bound, r1.t2ct / r1.short_time,
               r2.t2ct / r2.short_time});
    rep.lines.push_back("T2* = " + format_number(t2) + " s: T2,ct = " + format_number(r1.t2ct) + " s (Lambda2 = 1), " +
                        format_number(r2.t2ct) + " s (Lambda2 = 2), bound " + format_number(bound) + " s");
  }
  rep.datasets.push_back(std::move(t));

  // Lambda2 curves for the first T2*.
  {
    const OneOverFSpec spec{nu_from_t2(t2_list.front(), omega_ir), omega_ir, omega_uv};
    Dataset c;
    c.name = "dephasing_lambda2";
    detail::stamp(c, "dephasing", ctx, m, cfg);
    c.add_meta("t2_star", t2_list.front());
    c.add_meta("nu", spec.nu);
    c.add_column("t", "s");
    for (const char* k : {"lambda2_linear", "lambda2_clock_exact", "lambda2_clock_asymptotic"}) c.add_column(k);
    const double t_hi = std::min(1e3 * t2_list.front() * t2_list.front() * q, 0.1 / omega_ir);
    for (double tt : detail::logspace(0.01 * t2_list.front(), t_hi, curve_points))
      c.add_row({tt, lambda2_linear(tt, spec), lambda2_clock(tt, spec, d2, Lambda2Mode::exact),
                 lambda2_clock(tt, spec, d2, Lambda2Mode::asymptotic)});
    rep.datasets.push_back(std::move(c));
  }

  // A(I, eta) table.
  {
    Dataset a;
    a.name = "dephasing_acoeff";
    detail::stamp(a, "dephasing", ctx, m, cfg);
    a.add_column("eta");
    std::vector<SpinLength> sl;
    for (double s : table_spins) {
      sl.push_back(SpinLength::from_double(s));
      a.add_column("a_" + std::to_string(sl.back().two_i) + "_2");
    }
    const auto etas = detail::linspace(0.1, 1.0, table_points);
    std::vector<std::vector<double>> rows(etas.size());
    parallel_for(etas.size(), ctx.jobs, [&](std::size_t i) {
      std::vector<double> r{etas[i]};
      for (const auto& s : sl) {
        const auto f = detail::try_frame(s, etas[i], 1.0);
        r.push_back(f.ok ? f.frame.a_coeff : detail::nan);
      }
      rows[i] = std::move(r);
    });
    for (auto& r : rows) a.add_row(std::move(r));
    rep.datasets.push_back(std::move(a));
  }

  // Monte Carlo overlays at desk scale: Gaussian 1/f synthesis against the
  // second-order cumulant, and quasistatic noise against its closed forms.
  {
    const OneOverFSpec spec{mc_nu, mc_ir, mc_uv};
    const double ts = 1.0 / (spec.variance() * std::abs(mc_d2));
    std::vector<double> grid;
    for (long k = 1; k <= mc_points; ++k) grid.push_back(0.1 * ts * k);
    McOptions o;
    o.n_traj = static_cast<std::size_t>(n_traj);
    o.seed = derive_seed(ctx.seed, 1);
    o.jobs = ctx.jobs;
    detail::progress(ctx, "dephasing: Monte Carlo, " + std::to_string(n_traj) + " trajectories");
    const auto mc = mc_coherence(spec, {0.0, 0.0, mc_d2}, grid, o);
    Dataset d;
    d.name = "dephasing_mc";
    detail::stamp(d, "dephasing", ctx, m, cfg);
    d.add_meta("trajectories", std::to_string(n_traj));
    d.add_meta("normalization", "fourier");
    d.add_column("t", "s");
    for (const char* k : {"mc_re", "mc_im", "mc_stderr", "cumulant_re", "cumulant_im", "residual_over_stderr"})
      d.add_column(k);
    double worst = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const cplx c = cumulant_coherence_clock(grid[k], spec, mc_d2);
      const double z = std::abs(mc.mean[k] - c) / mc.stderr_abs(k);
      worst = std::max(worst, z);
      d.add_row({grid[k], mc.mean[k].real(), mc.mean[k].imag(), mc.stderr_abs(k), c.real(), c.imag(), z});
    }
    rep.lines.push_back("1/f Monte Carlo vs cumulant: worst residual " + format_number(worst) + " stderr");
    rep.datasets.push_back(std::move(d));

    const double sigma = std::sqrt(spec.variance());
    const auto lin = mc_coherence_quasistatic({sigma}, {0.0, 1.0, 0.0}, grid, o.n_traj, derive_seed(ctx.seed, 2), ctx.jobs);
    const auto clk = mc_coherence_quasistatic({sigma}, {0.0, 0.0, mc_d2}, grid, o.n_traj, derive_seed(ctx.seed, 3), ctx.jobs);
    Dataset qd;
    qd.name = "dephasing_quasistatic";
    detail::stamp(qd, "dephasing", ctx, m, cfg);
    qd.add_meta("sigma_b", sigma);
    qd.add_column("t", "s");
    for (const char* k : {"linear_mc", "linear_closed", "linear_z", "clock_mc_re", "clock_mc_im", "clock_closed_re",
                          "clock_closed_im", "clock_z"})
      qd.add_column(k);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const cplx cl = coherence_quasistatic_linear(grid[k], sigma);
      const cplx cc = coherence_quasistatic_clock(grid[k], sigma, mc_d2);
      qd.add_row({grid[k], lin.mean[k].real(), cl.real(), std::abs(lin.mean[k] - cl) / lin.stderr_abs(k),
                  clk.mean[k].real(), clk.mean[k].imag(), cc.real(), cc.imag(),
                  std::abs(clk.mean[k] - cc) / clk.stderr_abs(k)});
    }
    rep.datasets.push_back(std::move(qd));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// relaxation: TLF rates versus distance, additivity, phonon comparison and
// golden rule against a direct telegraph simulation.

inline Report cmd_relaxation(Config& cfg, const RunContext& ctx) {
  const ModelConfig m = read_model(cfg);
  const auto distances = cfg.get_list("relaxation.distances_nm", {5.0, 10.0, 20.0, 1000.0});
  const double jump = cfg.get_double("relaxation.jump_angstrom", 1.0) * constants::angstrom;
  const double q_moment = cfg.get_double("relaxation.q_moment_barn", 1.0) * constants::barn;
  const double kappa_over_delta = cfg.get_double("relaxation.kappa_over_delta", 0.5);
  const double temperature = cfg.get_double("relaxation.temperature_k", 0.01);
  const double sim_ratio = cfg.get_double("relaxation.sim_amplitude_ratio", 0.02);
  const long sim_traj = detail::positive_int(cfg, "relaxation.sim_trajectories", 4000);
  const long sim_points = detail::positive_int(cfg, "relaxation.sim_points", 40);
  const double sim_span = cfg.get_double("relaxation.sim_span", 400.0);
  cfg.reject_unknown();
  if (!(kappa_over_delta > 0.0)) throw ConfigError("relaxation.kappa_over_delta must be positive");

  const double pf = phase_factor(ctx.convention);
  const double q = pf * m.q_hz;
  const auto frame = fit_cat_frame(m.spin, m.eta, q);
  const double kappa = kappa_over_delta * frame.delta;
  Report rep;

  Dataset d;
  d.name = "relaxation_tlf";
  detail::stamp(d, "relaxation", ctx, m, cfg);
  d.add_meta("b0", frame.b0);
  d.add_meta("delta", frame.delta);
  d.add_meta("kappa", kappa);
  d.add_column("distance", "m");
  d.add_column("beta");
  d.add_column("gap", "1/s");
  d.add_column("rate_bound", "1/s");
  d.add_column("bitflip_time", "s");
  d.add_column("rate_lorentzian", "1/s");
  d.add_column("rate_matrix_element", "1/s");
  for (double nm : distances) {
    TLF tlf;
    tlf.distance = nm * 1e-9;
    tlf.jump = jump;
    tlf.kappa = kappa;
    const double beta = beta_bound(m.spin, q_moment, m.q_hz, tlf_delta_v_xx(tlf), ctx.convention);
    const auto r = single_tlf_rate(frame, tlf, frame.b0, beta);
    d.add_row({tlf.distance, beta, r.gap.at(1), r.bound.at(1), 1.0 / r.bound.at(1), r.gamma.at(1),
               r.matrix_element.at(1)});
    rep.lines.push_back("TLF at " + format_number(nm) + " nm: 1/Gamma_10 >= " + format_number(1.0 / r.bound.at(1)) + " s");
  }
  rep.datasets.push_back(std::move(d));

  // Two fluctuators: the combined rate is the sum of the single rates.
  {
    Dataset a;
    a.name = "relaxation_multi";
    detail::stamp(a, "relaxation", ctx, m, cfg);
    for (const char* c : {"rate_first", "rate_second", "rate_sum", "rate_combined", "rate_beta_max_bound"})
      a.add_column(c, "1/s");
    TLF t1, t2;
    t1.distance = 10e-9;
    t2.distance = 12e-9;
    t1.jump = t2.jump = jump;
    t1.kappa = kappa;
    t2.kappa = 2.0 * kappa;
    auto single = [&](const TLF& t) {
      const double beta = beta_bound(m.spin, q_moment, m.q_hz, tlf_delta_v_xx(t), ctx.convention);
      return single_tlf_rate(frame, t, frame.b0, beta).gamma.at(1);
    };
    const auto multi = multi_tlf_rate(frame, {t1, t2}, frame.b0, q_moment, ctx.convention);
    const double g1 = single(t1), g2 = single(t2);
    a.add_row({g1, g2, g1 + g2, multi.rates.gamma.at(1), multi.beta_max_bound.at(1)});
    rep.datasets.push_back(std::move(a));
  }

  // Phonons against the 10 nm fluctuator.
  {
    GradientElasticParams gp;
    TLF tlf;
    tlf.distance = 10e-9;
    tlf.jump = jump;
    tlf.kappa = kappa;
    const auto c = phonon_vs_charge_report(frame, tlf, temperature, gp, q_moment, ctx.convention);
    Dataset p;
    p.name = "relaxation_phonon";
    detail::stamp(p, "relaxation", ctx, m, cfg);
    p.add_column("temperature", "K");
    p.add_column("delta", "1/s");
    p.add_column("nbar");
    p.add_column("j_perp", "1/s");
    p.add_column("gamma10_phonon", "1/s");
    p.add_column("gamma10_charge_10nm", "1/s");
    p.add_column("ratio");
    p.add_column("crossover_distance", "m");
    p.add_row({temperature, frame.delta, c.phonon.nbar, c.phonon.j_perp, c.phonon.gamma10, *c.charge_rate, *c.ratio,
               *c.crossover_distance});
    rep.lines.push_back("phonon Gamma_10 bound " + format_number(c.phonon.gamma10) + " 1/s, nbar " +
                        format_number(c.phonon.nbar));
    rep.datasets.push_back(std::move(p));
  }

  // Golden rule against direct simulation at desk scale (Q = 1).
  {
    const auto unit = fit_cat_frame(m.spin, m.eta, 1.0);
    NuclearSpinModel model{m.spin, 1.0, m.eta, 1.0, unit.b0};
    const TelegraphDrive drive{sim_ratio, unit.delta / 2.0, 0.0};
    std::vector<double> grid;
    for (long k = 0; k <= sim_points; ++k) grid.push_back(sim_span * k / sim_points + 1e-9);
    detail::progress(ctx, "relaxation: telegraph simulation, " + std::to_string(sim_traj) + " trajectories");
    const auto sim = direct_transition_sim(model, drive, grid, static_cast<std::size_t>(sim_traj),
                                           derive_seed(ctx.seed, 4), ctx.jobs);
    Dataset s;
    s.name = "relaxation_sim";
    detail::stamp(s, "relaxation", ctx, m, cfg);
    s.add_meta("slope", sim.slope);
    s.add_meta("slope_stderr", sim.slope_stderr);
    s.add_meta("golden_rule", sim.golden_rule);
    s.add_meta("residual_over_stderr", std::abs(sim.slope - sim.golden_rule) / sim.slope_stderr);
    s.add_column("t", "1/Q");
    s.add_column("p1");
    s.add_column("p1_stderr");
    s.add_column("golden_rule_p1");
    for (std::size_t k = 0; k < sim.t.size(); ++k)
      s.add_row({sim.t[k], sim.p1[k], sim.p1_stderr[k], sim.golden_rule * sim.t[k]});
    rep.lines.push_back("telegraph simulation slope " + format_number(sim.slope) + " +- " +
                        format_number(sim.slope_stderr) + ", golden rule " + format_number(sim.golden_rule));
    rep.datasets.push_back(std::move(s));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// gatemap: Haar-averaged gate fidelity over (Q, eta) and its threshold
// contour.

struct GateSettings {
  double a_max = 101.52e6;
  double gamma_e = constants::gamma_e;
  double ramp_time = -1.0;
  long steps_per_ramp = 400;
};

inline GateSettings read_gate(Config& cfg, const ModelConfig& m) {
  GateSettings g;
  g.a_max = cfg.get_double("gate.a_max_hz", m.hyperfine);
  g.gamma_e = cfg.get_double("gate.gamma_e", constants::gamma_e);
  g.ramp_time = cfg.get_double("gate.ramp_time", -1.0);
  g.steps_per_ramp = detail::positive_int(cfg, "gate.steps_per_ramp", 400);
  if (!(g.a_max > 0.0 && g.gamma_e > 0.0)) throw ConfigError("gate.a_max_hz and gate.gamma_e must be positive");
  return g;
}

inline Report cmd_gatemap(Config& cfg, const RunContext& ctx) {
  const ModelConfig m = read_model(cfg);
  const GateSettings gs = read_gate(cfg, m);
  const double q_min = cfg.get_double("gatemap.q_min_hz", 5e4);
  const double q_max = cfg.get_double("gatemap.q_max_hz", 6e5);
  const long q_points = detail::positive_int(cfg, "gatemap.q_points", 40);
  const double eta_min = cfg.get_double("gatemap.eta_min", 0.3);
  const double eta_max = cfg.get_double("gatemap.eta_max", 1.0);
  const long eta_points = detail::positive_int(cfg, "gatemap.eta_points", 30);
  const long samples = cfg.get_int("gatemap.samples", 10000);
  const double threshold = cfg.get_double("gatemap.threshold", 0.99);
  cfg.reject_unknown();
  if (!(q_min > 0.0 && q_max >= q_min)) throw ConfigError("gatemap needs 0 < q_min_hz <= q_max_hz");
  if (!(eta_min > 0.0 && eta_max <= 1.0 && eta_min <= eta_max)) throw ConfigError("gatemap needs 0 < eta_min <= eta_max <= 1");

  const double pf = phase_factor(ctx.convention);
  const auto qs = detail::linspace(q_min, q_max, q_points);
  const auto etas = detail::linspace(eta_min, eta_max, eta_points);

  detail::progress(ctx, "gatemap: fitting " + std::to_string(etas.size()) + " cat frames");
  std::vector<detail::FrameOrNone> frames(etas.size());
  parallel_for(etas.size(), ctx.jobs, [&](std::size_t i) { frames[i] = detail::try_frame(m.spin, etas[i], 1.0); });

  const std::size_t n = qs.size() * etas.size();
  std::vector<GateMapPoint> points(n);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  ExactOptions opt;
  opt.steps_per_ramp = gs.steps_per_ramp;
  parallel_for(n, ctx.jobs, [&](std::size_t i) {
    const std::size_t ie = i / qs.size(), iq = i % qs.size();
    GateMapPoint& p = points[i];
    p.q = qs[iq];
    p.eta = etas[ie];
    if (frames[ie].ok) {
      auto gp = make_gate_params(frames[ie].frame, pf * qs[iq], m.gamma_n, pf * gs.a_max, gs.gamma_e);
      gp.ramp_time = gs.ramp_time;
      p.fidelity = gate_fidelity_haar(gp, make_ramp(gp), frames[ie].frame, samples, derive_seed(ctx.seed, i), opt);
    } else {
      p.fidelity.closed_form = detail::nan;
    }
    const std::size_t k = ++done;
    if (ctx.progress && (k % qs.size() == 0 || k == n)) {
      std::lock_guard<std::mutex> lock(progress_mutex);
      detail::progress(ctx, "gatemap: " + std::to_string(k) + "/" + std::to_string(n) + " points");
    }
  });

  Report rep;
  Dataset d;
  d.name = "gatemap";
  detail::stamp(d, "gatemap", ctx, m, cfg);
  d.add_meta("a_max_hz", gs.a_max);
  d.add_meta("gamma_e", gs.gamma_e);
  d.add_meta("haar_samples", std::to_string(samples));
  d.add_column("q", "Hz");
  d.add_column("eta");
  d.add_column("cat_fidelity");
  d.add_column("f_g_closed_form");
  d.add_column("f_g_sampled");
  d.add_column("f_g_stderr");
  d.add_column("residual_over_stderr");
  double worst_z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = points[i];
    const auto& f = p.fidelity;
    const double z = f.samples > 1 ? std::abs(f.sampled - f.closed_form) / f.sampled_stderr : detail::nan;
    if (!std::isnan(z)) worst_z = std::max(worst_z, z);
    const auto& fr = frames[i / qs.size()];
    d.add_row({p.q, p.eta, fr.ok ? fr.frame.fidelity : detail::nan, f.closed_form, f.sampled, f.sampled_stderr, z});
  }
  d.add_meta("worst_residual_over_stderr", worst_z);

  // Contour: for each eta, the Q interval with F_g >= threshold (linear
  // interpolation between grid points) and the best point.
  Dataset c;
  c.name = "gatemap_contour";
  detail::stamp(c, "gatemap", ctx, m, cfg);
  c.add_meta("threshold", threshold);
  c.add_column("eta");
  c.add_column("max_f_g");
  c.add_column("q_at_max", "Hz");
  c.add_column("q_low", "Hz");
  c.add_column("q_high", "Hz");
  bool region_high = false;
  double best_low_eta = 0.0;
  for (std::size_t ie = 0; ie < etas.size(); ++ie) {
    double best = -1.0, q_best = detail::nan, lo = detail::nan, hi = detail::nan;
    for (std::size_t iq = 0; iq < qs.size(); ++iq) {
      const double f = points[ie * qs.size() + iq].fidelity.closed_form;
      if (std::isnan(f)) continue;
      if (f > best) best = f, q_best = qs[iq];
      if (iq > 0) {
        const double fp = points[ie * qs.size() + iq - 1].fidelity.closed_form;
        if ((fp - threshold) * (f - threshold) < 0.0) {
          const double x = qs[iq - 1] + (threshold - fp) / (f - fp) * (qs[iq] - qs[iq - 1]);
          if (f > fp && std::isnan(lo)) lo = x;
          if (f < fp) hi = x;
        }
      }
      if (f >= threshold) {
        if (std::isnan(lo) && iq == 0) lo = qs[0];
        if (iq + 1 == qs.size()) hi = qs[iq];
      }
    }
    if (best < 0.0) best = detail::nan;
    c.add_row({etas[ie], best, q_best, lo, hi});
    if (etas[ie] >= 0.7 - 1e-12 && best >= threshold) region_high = true;
    if (etas[ie] <= 0.5 + 1e-12 && !std::isnan(best)) best_low_eta = std::max(best_low_eta, best);
  }
  c.add_meta("region_exists_eta_ge_0.7", region_high ? "yes" : "no");
  c.add_meta("max_f_g_eta_le_0.5", best_low_eta);
  rep.lines.push_back(std::string("F_g >= ") + format_number(threshold) + " region for eta >= 0.7: " +
                      (region_high ? "present" : "absent"));
  rep.lines.push_back("largest F_g for eta <= 0.5: " + format_number(best_low_eta));
  rep.lines.push_back("closed form vs sampled Haar average: worst residual " + format_number(worst_z) + " stderr");
  rep.datasets.push_back(std::move(d));
  rep.datasets.push_back(std::move(c));
  return rep;
}

// ---------------------------------------------------------------------------
// protocol: CZ, readout and initialization dry runs.

inline Report cmd_protocol(Config& cfg, const RunContext& ctx) {
  const ModelConfig m = read_model(cfg);
  const GateSettings gs = read_gate(cfg, m);
  const long trials = detail::positive_int(cfg, "protocol.trials", 100);
  const double eps_shuttle = cfg.get_double("protocol.eps_shuttle", 0.0);
  const double eps_m = cfg.get_double("protocol.eps_m", 0.0);
  const long init_runs = detail::positive_int(cfg, "protocol.init_runs", 8);
  const double init_axis = cfg.get_double("protocol.init_axis", 0.5 * pi);
  cfg.reject_unknown();

  const double pf = phase_factor(ctx.convention);
  const auto frame = fit_cat_frame(m.spin, m.eta, 1.0);
  const CatBasis basis = make_cat_basis(m.spin, frame.theta0);
  Report rep;

  // CZ on Haar-random logical inputs, both electron outcomes, plus |00>.
  Dataset cz;
  cz.name = "protocol_cz";
  detail::stamp(cz, "protocol", ctx, m, cfg);
  cz.add_meta("theta0", frame.theta0);
  for (const char* k : {"trial", "outcome", "probability", "fidelity_to_target", "outcome_overlap"}) cz.add_column(k);
  Rng rng = make_rng(ctx.seed, 5);
  double worst = 1.0;
  auto run = [&](double trial, const Eigen::Vector4cd& a) {
    CVec reg = embed_two_qubit(basis, a);
    reg /= reg.norm();
    const CVec target = cz_target(basis, a).normalized();
    const auto plus = cz_protocol(basis, reg, +1);
    const auto minus = cz_protocol(basis, reg, -1);
    const double same = state_fidelity(plus.state.normalized(), minus.state.normalized());
    for (const auto* r : {&plus, &minus}) {
      const double f = state_fidelity(target, r->state.normalized());
      worst = std::min(worst, f);
      cz.add_row({trial, static_cast<double>(r->outcome), r->probability, f, same});
    }
  };
  run(-1.0, Eigen::Vector4cd(1.0, 0.0, 0.0, 0.0));
  for (long k = 0; k < trials; ++k) run(static_cast<double>(k), haar_state(rng, 4));
  cz.add_meta("worst_fidelity", worst);
  rep.lines.push_back("CZ: worst post-correction fidelity 1 - " + format_number(1.0 - worst) + " over " +
                      std::to_string(trials) + " inputs and both outcomes");
  {
    const auto sample = cz_protocol(basis, embed_two_qubit(basis, Eigen::Vector4cd(0.5, 0.5, 0.5, 0.5)), rng);
    for (const auto& line : sample.record) rep.lines.push_back("CZ transcript: " + line);
  }
  rep.datasets.push_back(std::move(cz));

  // Readout: outcome probabilities against the cat-basis weights.
  Dataset ro;
  ro.name = "protocol_readout";
  detail::stamp(ro, "protocol", ctx, m, cfg);
  for (const char* k : {"weight_zero", "weight_one", "p_plus", "p_minus", "residual"}) ro.add_column(k);
  for (double w : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const CVec psi = std::sqrt(1.0 - w) * basis.zero + std::sqrt(w) * I_unit * basis.one;
    const auto r = readout(basis, psi);
    ro.add_row({std::norm(r.alpha), std::norm(r.beta), r.p_plus, r.p_minus, r.residual});
  }
  rep.datasets.push_back(std::move(ro));

  // Initialization runs with independent seeds.
  Dataset in;
  in.name = "protocol_init";
  detail::stamp(in, "protocol", ctx, m, cfg);
  in.add_meta("theta0", frame.theta0);
  in.add_meta("init_axis", init_axis);
  for (const char* k : {"run", "outcome", "probability_plus", "lambda_sq", "fidelity_to_cat"}) in.add_column(k);
  InitOptions io;
  io.theta_axis = init_axis;
  for (long k = 0; k < init_runs; ++k) {
    const auto r = initialize(m.spin, frame.theta0, derive_seed(ctx.seed, 100 + static_cast<std::uint64_t>(k)), io);
    const CVec& cat = r.outcome > 0 ? basis.one : basis.zero;
    in.add_row({static_cast<double>(k), static_cast<double>(r.outcome), r.probability_plus, r.lambda_sq,
                state_fidelity(cat, r.state)});
    if (k == 0)
      for (const auto& line : r.transcript) rep.lines.push_back("init transcript: " + line);
  }
  rep.datasets.push_back(std::move(in));

  // CZ fidelity budget at the model's Q.
  {
    auto gp = make_gate_params(frame, pf * m.q_hz, m.gamma_n, pf * gs.a_max, gs.gamma_e);
    gp.ramp_time = gs.ramp_time;
    ExactOptions opt;
    opt.steps_per_ramp = gs.steps_per_ramp;
    const auto ramp = make_ramp(gp);
    const auto g = gate_fidelity_haar(gp, ramp, frame, 0, ctx.seed, opt);
    Dataset f;
    f.name = "protocol_fcz";
    detail::stamp(f, "protocol", ctx, m, cfg);
    f.add_column("gate_time", "s");
    for (const char* k : {"f_g", "eps_shuttle", "eps_m", "f_cz"}) f.add_column(k);
    const double fcz = cz_fidelity_estimate(g.closed_form, eps_shuttle, eps_m);
    f.add_row({ramp.total_time, g.closed_form, eps_shuttle, eps_m, fcz});
    rep.lines.push_back("gate time " + format_number(ramp.total_time) + " s, F_g = " + format_number(g.closed_form) +
                        ", F_CZ = " + format_number(fcz));
    rep.datasets.push_back(std::move(f));
  }
  return rep;
}

}  // namespace skcat
