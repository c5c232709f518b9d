#pragma once

// Free-induction coherence of a qubit whose splitting depends on a noisy
// field b.  Away from a clock transition the splitting moves linearly with
// delta b; at the clock transition only the quadratic term survives.
//
// All frequencies and rates are Hamiltonian coefficients: an accumulated
// phase is coefficient * time.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "skcat/core/parallel.hpp"
#include "skcat/core/random.hpp"
#include "skcat/core/types.hpp"

namespace skcat {

struct OneOverFSpec {
  double nu = 1.0;
  double omega_ir = 1e-5;
  double omega_uv = 1e12;

  void validate() const {
    if (!(nu > 0.0)) throw DomainError("1/f amplitude nu must be positive");
    if (!(omega_ir > 0.0 && omega_ir < omega_uv)) throw DomainError("1/f cutoffs need 0 < omega_ir < omega_uv");
  }
  // <delta b^2> = (nu / pi) ln(omega_uv / omega_ir)
  double variance() const { return nu / pi * std::log(omega_uv / omega_ir); }
};

struct QuasistaticSpec {
  double sigma_b = 1.0;
};

struct SensitivityExpansion {
  double delta0 = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

// ---------------------------------------------------------------------------
// Quasistatic noise

inline cplx coherence_quasistatic_linear(double t, double sigma_b) {
  if (t < 0.0) throw DomainError("coherence_quasistatic_linear: t must be >= 0");
  const double t2 = std::sqrt(2.0) / sigma_b;
  return std::exp(-(t / t2) * (t / t2));
}

// Average of exp(i d2 db^2 t / 2) over Gaussian db: the characteristic
// function of a one-degree chi-squared variable, (1 - i d2 sigma^2 t)^{-1/2}.
// For d2 < 0 this is (1 + i t / T)^{-1/2} with T = 1 / (sigma^2 |d2|).
inline cplx coherence_quasistatic_clock(double t, double sigma_b, double d2) {
  if (t < 0.0) throw DomainError("coherence_quasistatic_clock: t must be >= 0");
  return std::pow(cplx(1.0, -d2 * sigma_b * sigma_b * t), -0.5);
}

inline double t2_quasistatic_clock(double sigma_b, double d2) { return 1.0 / (sigma_b * sigma_b * std::abs(d2)); }

// ---------------------------------------------------------------------------
// Linear coupling to 1/f noise

inline double nu_from_t2(double t2_star, double omega_ir, Warnings* warnings = nullptr) {
  const double l = std::log(1.0 / (omega_ir * t2_star));
  if (!(l > 0.0)) throw InvalidRegime("nu_from_t2 needs omega_ir * T2* < 1");
  if (l < 3.0) warn(warnings, "nu_from_t2: ln(1/(omega_ir T2*)) = " + std::to_string(l) + " is not large");
  return 2.0 * pi / (t2_star * t2_star * l);
}

// Closed-form inverse obtained by one recursive substitution.
inline double t2_from_nu(double nu, double omega_ir) {
  const double root = std::sqrt(nu / (2.0 * pi));
  const double l = std::log(root / omega_ir);
  if (!(l > 0.0)) throw InvalidRegime("t2_from_nu needs sqrt(nu / 2 pi) > omega_ir");
  return 1.0 / std::sqrt(nu / (2.0 * pi) * l);
}

enum class Lambda2Mode { exact, asymptotic, filter };

inline std::string to_string(Lambda2Mode m) {
  switch (m) {
    case Lambda2Mode::exact: return "exact";
    case Lambda2Mode::asymptotic: return "asymptotic";
    case Lambda2Mode::filter: return "filter";
  }
  return "?";
}

namespace detail {

template <class F>
double gk(F&& f, double a, double b, unsigned depth = 12) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, depth, 1e-11);
}

// Integral of f over [a, b] split into logarithmic pieces (f ~ 1/omega).
template <class F>
double gk_log(F&& f, double a, double b, int pieces_per_decade = 2) {
  if (!(b > a)) return 0.0;
  if (a <= 0.0) throw DomainError("gk_log needs a > 0");
  const int n = std::max(1, static_cast<int>(std::ceil(pieces_per_decade * std::log10(b / a))));
  const double r = std::pow(b / a, 1.0 / n);
  double acc = 0.0, lo = a;
  for (int k = 0; k < n; ++k) {
    const double hi = (k + 1 == n) ? b : lo * r;
    acc += gk(f, lo, hi);
    lo = hi;
  }
  return acc;
}

}  // namespace detail

// Integral over positive frequencies of (d omega / pi) F(omega, t) S(omega),
// with F = 4 sin^2(omega t / 2) / omega^2, for an even spectral density S
// supported on [w_lo, w_hi].  `kinks` lists points where S is not smooth.
// The oscillatory part is integrated period by period up to `periods`
// periods of F; beyond that sin^2 is replaced by its mean 1/2, an error of
// relative order periods^-3.
template <class Spectrum>
double filter_integral(double t, Spectrum&& s, double w_lo, double w_hi, std::vector<double> kinks = {},
                       int periods = 200) {
  if (t <= 0.0) return 0.0;
  auto f = [&](double w) {
    const double x = 0.5 * w * t;
    const double sinc = (std::abs(x) < 1e-8) ? 1.0 : std::sin(x) / x;
    return t * t * sinc * sinc * s(w) / pi;
  };
  const double period = 2.0 * pi / t;
  const double w_osc = std::min(w_hi, period * periods);

  std::vector<double> cuts{w_lo};
  for (double k : kinks)
    if (k > w_lo && k < w_osc) cuts.push_back(k);
  for (double w = period; w < w_osc; w += period)
    if (w > w_lo) cuts.push_back(w);
  cuts.push_back(w_osc);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    if (a > 0.0 && b / a > 10.0)
      acc += detail::gk_log(f, a, b);
    else
      acc += detail::gk(f, a, b);
  }
  if (w_hi > w_osc) acc += detail::gk_log([&](double w) { return 2.0 * s(w) / (w * w * pi); }, w_osc, w_hi);
  return acc;
}

// Variance of the accumulated phase when the splitting follows delta b
// linearly (d1 = 1).
inline double lambda2_linear(double t, const OneOverFSpec& spec, Lambda2Mode mode = Lambda2Mode::asymptotic,
                             Warnings* warnings = nullptr) {
  spec.validate();
  if (t < 0.0) throw DomainError("lambda2_linear: t must be >= 0");
  if (t == 0.0) return 0.0;
  if (spec.omega_ir * t >= 0.1) warn(warnings, "lambda2_linear: omega_ir * t >= 0.1, asymptotic form unreliable");
  if (mode == Lambda2Mode::filter) {
    auto sb = [&](double w) { return spec.nu / w; };
    return filter_integral(t, sb, spec.omega_ir, spec.omega_uv);
  }
  return spec.nu / pi * t * t * std::log(1.0 / (spec.omega_ir * t));
}

// Normalization of the self-convolution defining S_Delta.  `published` is
// S_Delta = (d2^2 / 2) int dOmega S_b(omega - Omega) S_b(Omega).  With the
// transform pair used for S_b (variance = int d omega / 2 pi S_b) the
// spectrum of delta b(t)^2 carries an extra 1 / (2 pi); `fourier` includes
// it and is the normalization under which Lambda2 is the variance of the
// accumulated phase (checked against Monte Carlo in the tests).
enum class ConvolutionNorm { published, fourier };

inline double convolution_factor(ConvolutionNorm n) { return n == ConvolutionNorm::fourier ? 1.0 / (2.0 * pi) : 1.0; }

// Spectral density of delta Delta = (d2 / 2) delta b^2 for 1/f noise, with
// terms of order 1/omega_uv dropped.
inline double s_delta(double omega, const OneOverFSpec& spec, double d2,
                      ConvolutionNorm norm = ConvolutionNorm::published) {
  const double w = std::abs(omega);
  const double wir = spec.omega_ir;
  const double pref = spec.nu * d2 * spec.nu * d2 * convolution_factor(norm);
  double v = (w < 1e-12 * wir) ? 1.0 / wir : std::log1p(w / wir) / w;
  if (w >= 2.0 * wir) v += std::log((w - wir) / wir) / w;
  return pref * v;
}

// Real dilogarithm Li2(x) for x <= 1 using reflection and Landen identities
// to map onto |x| <= 1/2, where the defining power series converges quickly.
inline double dilog(double x) {
  constexpr double zeta2 = pi * pi / 6.0;
  if (x > 1.0) throw DomainError("dilog: real branch requires x <= 1");
  if (x == 1.0) return zeta2;
  if (x == 0.0) return 0.0;
  if (x < -1.0) {
    const double l = std::log(-x);
    return -zeta2 - 0.5 * l * l - dilog(1.0 / x);
  }
  if (x < 0.0) {
    const double l = std::log1p(-x);
    return -dilog(x / (x - 1.0)) - 0.5 * l * l;
  }
  if (x > 0.5) return zeta2 - std::log(x) * std::log1p(-x) - dilog(1.0 - x);
  double term = x, sum = 0.0;
  for (int k = 1; k < 200; ++k) {
    const double add = term / (static_cast<double>(k) * k);
    sum += add;
    if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    term *= x;
  }
  return sum;
}

// Phase variance at the clock transition.
//   exact:      closed form of t^2 int_0^{1/t} S_Delta d omega / pi (dilogarithms)
//   asymptotic: leading ln^2 term
//   filter:     int (d omega / pi) F(omega, t) S_Delta(omega) by quadrature
inline double lambda2_clock(double t, const OneOverFSpec& spec, double d2, Lambda2Mode mode = Lambda2Mode::exact,
                            ConvolutionNorm norm = ConvolutionNorm::published) {
  spec.validate();
  if (t < 0.0) throw DomainError("lambda2_clock: t must be >= 0");
  if (t == 0.0) return 0.0;
  const double pref = (spec.nu * d2) * (spec.nu * d2) / pi * t * t * convolution_factor(norm);
  const double x = 1.0 / (spec.omega_ir * t);
  switch (mode) {
    case Lambda2Mode::asymptotic: {
      const double l = std::log(x);
      return pref * l * l;
    }
    case Lambda2Mode::exact: {
      if (!(x > 1.0)) throw InvalidRegime("lambda2_clock exact mode requires omega_ir * t < 1");
      const double bracket =
          std::log(x - 1.0) * std::log(x) + dilog(1.0 - x) - dilog(-x) + pi * pi / 12.0;
      return pref * bracket;
    }
    case Lambda2Mode::filter: {
      auto sd = [&](double w) { return s_delta(w, spec, d2, norm); };
      return filter_integral(t, sd, 0.0, spec.omega_uv, {spec.omega_ir, 2.0 * spec.omega_ir});
    }
  }
  return 0.0;
}

enum class Lambda2Threshold { lambda2_eq_1, lambda2_eq_2 };

inline double threshold_value(Lambda2Threshold c) { return c == Lambda2Threshold::lambda2_eq_1 ? 1.0 : 2.0; }

struct T2ctResult {
  double t2ct = 0.0;          // numerical root of Lambda2(T) = threshold
  double closed_form = 0.0;   // approximate closed form
  double short_time = 0.0;    // T_s = 1 / (sigma_b^2 |d2|)
  double threshold = 1.0;
};

inline double t2ct_closed_form(const OneOverFSpec& spec, double d2) {
  const double g = spec.nu * std::abs(d2) / std::sqrt(2.0 * pi);
  const double l = std::log(g / spec.omega_ir);
  if (!(l > 0.0)) throw InvalidRegime("t2ct closed form needs nu |d2| / sqrt(2 pi) > omega_ir");
  return 1.0 / (g * l);
}

inline T2ctResult t2ct_solve(const OneOverFSpec& spec, double d2,
                             Lambda2Threshold threshold = Lambda2Threshold::lambda2_eq_1,
                             Lambda2Mode mode = Lambda2Mode::exact,
                             ConvolutionNorm norm = ConvolutionNorm::published) {
  spec.validate();
  if (d2 == 0.0) throw DomainError("t2ct_solve needs a nonzero curvature");
  T2ctResult r;
  r.threshold = threshold_value(threshold);
  r.closed_form = t2ct_closed_form(spec, d2);
  r.short_time = 1.0 / (spec.variance() * std::abs(d2));
  // The closed form ignores the convolution normalization; widen the
  // bracket by the corresponding time scale.
  const double stretch = std::sqrt(1.0 / convolution_factor(norm));
  double lo = 0.1 * r.closed_form;
  double hi = 10.0 * stretch * r.closed_form;
  if (mode == Lambda2Mode::exact) hi = std::min(hi, (1.0 - 1e-12) / spec.omega_ir);
  auto g = [&](double t) { return lambda2_clock(t, spec, d2, mode, norm) - r.threshold; };
  const double glo = g(lo), ghi = g(hi);
  if (glo * ghi > 0.0) throw NoRoot("t2ct_solve: Lambda2 - threshold does not change sign on the bracket");
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-12 * std::max(std::abs(a), std::abs(b)); };
  std::pair<double, double> bracket;
  if (mode == Lambda2Mode::filter) {
    std::uintmax_t iters = 100;
    bracket = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, tol, iters);
  } else {
    bracket = boost::math::tools::bisect(g, lo, hi, tol);
  }
  r.t2ct = 0.5 * (bracket.first + bracket.second);
  return r;
}

// Lower bound A / sqrt(2 pi) * Q * T2*^2 on the clock-transition dephasing time.
inline double enhancement_bound(double q, double t2_star, double a_coeff) {
  if (q * t2_star <= 1.0) throw RegimeViolation("enhancement_bound needs Q * T2* > 1");
  return a_coeff / std::sqrt(2.0 * pi) * q * t2_star * t2_star;
}

// ---------------------------------------------------------------------------
// Monte Carlo coherence

enum class NoiseSource { quasistatic, synthesis, telegraph };

struct McOptions {
  NoiseSource source = NoiseSource::synthesis;
  std::size_t n_traj = 10000;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  int per_decade = 20;      // Fourier modes or fluctuators per decade of frequency
  std::size_t block = 100;  // trajectories sharing one draw of mode frequencies
};

struct McCoherence {
  std::vector<double> t;
  std::vector<cplx> mean;
  std::vector<double> stderr_re, stderr_im;
  std::size_t n_traj = 0;

  // Standard error of the complex mean.
  double stderr_abs(std::size_t k) const { return std::hypot(stderr_re[k], stderr_im[k]); }
};

namespace detail {

// Accumulates e^{i phi} per block and derives standard errors from the
// spread of block means, which stays valid when trajectories inside a block
// share random mode frequencies.
inline McCoherence reduce_blocks(const std::vector<double>& t_grid, const std::vector<std::vector<cplx>>& blocks,
                                 std::size_t block) {
  McCoherence out;
  out.t = t_grid;
  const std::size_t nb = blocks.size();
  out.n_traj = nb * block;
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    cplx m = 0.0;
    for (const auto& b : blocks) m += b[k];
    m /= static_cast<double>(nb);
    double vr = 0.0, vi = 0.0;
    for (const auto& b : blocks) {
      vr += std::pow(b[k].real() - m.real(), 2);
      vi += std::pow(b[k].imag() - m.imag(), 2);
    }
    const double denom = static_cast<double>(nb) * static_cast<double>(nb > 1 ? nb - 1 : 1);
    out.mean.push_back(m);
    out.stderr_re.push_back(std::sqrt(vr / denom));
    out.stderr_im.push_back(std::sqrt(vi / denom));
  }
  return out;
}

// Block size capped so that every estimate rests on at least ten blocks.
inline std::size_t effective_block(std::size_t n_traj, std::size_t block) {
  return std::max<std::size_t>(1, std::min(block, n_traj / 10));
}

inline void check_grid(const std::vector<double>& t_grid) {
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (t_grid[k] < 0.0) throw DomainError("Monte Carlo time grid must be non-negative");
    if (k > 0 && t_grid[k] < t_grid[k - 1]) throw DomainError("Monte Carlo time grid must be sorted");
  }
}

// int_0^t cos(W s) ds and int_0^t sin(W s) ds
inline double int_cos(double w, double t) {
  const double x = w * t;
  return (std::abs(x) < 1e-8) ? t * (1.0 - x * x / 6.0) : std::sin(x) / w;
}
inline double int_sin(double w, double t) {
  const double x = w * t;
  if (std::abs(x) < 1e-8) return 0.5 * w * t * t;
  const double s = std::sin(0.5 * x);
  return 2.0 * s * s / w;
}

}  // namespace detail

// delta b quasistatic and Gaussian: phi = (d1 db + d2 db^2 / 2) t.
inline McCoherence mc_coherence_quasistatic(const QuasistaticSpec& spec, const SensitivityExpansion& sens,
                                            const std::vector<double>& t_grid, std::size_t n_traj,
                                            std::uint64_t seed, unsigned jobs = 1, std::size_t block = 1000) {
  if (n_traj < 100) throw DomainError("mc_coherence needs n_traj >= 100");
  if (!(spec.sigma_b > 0.0)) throw DomainError("quasistatic sigma_b must be positive");
  detail::check_grid(t_grid);
  block = detail::effective_block(n_traj, block);
  const std::size_t nb = (n_traj + block - 1) / block;
  std::vector<std::vector<cplx>> blocks(nb, std::vector<cplx>(t_grid.size(), 0.0));
  parallel_for(nb, jobs, [&](std::size_t b) {
    Rng rng = make_rng(seed, b);
    std::normal_distribution<double> gauss(0.0, spec.sigma_b);
    auto& acc = blocks[b];
    for (std::size_t j = 0; j < block; ++j) {
      const double db = gauss(rng);
      const double rate = sens.d1 * db + 0.5 * sens.d2 * db * db;
      for (std::size_t k = 0; k < t_grid.size(); ++k) acc[k] += std::exp(I_unit * (rate * t_grid[k]));
    }
    for (auto& v : acc) v /= static_cast<double>(block);
  });
  return detail::reduce_blocks(t_grid, blocks, block);
}

// Gaussian 1/f trajectories by random-phase Fourier synthesis.  Frequencies
// are drawn log-uniformly inside equal logarithmic bins once per block, so
// the ensemble spectrum is exactly nu/|omega| between the cutoffs.  Every
// trajectory is delta b(s) = sum_i g_i u_i(s) with standard normal g and
// cos/sin mode functions u_i; the phase integrals are then linear and
// quadratic forms in g with closed-form coefficients, so no time stepping
// is needed.
inline McCoherence mc_coherence_synthesis(const OneOverFSpec& spec, const SensitivityExpansion& sens,
                                          const std::vector<double>& t_grid, const McOptions& opt) {
  spec.validate();
  if (opt.n_traj < 100) throw DomainError("mc_coherence needs n_traj >= 100");
  detail::check_grid(t_grid);
  const double decades = std::log10(spec.omega_uv / spec.omega_ir);
  const int kmodes = std::max(1, static_cast<int>(std::ceil(opt.per_decade * decades)));
  const double log_ratio = std::log(spec.omega_uv / spec.omega_ir) / kmodes;
  const double amp = std::sqrt(spec.nu / pi * log_ratio);
  const int n = 2 * kmodes;
  const std::size_t block = detail::effective_block(opt.n_traj, opt.block);
  const std::size_t nb = (opt.n_traj + block - 1) / block;

  std::vector<std::vector<cplx>> blocks(nb, std::vector<cplx>(t_grid.size(), 0.0));
  parallel_for(nb, opt.jobs, [&](std::size_t b) {
    Rng rng = make_rng(opt.seed, b);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> w(kmodes);
    for (int k = 0; k < kmodes; ++k) w[k] = spec.omega_ir * std::exp(log_ratio * (k + uni(rng)));
    RMat g(n, static_cast<Eigen::Index>(block));
    for (Eigen::Index c = 0; c < g.cols(); ++c)
      for (Eigen::Index r = 0; r < n; ++r) g(r, c) = gauss(rng);

    RVec u(n);
    RMat m(n, n);
    auto& acc = blocks[b];
    for (std::size_t it = 0; it < t_grid.size(); ++it) {
      const double t = t_grid[it];
      for (int j = 0; j < kmodes; ++j) {
        u(2 * j) = amp * detail::int_cos(w[j], t);
        u(2 * j + 1) = amp * detail::int_sin(w[j], t);
        for (int k = 0; k <= j; ++k) {
          const double cm = detail::int_cos(w[j] - w[k], t), cp = detail::int_cos(w[j] + w[k], t);
          const double sm = detail::int_sin(w[j] - w[k], t), sp = detail::int_sin(w[j] + w[k], t);
          const double a2 = 0.5 * amp * amp;
          const double cc = a2 * (cm + cp);
          const double ss = a2 * (cm - cp);
          const double cs = a2 * (sp - sm);  // cos(w_j s) sin(w_k s)
          const double sc = a2 * (sp + sm);  // sin(w_j s) cos(w_k s)
          m(2 * j, 2 * k) = m(2 * k, 2 * j) = cc;
          m(2 * j + 1, 2 * k + 1) = m(2 * k + 1, 2 * j + 1) = ss;
          m(2 * j, 2 * k + 1) = m(2 * k + 1, 2 * j) = cs;
          m(2 * j + 1, 2 * k) = m(2 * k, 2 * j + 1) = sc;
        }
      }
      const RVec lin = g.transpose() * u;
      const RVec quad = (g.array() * (m * g).array()).colwise().sum().transpose();
      cplx sum = 0.0;
      for (Eigen::Index c = 0; c < g.cols(); ++c)
        sum += std::exp(I_unit * (sens.d1 * lin(c) + 0.5 * sens.d2 * quad(c)));
      acc[it] = sum / static_cast<double>(block);
    }
  });
  return detail::reduce_blocks(t_grid, blocks, block);
}

// Telegraph fluctuators with switching rates log-uniform in
// [omega_ir, omega_uv].  A symmetric telegraph process flipping at rate kappa
// has spectrum a^2 4 kappa / (omega^2 + 4 kappa^2); the common amplitude is
// fixed so the summed spectrum equals nu / omega at the geometric-mean
// frequency.
struct TelegraphEnsemble {
  std::vector<double> kappa;
  double amplitude = 0.0;
};

inline TelegraphEnsemble make_telegraph_ensemble(const OneOverFSpec& spec, int per_decade) {
  spec.validate();
  const double decades = std::log10(spec.omega_uv / spec.omega_ir);
  const int n = std::max(1, static_cast<int>(std::ceil(per_decade * decades)));
  TelegraphEnsemble e;
  const double step = std::log(spec.omega_uv / spec.omega_ir) / n;
  for (int k = 0; k < n; ++k) e.kappa.push_back(spec.omega_ir * std::exp(step * (k + 0.5)));
  const double w_ref = std::sqrt(spec.omega_ir * spec.omega_uv);
  double shape = 0.0;
  for (double k : e.kappa) shape += 4.0 * k / (w_ref * w_ref + 4.0 * k * k);
  e.amplitude = std::sqrt(spec.nu / w_ref / shape);
  return e;
}

inline McCoherence mc_coherence_telegraph(const OneOverFSpec& spec, const SensitivityExpansion& sens,
                                          const std::vector<double>& t_grid, const McOptions& opt) {
  if (opt.n_traj < 100) throw DomainError("mc_coherence needs n_traj >= 100");
  detail::check_grid(t_grid);
  const TelegraphEnsemble ens = make_telegraph_ensemble(spec, opt.per_decade);
  const std::size_t nf = ens.kappa.size();
  double total_rate = 0.0;
  for (double k : ens.kappa) total_rate += k;
  const std::size_t block = detail::effective_block(opt.n_traj, opt.block);
  const std::size_t nb = (opt.n_traj + block - 1) / block;
  const double t_end = t_grid.empty() ? 0.0 : t_grid.back();

  std::vector<std::vector<cplx>> blocks(nb, std::vector<cplx>(t_grid.size(), 0.0));
  parallel_for(nb, opt.jobs, [&](std::size_t b) {
    Rng rng = make_rng(opt.seed, b);
    std::bernoulli_distribution coin(0.5);
    std::exponential_distribution<double> wait(total_rate);
    std::discrete_distribution<std::size_t> pick(ens.kappa.begin(), ens.kappa.end());
    auto& acc = blocks[b];
    std::vector<int> state(nf);
    for (std::size_t j = 0; j < block; ++j) {
      int total = 0;
      for (auto& s : state) {
        s = coin(rng) ? 1 : -1;
        total += s;
      }
      double now = 0.0, phase = 0.0;
      std::size_t next_grid = 0;
      while (next_grid < t_grid.size()) {
        const double event = now + wait(rng);
        const double db = ens.amplitude * total;
        const double rate = sens.d1 * db + 0.5 * sens.d2 * db * db;
        while (next_grid < t_grid.size() && t_grid[next_grid] <= event) {
          acc[next_grid] += std::exp(I_unit * (phase + rate * (t_grid[next_grid] - now)));
          ++next_grid;
        }
        if (event > t_end) break;
        phase += rate * (event - now);
        now = event;
        const std::size_t f = pick(rng);
        state[f] = -state[f];
        total += 2 * state[f];
      }
    }
    for (auto& v : acc) v /= static_cast<double>(block);
  });
  return detail::reduce_blocks(t_grid, blocks, block);
}

inline McCoherence mc_coherence(const OneOverFSpec& spec, const SensitivityExpansion& sens,
                                const std::vector<double>& t_grid, const McOptions& opt) {
  switch (opt.source) {
    case NoiseSource::synthesis: return mc_coherence_synthesis(spec, sens, t_grid, opt);
    case NoiseSource::telegraph: return mc_coherence_telegraph(spec, sens, t_grid, opt);
    case NoiseSource::quasistatic: {
      QuasistaticSpec q{std::sqrt(spec.variance())};
      return mc_coherence_quasistatic(q, sens, t_grid, opt.n_traj, opt.seed, opt.jobs, opt.block);
    }
  }
  return {};
}

// Second-order cumulant prediction exp(i Lambda1 - Lambda2 / 2) for the
// clock-transition coupling, Lambda1 = sigma_b^2 d2 t / 2.
inline cplx cumulant_coherence_clock(double t, const OneOverFSpec& spec, double d2,
                                     Lambda2Mode mode = Lambda2Mode::filter,
                                     ConvolutionNorm norm = ConvolutionNorm::fourier) {
  const double l1 = 0.5 * spec.variance() * d2 * t;
  return std::exp(cplx(-0.5 * lambda2_clock(t, spec, d2, mode, norm), l1));
}

}  // namespace skcat
