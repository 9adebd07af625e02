/**
 * @file models.hpp
 * @brief One-dimensional model functions w_{i,a} for a Ricci lower bound (n-1)k < 0.
 *
 * The three weights are tau_1 = sinh(sqrt(-k) t) on [0, inf), tau_2 = exp(sqrt(-k) t)
 * and tau_3 = cosh(sqrt(-k) t) on R, with mu_i = tau_i^{n-1} and drift
 * T_i = -mu_i'/mu_i. A model solves
 *
 *     d/dt (mu w'^{(p-1)}) + lambda mu w^{(p-1)} = 0,   w(a) = -1, w'(a) = 0,
 *
 * and is integrated in Pruefer variables alpha w = e sin_p(phi), w' = e cos_p(phi):
 *
 *     phi'   = alpha - T/(p-1) cos_p^{(p-1)}(phi) sin_p(phi),
 *     log e' = T/(p-1) |cos_p(phi)|^p,
 *
 * with alpha = (lambda/(p-1))^{1/p}, phi(a) = -pi_p/2 and e(a) = alpha.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "pspectral/dopri5.hpp"
#include "pspectral/parallel.hpp"
#include "pspectral/ptrig.hpp"

namespace pspectral {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Family : int { sinh = 1, exp = 2, cosh = 3 };

inline Family family_from_index(int i) {
  if (i < 1 || i > 3) throw std::invalid_argument("model family index must be 1, 2 or 3");
  return static_cast<Family>(i);
}

inline int family_index(Family f) { return static_cast<int>(f); }

/// Model parameters (p, n, k, lambda). alpha is always derived from lambda.
class Params {
 public:
  Params(double p, double n, double k, double lambda) : p_(p), n_(n), k_(k), lambda_(lambda) {
    if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must be > 1");
    if (!(n >= 1.0) || !std::isfinite(n)) throw std::invalid_argument("n must be >= 1");
    if (!(k < 0.0) || !std::isfinite(k)) throw std::invalid_argument("k must be < 0");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be > 0");
  }

  double p() const { return p_; }
  double n() const { return n_; }
  double k() const { return k_; }
  double lambda() const { return lambda_; }
  PExponent exponent() const { return PExponent(p_); }
  double alpha() const { return std::pow(lambda_ / (p_ - 1.0), 1.0 / p_); }
  double sqrt_neg_k() const { return std::sqrt(-k_); }

  Params with_lambda(double lambda) const { return {p_, n_, k_, lambda}; }

 private:
  double p_;
  double n_;
  double k_;
  double lambda_;
};

/// lambda for which alpha takes the given value.
inline double lambda_from_alpha(double p, double alpha) { return (p - 1.0) * std::pow(alpha, p); }

inline bool in_domain(Family f, double t) {
  return f == Family::sinh ? t >= 0.0 : std::isfinite(t);
}

inline double tau(Family f, double t, const Params& params) {
  const double x = params.sqrt_neg_k() * t;
  switch (f) {
    case Family::sinh: return std::sinh(x);
    case Family::exp: return std::exp(x);
    case Family::cosh: return std::cosh(x);
  }
  return 0.0;
}

/// log mu_i(t) = (n-1) log tau_i(t), stable for large |t|.
inline double log_mu(Family f, double t, const Params& params) {
  const double x = params.sqrt_neg_k() * t;
  const double nm1 = params.n() - 1.0;
  if (nm1 == 0.0) return 0.0;
  switch (f) {
    case Family::sinh:
      if (x <= 0.0) return -kInfinity;
      return nm1 * (x + std::log1p(-std::exp(-2.0 * x)) - std::log(2.0));
    case Family::exp: return nm1 * x;
    case Family::cosh: {
      const double ax = std::fabs(x);
      return nm1 * (ax + std::log1p(std::exp(-2.0 * ax)) - std::log(2.0));
    }
  }
  return 0.0;
}

inline double mu(Family f, double t, const Params& params) { return std::exp(log_mu(f, t, params)); }

/// T_i = -mu_i'/mu_i. Throws std::domain_error for family 1 at t <= 0.
inline double weight_T(Family f, double t, const Params& params) {
  const double c = params.sqrt_neg_k();
  const double scale = -(params.n() - 1.0) * c;
  switch (f) {
    case Family::sinh:
      if (!(t > 0.0)) throw std::domain_error("T_1 is only defined for t > 0");
      return scale / std::tanh(c * t);
    case Family::exp: return scale;
    case Family::cosh: return scale * std::tanh(c * t);
  }
  return 0.0;
}

/// Phase/log-amplitude point of a Pruefer trajectory.
struct PrueferState {
  double t = 0.0;
  double phi = 0.0;
  double log_e = 0.0;
};

/// Right-hand side of the Pruefer system for one model.
class PrueferFlow {
 public:
  PrueferFlow(Family family, const Params& params)
      : family_(family),
        params_(params),
        alpha_(params.alpha()),
        inv_pm1_(1.0 / (params.p() - 1.0)),
        trig_(ptrig_table(params.exponent())) {}

  State<2> operator()(double t, const State<2>& y) const {
    const double T = drift(t);
    const PTrigPoint v = trig_->evaluate(y[0]);
    return {alpha_ - T * inv_pm1_ * v.cos_pm1 * v.sin, T * inv_pm1_ * v.abs_cos_p};
  }

  double phase_rate(double t, double phi) const { return (*this)(t, {phi, 0.0})[0]; }

  double drift(double t) const {
    // Family 1 is only evaluated for t > 0 by construction of the start point.
    if (family_ == Family::sinh && t <= 0.0) return -kInfinity;
    return weight_T(family_, t, params_);
  }

  Family family() const { return family_; }
  const Params& params() const { return params_; }
  double alpha() const { return alpha_; }
  const PTrigTable& trig() const { return *trig_; }
  std::shared_ptr<const PTrigTable> trig_ptr() const { return trig_; }

 private:
  Family family_;
  Params params_;
  double alpha_;
  double inv_pm1_;
  std::shared_ptr<const PTrigTable> trig_;
};

/// Critical damping threshold and the extremum behind it.
struct AlphaCritical {
  double l = 0.0;          ///< -min over (-pi_p/2, 0) of cos_p^{(p-1)} sin_p
  double psi_min = 0.0;    ///< location of that minimum
  double alpha_bar = 0.0;  ///< (n-1) l sqrt(-k) / (p-1)
};

inline AlphaCritical alpha_critical(double p, double n, double k) {
  const PExponent pe(p);
  if (!(n >= 1.0)) throw std::invalid_argument("n must be >= 1");
  if (!(k < 0.0)) throw std::invalid_argument("k must be < 0");
  const double half = 0.5 * pi_p(pe);
  const detail::BranchSplit split = detail::make_split(pe);
  auto f = [&split](double psi) {
    const PTrigPoint v = detail::evaluate_direct(split, psi);
    return v.cos_pm1 * v.sin;
  };
  const auto [psi, fmin] = boost::math::tools::brent_find_minima(f, -half, 0.0, 52);
  AlphaCritical out;
  out.l = -fmin;
  out.psi_min = psi;
  out.alpha_bar = (n - 1.0) * out.l * std::sqrt(-k) / (p - 1.0);
  return out;
}

/// Roots psi_1 <= psi_2 in (-pi_p/2, 0) of alpha + (n-1) sqrt(-k) f(psi)/(p-1) = 0,
/// present only when alpha <= alpha_bar. Phases of families 1 and 2 started below
/// psi_1 can never cross it.
struct Equilibria {
  double lower;
  double upper;
};

inline std::optional<Equilibria> damped_equilibria(const Params& params) {
  const AlphaCritical crit = alpha_critical(params.p(), params.n(), params.k());
  const double alpha = params.alpha();
  if (params.n() <= 1.0 || alpha > crit.alpha_bar) return std::nullopt;
  const auto trig = ptrig_table(params.exponent());
  const double gamma = (params.n() - 1.0) * params.sqrt_neg_k() / (params.p() - 1.0);
  auto G = [&](double psi) {
    const PTrigPoint v = trig->evaluate(psi);
    return alpha + gamma * v.cos_pm1 * v.sin;
  };
  const double half = trig->half_period();
  if (G(crit.psi_min) >= 0.0) return Equilibria{crit.psi_min, crit.psi_min};
  boost::math::tools::eps_tolerance<double> tol(50);
  std::uintmax_t iters = 100;
  auto lo = boost::math::tools::toms748_solve(G, -half, crit.psi_min, tol, iters);
  iters = 100;
  auto hi = boost::math::tools::toms748_solve(G, crit.psi_min, 0.0, tol, iters);
  return Equilibria{0.5 * (lo.first + lo.second), 0.5 * (hi.first + hi.second)};
}

enum class StopReason {
  event,    ///< phase target reached
  stalled,  ///< phi' < 0 while phi < 0: the phase can never recover
  trapped,  ///< family 1/2 phase below the lower equilibrium
  horizon,  ///< time horizon exhausted
};

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::event: return "event";
    case StopReason::stalled: return "stalled";
    case StopReason::trapped: return "trapped";
    case StopReason::horizon: return "horizon";
  }
  return "?";
}

/// When to stop a Pruefer integration.
struct StopSpec {
  std::optional<double> phase_target;
  double horizon = kInfinity;  ///< absolute end time
  bool detect_stall = false;
};

struct PrueferTrajectory {
  DenseTrajectory<2> path;  ///< state (phi, log e)
  std::optional<double> event_time;
  StopReason reason = StopReason::horizon;
  double start_time = 0.0;  ///< requested start (path may begin at start + epsilon)
};

/// Default offset for the family-1 start at t = 0.
inline double default_singular_epsilon(const Params& params) {
  return 1e-4 * std::min(1.0 / params.alpha(), 1.0 / params.sqrt_neg_k());
}

/**
 * State at t = epsilon of the family-1 solution started at t = 0 from a phase
 * with |sin_p| = 1. Near that phase cos_p^{(p-1)}(phi) sin_p(phi) = -(p-1) psi + ...,
 * psi = phi - phi0, and T_1 = -(n-1)/t + ..., so psi' = alpha - (n-1) psi / t,
 * giving psi = alpha t / n.
 */
inline PrueferState singular_start(const PrueferState& start, const Params& params, double epsilon) {
  const double n = params.n();
  const double p = params.p();
  const double q = p / (p - 1.0);
  const double alpha = params.alpha();
  PrueferState s;
  s.t = start.t + epsilon;
  s.phi = start.phi + alpha * epsilon / n;
  const double amp = std::pow((p - 1.0) * alpha * epsilon / n, q);
  s.log_e = start.log_e - (n - 1.0) * amp / ((p - 1.0) * q);
  return s;
}

/**
 * Integrates the Pruefer system of one model from `start`. A family-1 start at
 * t = 0 (the singular point of T_1) must have |sin_p(phi)| = 1 and is moved to
 * t = epsilon with the local expansion in singular_start().
 */
inline PrueferTrajectory integrate_pruefer(Family family, const PrueferState& start,
                                           const Params& params, const StopSpec& stop,
                                           double singular_epsilon = 0.0,
                                           const Dopri5Options& ode = {}) {
  if (!in_domain(family, start.t)) {
    throw std::domain_error("start time outside the model family domain");
  }
  const PrueferFlow flow(family, params);
  const double half = flow.trig().half_period();

  PrueferState first = start;
  if (family == Family::sinh && start.t == 0.0) {
    if (std::fabs(std::fabs(flow.trig().sin(start.phi)) - 1.0) > 1e-12) {
      throw std::domain_error("family 1 at t = 0 requires w'(0) = 0, i.e. |sin_p(phi)| = 1");
    }
    const double eps = singular_epsilon > 0.0 ? singular_epsilon : default_singular_epsilon(params);
    first = singular_start(start, params, eps);
  }

  std::optional<Equilibria> traps;
  if (stop.detect_stall && family != Family::cosh) traps = damped_equilibria(params);
  const double trap_delay = pi_p(params.exponent()) / params.alpha();

  PrueferTrajectory out;
  out.start_time = start.t;
  out.reason = StopReason::horizon;
  double event_t = kInfinity;

  auto observer = [&](const StepInfo<2>& step) {
    const DenseSegment<2>& seg = step.segment;
    const double phi1 = step.y[0];
    if (stop.phase_target) {
      const double target = *stop.phase_target;
      const double g0 = seg.rcont[0][0] - target;
      const double g1 = phi1 - target;
      if (g0 < 0.0 ? g1 >= 0.0 : (g0 > 0.0 && g1 <= 0.0)) {
        auto g = [&](double t) { return seg.value(t)[0] - target; };
        boost::math::tools::eps_tolerance<double> tol(52);
        std::uintmax_t iters = 200;
        const auto [lo, hi] =
            boost::math::tools::toms748_solve(g, seg.t0, seg.t1(), g0, g1, tol, iters);
        event_t = 0.5 * (lo + hi);
        out.reason = StopReason::event;
        return false;
      }
    }
    if (stop.detect_stall) {
      if (phi1 < 0.0 && phi1 > -half && step.dydt[0] < 0.0) {
        out.reason = StopReason::stalled;
        return false;
      }
      if (traps && seg.t1() - start.t >= trap_delay && phi1 < traps->lower &&
          phi1 > traps->upper - 2.0 * half) {
        out.reason = StopReason::trapped;
        return false;
      }
    }
    return true;
  };

  out.path = integrate_dopri5<2>(flow, first.t, State<2>{first.phi, first.log_e}, stop.horizon, ode,
                                 observer);
  if (out.reason == StopReason::event) {
    out.event_time = event_t;
    out.path.truncate(event_t);
  }
  return out;
}

/// A model function w_{i,a} on [a, b] with its diameter and maximum.
class ModelSolution {
 public:
  ModelSolution(Family family, double a, const Params& params, PrueferTrajectory traj,
                double epsilon, double epsilon_shift)
      : family_(family),
        a_(a),
        params_(params),
        traj_(std::move(traj)),
        trig_(ptrig_table(params.exponent())),
        epsilon_(epsilon),
        epsilon_shift_(epsilon_shift) {}

  Family family() const { return family_; }
  double a() const { return a_; }
  const Params& params() const { return params_; }
  bool finite() const { return traj_.event_time.has_value(); }
  /// First zero of w' after a, +inf when there is none.
  double b() const { return finite() ? *traj_.event_time : kInfinity; }
  double delta() const { return b() - a_; }
  /// w(b) = e(b)/alpha; 0 when b is infinite.
  double m() const { return finite() ? std::exp(log_e(b())) / params_.alpha() : 0.0; }
  StopReason stop_reason() const { return traj_.reason; }
  /// End of the integrated range (b, or where the integration was abandoned).
  double t_end() const { return traj_.path.t_end(); }
  double singular_epsilon() const { return epsilon_; }
  /// |b(eps) - b(eps/2)| from the family-1 singular start check (0 otherwise).
  double singular_epsilon_shift() const { return epsilon_shift_; }
  const DenseTrajectory<2>& trajectory() const { return traj_.path; }

  PrueferState state(double t) const {
    const double t0 = traj_.path.t_begin();
    if (t < t0) {
      // Inside the singular-start offset: use the local expansion.
      const double half = trig_->half_period();
      const PrueferState s = singular_start({a_, -half, std::log(params_.alpha())}, params_,
                                            std::max(t - a_, 0.0));
      return {t, s.phi, s.log_e};
    }
    const State<2> y = traj_.path(t);
    return {t, y[0], y[1]};
  }

  double phi(double t) const { return state(t).phi; }
  double log_e(double t) const { return state(t).log_e; }
  double e(double t) const { return std::exp(log_e(t)); }

  double w(double t) const {
    const PrueferState s = state(t);
    return std::exp(s.log_e) * trig_->sin(s.phi) / params_.alpha();
  }

  double wdot(double t) const {
    const PrueferState s = state(t);
    return std::exp(s.log_e) * trig_->cos(s.phi);
  }

  /// w'^{(p-1)}(t)
  double flux(double t) const {
    const PrueferState s = state(t);
    return std::exp((params_.p() - 1.0) * s.log_e) * trig_->evaluate(s.phi).cos_pm1;
  }

  /**
   * |d/dt(mu w'^{(p-1)}) + lambda mu w^{(p-1)}| / mu(t), with the derivative taken
   * from the derivative of the dense-output interpolant of (phi, log e).
   */
  double residual(double t) const {
    const double p = params_.p();
    const PrueferState s = state(t);
    const State<2> ds = traj_.path.derivative(t);
    const PTrigPoint v = trig_->evaluate(s.phi);
    const double epm1 = std::exp((p - 1.0) * s.log_e);
    const double F = epm1 * v.cos_pm1;
    const double sin_pm1 = signed_pow(v.sin, p - 1.0);
    const double dF = (p - 1.0) * epm1 * (ds[1] * v.cos_pm1 - sin_pm1 * ds[0]);
    const double T = weight_T(family_, t, params_);
    const double w_pm1 = epm1 * std::pow(params_.alpha(), 1.0 - p) * sin_pm1;
    return std::fabs(dF - T * F + params_.lambda() * w_pm1);
  }

 private:
  Family family_;
  double a_;
  Params params_;
  PrueferTrajectory traj_;
  std::shared_ptr<const PTrigTable> trig_;
  double epsilon_;
  double epsilon_shift_;
};

/// Horizon after which a model still below phase 0 is declared non-oscillating.
inline double model_horizon(const Params& params) {
  return 1e3 * std::max(1.0, 1.0 / params.alpha());
}

/**
 * Solves the model w_{i,a} from phi(a) = -pi_p/2 to the first phi = pi_p/2.
 * For family 1 at a = 0 the singular-start offset is halved until b moves by
 * less than 1e-9.
 */
inline ModelSolution solve_model(Family family, double a, const Params& params) {
  if (!in_domain(family, a)) throw std::domain_error("model offset a outside the family domain");
  const double half = 0.5 * pi_p(params.exponent());
  const PrueferState start{a, -half, std::log(params.alpha())};
  StopSpec stop;
  stop.phase_target = half;
  stop.horizon = a + model_horizon(params);
  stop.detect_stall = true;

  if (family == Family::sinh && a == 0.0) {
    double eps = default_singular_epsilon(params);
    PrueferTrajectory coarse = integrate_pruefer(family, start, params, stop, eps);
    double shift = 0.0;
    for (int halving = 0; halving < 10; ++halving) {
      PrueferTrajectory fine = integrate_pruefer(family, start, params, stop, 0.5 * eps);
      const bool both_finite = coarse.event_time && fine.event_time;
      shift = both_finite ? std::fabs(*coarse.event_time - *fine.event_time)
                          : (coarse.event_time || fine.event_time ? kInfinity : 0.0);
      eps *= 0.5;
      coarse = std::move(fine);
      if (shift < 1e-9) break;
    }
    return ModelSolution(family, a, params, std::move(coarse), eps, shift);
  }
  return ModelSolution(family, a, params, integrate_pruefer(family, start, params, stop), 0.0, 0.0);
}

/// Result of locating the odd model w_{3,-abar}.
struct AbarResult {
  double a_bar = 0.0;
  double residual = 0.0;  ///< |phi(a_bar) - pi_p/2|
};

/**
 * abar > 0 with phi(-abar) = -pi_p/2 for the family-3 phase started at phi(0) = 0.
 * The phase is odd, so abar is the forward hitting time of pi_p/2. On that range
 * phi' >= alpha, hence abar <= pi_p/(2 alpha).
 */
inline AbarResult find_abar(const Params& params) {
  const double half = 0.5 * pi_p(params.exponent());
  const double bound = half / params.alpha();
  StopSpec stop;
  stop.phase_target = half;
  stop.horizon = bound * (1.0 + 1e-6) + 1e-12;
  const PrueferTrajectory traj = integrate_pruefer(Family::cosh, {0.0, 0.0, 0.0}, params, stop);
  if (!traj.event_time) {
    throw NumericalError("find_abar: phase did not reach pi_p/2 within pi_p/(2 alpha)");
  }
  AbarResult out;
  out.a_bar = std::min(*traj.event_time, bound);
  out.residual = std::fabs(traj.path(*traj.event_time)[0] - half);
  return out;
}

/// Limit value m_2 = m(2, a) (independent of a); 0 when alpha <= alpha_bar.
inline double limiting_maximum(const Params& params) {
  return solve_model(Family::exp, 0.0, params).m();
}

struct LandscapeRow {
  double a = 0.0;
  double b = kInfinity;
  double delta = kInfinity;
  double m = 0.0;
  bool finite = false;
  std::string error;  ///< non-empty when this row failed to integrate
};

/// Per-offset summaries (b, delta, m) of a model family, in grid order.
inline std::vector<LandscapeRow> model_landscape(Family family, std::span<const double> a_grid,
                                                 const Params& params) {
  std::vector<LandscapeRow> rows(a_grid.size());
  parallel_for(a_grid.size(), [&](std::size_t i) {
    LandscapeRow& row = rows[i];
    row.a = a_grid[i];
    try {
      const ModelSolution sol = solve_model(family, row.a, params);
      row.b = sol.b();
      row.delta = sol.delta();
      row.m = sol.m();
      row.finite = sol.finite();
    } catch (const std::exception& ex) {
      row.error = ex.what();
    }
  });
  return rows;
}

/// Upper bound sqrt(d^2 + pi^2 cosh^2(sqrt(-k) d/2) / i^2) on the diameter of the
/// i-th collapsing warped product over [-d/2, d/2].
inline double sharpness_diameter_bound(int i_index, double d, double k) {
  if (i_index < 1) throw std::invalid_argument("sequence index must be >= 1");
  if (!(d > 0.0)) throw std::invalid_argument("d must be > 0");
  if (!(k < 0.0)) throw std::invalid_argument("k must be < 0");
  const double fiber = std::numbers::pi * std::cosh(std::sqrt(-k) * d / 2.0) / i_index;
  return std::sqrt(d * d + fiber * fiber);
}

}  // namespace pspectral
