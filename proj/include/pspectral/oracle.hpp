/**
 * @file oracle.hpp
 * @brief Verification paths independent of the Pruefer solver: second-order shooting,
 *        a p = 2 finite-volume eigensolver, and checkers for the gradient comparison
 *        and maxima-fit properties of the models.
 */
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "pspectral/eigen.hpp"
#include "pspectral/models.hpp"

namespace pspectral {

/// b, delta, m of a model computed from the raw second-order equation.
struct SecondOrderSolution {
  double b = kInfinity;
  double delta = kInfinity;
  double m = 0.0;
  bool finite = false;
  double epsilon = 0.0;        ///< start offset used
  double epsilon_shift = 0.0;  ///< |delta(eps) - delta(eps/2)|
};

namespace detail {

/// Integral of mu(s)/mu(a + eps) over [a, a + eps].
inline double start_mass(Family family, double a, double eps, const Params& params) {
  const double ref = log_mu(family, a + eps, params);
  if (family == Family::sinh && a == 0.0) {
    // s = eps u^{1/n} removes the s^{n-1} behaviour at the pole.
    const double n = params.n();
    auto f = [&](double u) {
      if (u <= 0.0) return 1.0;
      const double s = eps * std::pow(u, 1.0 / n);
      const double ratio = std::exp(log_mu(family, s, params) - ref);
      return ratio * std::pow(u, 1.0 / n - 1.0);
    };
    return eps / n * boost::math::quadrature::gauss<double, 20>::integrate(f, 0.0, 1.0);
  }
  auto f = [&](double s) { return std::exp(log_mu(family, s, params) - ref); };
  return boost::math::quadrature::gauss<double, 20>::integrate(f, a, a + eps);
}

inline SecondOrderSolution shoot_second_order_once(Family family, double a, const Params& params,
                                                   double eps) {
  namespace ode = boost::numeric::odeint;
  using S = std::array<double, 2>;
  const double p = params.p();
  const double lambda = params.lambda();
  const double t_start = a + eps;
  const double ref = log_mu(family, t_start, params);

  // v = mu w'^{(p-1)} / mu(t_start)
  auto sys = [&](const S& x, S& dxdt, double t) {
    const double mu_rel = std::exp(log_mu(family, t, params) - ref);
    dxdt[0] = signed_pow(x[1] / mu_rel, 1.0 / (p - 1.0));
    dxdt[1] = -lambda * mu_rel * signed_pow(x[0], p - 1.0);
  };

  // Leading-order bootstrap with w = -1 on [a, a + eps].
  const double v0 = lambda * start_mass(family, a, eps, params);
  const double wdot0 = std::pow(v0, 1.0 / (p - 1.0));
  S x{-1.0 + eps * wdot0 * (p - 1.0) / p, v0};

  double horizon = model_horizon(params);
  const double growth = (params.n() - 1.0) * params.sqrt_neg_k();
  if (growth > 0.0) horizon = std::min(horizon, 600.0 / growth);
  const double t_limit = t_start + horizon;

  auto stepper = ode::make_dense_output(1e-12, 1e-12, ode::runge_kutta_dopri5<S>());
  stepper.initialize(x, t_start, 1e-3 * std::min(1.0, 1.0 / params.alpha()));

  SecondOrderSolution out;
  out.epsilon = eps;
  for (std::size_t step = 0; step < 5'000'000; ++step) {
    const auto [t0, t1] = stepper.do_step(sys);
    const S& x1 = stepper.current_state();
    if (x1[1] < 0.0) {
      auto v_at = [&](double t) {
        S y;
        stepper.calc_state(t, y);
        return y[1];
      };
      boost::math::tools::eps_tolerance<double> tol(52);
      std::uintmax_t iters = 200;
      const auto [lo, hi] = boost::math::tools::toms748_solve(v_at, t0, t1, tol, iters);
      out.b = 0.5 * (lo + hi);
      S y;
      stepper.calc_state(out.b, y);
      out.m = y[0];
      out.delta = out.b - a;
      out.finite = true;
      return out;
    }
    if (!std::isfinite(x1[0]) || !std::isfinite(x1[1])) {
      throw NumericalError("shoot_second_order: non-finite state");
    }
    if (t1 >= t_limit) return out;
  }
  throw NumericalError("shoot_second_order: step limit exceeded");
}

}  // namespace detail

/**
 * Integrates (w, v), v = mu w'^{(p-1)}, with w' = (v/mu)^{1/(p-1)} and
 * v' = -lambda mu w^{(p-1)}, from a + eps (one-term bootstrap) to the first
 * sign change of v. eps is halved until delta and m move by less than 1e-10.
 */
inline SecondOrderSolution shoot_second_order(Family family, double a, const Params& params) {
  if (!in_domain(family, a)) throw std::domain_error("model offset a outside the family domain");
  double eps = 1e-3 * std::min(1.0 / params.alpha(), 1.0 / params.sqrt_neg_k());
  SecondOrderSolution coarse = detail::shoot_second_order_once(family, a, params, eps);
  for (int halving = 0; halving < 12; ++halving) {
    eps *= 0.5;
    SecondOrderSolution fine = detail::shoot_second_order_once(family, a, params, eps);
    double shift = 0.0;
    if (coarse.finite != fine.finite) {
      shift = kInfinity;
    } else if (fine.finite) {
      shift = std::max(std::fabs(coarse.delta - fine.delta), std::fabs(coarse.m - fine.m));
    }
    fine.epsilon_shift = shift;
    coarse = fine;
    if (shift < 1e-10) break;
  }
  return coarse;
}

/**
 * Smallest positive Neumann eigenvalue of -(mu_3 w')' = lambda mu_3 w on
 * [-d/2, d/2] (p = 2), from a finite-volume pencil K w = lambda M w on N
 * uniform cells solved by inverse iteration with the constant mode deflated.
 */
inline double fd_eigenvalue_p2(double n, double k, double d, int N) {
  if (N < 100) throw std::invalid_argument("N must be >= 100");
  if (!(d > 0.0)) throw std::invalid_argument("d must be > 0");
  if (!(k < 0.0)) throw std::invalid_argument("k must be < 0");
  if (!(n >= 1.0)) throw std::invalid_argument("n must be >= 1");
  const double c = std::sqrt(-k);
  const double h = d / N;
  const auto weight = [&](double t) { return std::pow(std::cosh(c * t), n - 1.0); };

  const std::size_t M = static_cast<std::size_t>(N) + 1;
  std::vector<double> mass(M), flux(N);
  for (std::size_t j = 0; j < M; ++j) {
    mass[j] = weight(-0.5 * d + h * j) * h;
  }
  mass.front() *= 0.5;
  mass.back() *= 0.5;
  for (int j = 0; j < N; ++j) flux[j] = weight(-0.5 * d + h * (j + 0.5)) / h;
  double total_mass = 0.0;
  for (double m : mass) total_mass += m;

  auto apply_K = [&](const std::vector<double>& x, std::vector<double>& y) {
    std::fill(y.begin(), y.end(), 0.0);
    for (int j = 0; j < N; ++j) {
      const double f = flux[j] * (x[j + 1] - x[j]);
      y[j] -= f;
      y[j + 1] += f;
    }
  };
  auto deflate = [&](std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t j = 0; j < M; ++j) s += mass[j] * x[j];
    s /= total_mass;
    for (double& v : x) v -= s;
  };
  auto normalize = [&](std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t j = 0; j < M; ++j) s += mass[j] * x[j] * x[j];
    s = std::sqrt(s);
    for (double& v : x) v /= s;
  };

  // K with x_0 pinned to 0: tridiagonal on indices 1..N, solved by the Thomas algorithm.
  std::vector<double> diag(M, 0.0), upper(M, 0.0);
  for (int j = 0; j < N; ++j) {
    diag[j] += flux[j];
    diag[j + 1] += flux[j];
    upper[j] = -flux[j];
  }
  std::vector<double> cprime(M), dprime(M);
  auto solve_pinned = [&](const std::vector<double>& rhs, std::vector<double>& x) {
    cprime[1] = upper[1] / diag[1];
    dprime[1] = rhs[1] / diag[1];
    for (std::size_t j = 2; j < M; ++j) {
      const double den = diag[j] - upper[j - 1] * cprime[j - 1];
      cprime[j] = upper[j] / den;
      dprime[j] = (rhs[j] - upper[j - 1] * dprime[j - 1]) / den;
    }
    x[0] = 0.0;
    x[M - 1] = dprime[M - 1];
    for (std::size_t j = M - 2; j >= 1; --j) x[j] = dprime[j] - cprime[j] * x[j + 1];
  };

  std::vector<double> x(M), rhs(M), Kx(M);
  for (std::size_t j = 0; j < M; ++j) x[j] = -std::cos(std::numbers::pi * j / N);
  deflate(x);
  normalize(x);
  double lambda = kInfinity;
  for (int iter = 0; iter < 500; ++iter) {
    for (std::size_t j = 0; j < M; ++j) rhs[j] = mass[j] * x[j];
    solve_pinned(rhs, x);
    deflate(x);
    normalize(x);
    apply_K(x, Kx);
    double rq = 0.0;
    for (std::size_t j = 0; j < M; ++j) rq += x[j] * Kx[j];
    if (std::fabs(rq - lambda) <= 1e-14 * rq) return rq;
    lambda = rq;
  }
  throw NumericalError("fd_eigenvalue_p2: inverse iteration did not converge");
}

struct GradientReport {
  bool applicable = false;
  bool passed = false;
  double max_excess = -kInfinity;  ///< max over samples of |w1'| - |w2'| at equal values
  int samples = 0;
};

/// w^{-1}(s) on [a, b] by bracketing on the dense output (w is increasing there).
inline double invert_model(const ModelSolution& sol, double s) {
  const double a = sol.a();
  const double b = sol.b();
  if (s <= -1.0) return a;
  if (s >= sol.m()) return b;
  auto f = [&](double t) { return sol.w(t) - s; };
  boost::math::tools::eps_tolerance<double> tol(52);
  std::uintmax_t iters = 200;
  const auto [lo, hi] = boost::math::tools::toms748_solve(f, a, b, tol, iters);
  return 0.5 * (lo + hi);
}

/**
 * Compares |w1'| and |w2'| at equal values of w over the range of w1. Requires
 * both models finite and w1[a1, b1] contained in w2[a2, b2]; otherwise the
 * report is marked not applicable and nothing is asserted.
 */
inline GradientReport check_gradient_comparison(const ModelSolution& sol1, const ModelSolution& sol2,
                                                int samples, double tol = 1e-8) {
  GradientReport report;
  if (!sol1.finite() || !sol2.finite() || sol1.m() > sol2.m()) return report;
  report.applicable = true;
  report.samples = samples;
  const double top = sol1.m();
  for (int j = 0; j < samples; ++j) {
    const double s = samples == 1 ? -1.0 : -1.0 + (top + 1.0) * j / (samples - 1);
    const double g1 = std::fabs(sol1.wdot(invert_model(sol1, s)));
    const double g2 = std::fabs(sol2.wdot(invert_model(sol2, s)));
    report.max_excess = std::max(report.max_excess, g1 - g2);
  }
  report.passed = report.max_excess <= tol;
  return report;
}

struct MaximaFit {
  Family family = Family::cosh;
  double a = 0.0;
  double m = 0.0;
};

namespace detail {

/// Solves m(family, a) = ustar for a in [lo, hi] given m - ustar changes sign there.
inline MaximaFit fit_offset(Family family, const Params& params, double ustar, double lo, double hi,
                            double f_lo, double f_hi) {
  auto f = [&](double a) { return solve_model(family, a, params).m() - ustar; };
  auto done = [](double x, double y) { return std::fabs(x - y) <= 1e-11 * std::max(1.0, std::fabs(x)); };
  std::uintmax_t iters = 200;
  const auto [a0, a1] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, done, iters);
  MaximaFit fit;
  fit.family = family;
  fit.a = 0.5 * (a0 + a1);
  fit.m = solve_model(family, fit.a, params).m();
  return fit;
}

}  // namespace detail

/**
 * Finds a model (family, a) whose maximum equals ustar. For alpha > alpha_bar
 * family 3 covers [m_2, 1] and family 1 covers [m(1,0), m_2); for
 * alpha <= alpha_bar family 3 is searched over [-abar, inf). Returns nullopt when
 * no model has that maximum.
 */
inline std::optional<MaximaFit> check_maxima_fit(const Params& params, double ustar) {
  if (!(ustar > 0.0) || !(ustar <= 1.0)) throw std::invalid_argument("ustar must lie in (0, 1]");
  const double abar = find_abar(params).a_bar;
  const double scale = 1.0 / params.sqrt_neg_k();
  const AlphaCritical crit = alpha_critical(params.p(), params.n(), params.k());
  const bool oscillating = params.alpha() > crit.alpha_bar;

  if (ustar == 1.0) return MaximaFit{Family::cosh, -abar, solve_model(Family::cosh, -abar, params).m()};

  auto search_family3 = [&](double floor) -> std::optional<MaximaFit> {
    const double lo = -abar;
    const double f_lo = solve_model(Family::cosh, lo, params).m() - ustar;
    double hi = lo + scale;
    double f_hi = solve_model(Family::cosh, hi, params).m() - ustar;
    for (int i = 0; i < 12 && f_hi > 0.0; ++i) {
      hi = lo + (hi - lo) * 2.0;
      f_hi = solve_model(Family::cosh, hi, params).m() - ustar;
    }
    if (f_hi > 0.0 || ustar <= floor) return std::nullopt;
    if (f_lo == 0.0) return MaximaFit{Family::cosh, lo, ustar};
    return detail::fit_offset(Family::cosh, params, ustar, lo, hi, f_lo, f_hi);
  };

  if (!oscillating) return search_family3(0.0);

  const double m2 = limiting_maximum(params);
  if (ustar == m2) return MaximaFit{Family::exp, 0.0, m2};
  if (ustar > m2) return search_family3(m2);

  const double f_lo = solve_model(Family::sinh, 0.0, params).m() - ustar;
  if (f_lo > 0.0) return std::nullopt;
  if (f_lo == 0.0) return MaximaFit{Family::sinh, 0.0, ustar};
  double hi = scale;
  double f_hi = solve_model(Family::sinh, hi, params).m() - ustar;
  for (int i = 0; i < 12 && f_hi < 0.0; ++i) {
    hi *= 2.0;
    f_hi = solve_model(Family::sinh, hi, params).m() - ustar;
  }
  if (f_hi < 0.0) return std::nullopt;
  return detail::fit_offset(Family::sinh, params, ustar, 0.0, hi, f_lo, f_hi);
}

}  // namespace pspectral
