/**
 * @file eigen.hpp
 * @brief The sharp bound lambda_bar(n, k, d) and its inverse delta_bar(n, k, lambda).
 *
 * lambda_bar is the lambda for which the family-3 phase started at phi(0) = 0
 * reaches pi_p/2 exactly at t = d/2.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "pspectral/models.hpp"

namespace pspectral {

struct EigenEstimate {
  double value = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  std::uint64_t iterations = 0;
  double residual = 0.0;  ///< |phi(d/2) - pi_p/2| at the returned value
};

/// phi(half_d) for the family-3 flow with phi(0) = 0.
inline double shoot_phase(const Params& params, double half_d) {
  if (!(half_d > 0.0)) throw std::invalid_argument("half_d must be > 0");
  const PrueferFlow flow(Family::cosh, params);
  const auto traj = integrate_dopri5<2>(flow, 0.0, State<2>{0.0, 0.0}, half_d);
  return traj(half_d)[0];
}

/// Smallest change of the shooting phase across [lambda/2, 2 lambda] that is
/// trusted as a root; about 1e5 times the integrator tolerance.
inline constexpr double kMinShootingSpread = 1e-6;

/// (p-1)(pi_p/d)^p, the value of lambda_bar at k = 0.
inline double flat_lambda(double p, double d) {
  return (p - 1.0) * std::pow(pi_p(PExponent(p)) / d, p);
}

inline EigenEstimate lambda_bar(double n, double k, double d, double p, double tol = 1e-10) {
  if (!(d > 0.0) || !std::isfinite(d)) throw std::invalid_argument("d must be > 0");
  if (!(k < 0.0)) throw std::invalid_argument("k must be < 0");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  const double half_pi = 0.5 * pi_p(PExponent(p));
  const double half_d = 0.5 * d;
  auto g = [&](double lambda) { return shoot_phase(Params(p, n, k, lambda), half_d) - half_pi; };

  EigenEstimate out;
  double hi = flat_lambda(p, d);
  double g_hi = g(hi);
  if (n == 1.0 || g_hi <= 0.0) {
    out.value = out.bracket_lo = out.bracket_hi = hi;
    out.residual = std::fabs(g_hi);
    return out;
  }
  double lo = 0.5 * hi;
  double g_lo = g(lo);
  int halvings = 1;
  while (g_lo >= 0.0) {
    if (halvings >= 60) {
      throw NumericalError("lambda_bar: no lower bracket after 60 halvings (d = " +
                           std::to_string(d) + ", g = " + std::to_string(g_lo) + ")");
    }
    hi = lo;
    g_hi = g_lo;
    lo *= 0.5;
    g_lo = g(lo);
    ++halvings;
  }

  auto done = [tol](double a, double b) { return std::fabs(b - a) <= tol * std::min(a, b); };
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, g_lo, g_hi, done, iters);
  out.bracket_lo = a;
  out.bracket_hi = b;
  out.value = 0.5 * (a + b);
  out.iterations = static_cast<std::uint64_t>(iters) + static_cast<std::uint64_t>(halvings);
  out.residual = std::fabs(g(out.value));
  if (out.value > flat_lambda(p, d) * (1.0 + 1e-12)) {
    throw NumericalError("lambda_bar: result exceeds the k = 0 value");
  }
  // For large (n-1) c d the eigenvalue is exponentially small and g barely
  // moves with lambda; a sign change there is integrator noise, not a root.
  const double spread = g(2.0 * out.value) - g(0.5 * out.value);
  if (!(spread >= kMinShootingSpread)) {
    throw NumericalError("lambda_bar: shooting function unresolved (d = " + std::to_string(d) +
                         ", g(2x) - g(x/2) = " + std::to_string(spread) + ")");
  }
  return out;
}

/// delta_bar = 2 abar, the smallest model diameter over all families and offsets.
inline EigenEstimate delta_bar(double n, double k, double lambda, double p) {
  const Params params(p, n, k, lambda);
  const AbarResult ab = find_abar(params);
  EigenEstimate out;
  out.value = out.bracket_lo = out.bracket_hi = 2.0 * ab.a_bar;
  out.residual = ab.residual;
  return out;
}

struct DiameterRow {
  double a = 0.0;
  double delta = kInfinity;
  double margin = 0.0;  ///< delta - 2 abar
  bool at_abar = false;
  bool ok = false;
};

struct DiameterReport {
  double a_bar = 0.0;
  double delta_bar = 0.0;
  std::vector<DiameterRow> rows;
  bool passed = true;
};

/// Checks delta(3, a) > 2 abar for a != -abar and equality (to 1e-8) at a = -abar.
inline DiameterReport verify_diameter_minimality(const Params& params, std::span<const double> a_grid) {
  DiameterReport report;
  report.a_bar = find_abar(params).a_bar;
  report.delta_bar = 2.0 * report.a_bar;
  report.rows.resize(a_grid.size());
  parallel_for(a_grid.size(), [&](std::size_t i) {
    DiameterRow& row = report.rows[i];
    row.a = a_grid[i];
    const ModelSolution sol = solve_model(Family::cosh, row.a, params);
    row.delta = sol.delta();
    row.margin = row.delta - report.delta_bar;
    row.at_abar = std::fabs(row.a + report.a_bar) <= 1e-12 * std::max(1.0, report.a_bar);
    row.ok = row.at_abar ? std::fabs(row.margin) <= 1e-8 : row.margin > 0.0;
  });
  for (const auto& row : report.rows) report.passed = report.passed && row.ok;
  return report;
}

}  // namespace pspectral
