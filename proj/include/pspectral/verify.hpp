/**
 * @file verify.hpp
 * @brief Acceptance suites shared by the `verify` command and the acceptance test.
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "pspectral/eigen.hpp"
#include "pspectral/models.hpp"
#include "pspectral/oracle.hpp"
#include "pspectral/ptrig.hpp"

namespace pspectral {

struct CriterionResult {
  int id = 0;
  std::string suite;
  bool passed = false;
  double worst = 0.0;  ///< worst observed error, or smallest observed margin
  double limit = 0.0;  ///< tolerance the worst value is compared against
  double seconds = 0.0;
  std::string detail;
};

inline CriterionResult make_result(int id, std::string suite) {
  CriterionResult r;
  r.id = id;
  r.suite = std::move(suite);
  return r;
}

struct Criterion {
  int id;
  std::string suite;
  std::string summary;
  std::function<CriterionResult()> run;
};

namespace verify_detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i) v[i] = lo + (hi - lo) * i / (count - 1);
  return v;
}

inline double rel(double x, double ref) { return std::fabs(x - ref) / std::fabs(ref); }

/// Random (p, n, k, lambda) with alpha = factor * alpha_bar, factor in [1.2, 3].
inline Params random_oscillating(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> P(1.5, 4.0), N(2.0, 6.0), K(-2.0, -0.25), F(1.2, 3.0);
  const double p = P(rng), n = N(rng), k = K(rng);
  const double alpha = F(rng) * alpha_critical(p, n, k).alpha_bar;
  return {p, n, k, lambda_from_alpha(p, alpha)};
}

inline CriterionResult ptrig_identity() {
  Stopwatch sw;
  CriterionResult r = make_result(1, "ptrig-identity");
  r.limit = 1e-10;
  std::mt19937_64 rng(20240601);
  for (double p : {1.5, 2.0, 3.0, 5.0}) {
    const PExponent pe(p);
    const detail::BranchSplit split = detail::make_split(pe);
    const double pp = pi_p(pe);
    std::uniform_real_distribution<double> T(-2.0 * pp, 2.0 * pp);
    for (int i = 0; i < 10000; ++i) {
      const PTrigPoint v = detail::evaluate_direct(split, T(rng));
      const double err = std::fabs(std::pow(std::fabs(v.sin), p) + std::pow(std::fabs(v.cos), p) - 1.0);
      r.worst = std::max(r.worst, err);
    }
  }
  r.seconds = sw.seconds();
  r.passed = r.worst <= r.limit && r.seconds < 5.0;
  r.detail = "4x10^4 samples, runtime budget 5 s";
  return r;
}

inline CriterionResult pi_p_quadrature() {
  Stopwatch sw;
  CriterionResult r = make_result(2, "pi-p");
  r.limit = 1e-10;
  boost::math::quadrature::tanh_sinh<double> ts;
  for (double p : {1.2, 1.5, 2.0, 3.0, 5.0, 8.0}) {
    auto f = [p](double s, double complement) {
      // 1 - s^p evaluated from the distance to the endpoint when it is small.
      const double one_minus = (s > 0.5 && complement > 0.0)
                                   ? -std::expm1(p * std::log1p(-complement))
                                   : 1.0 - std::pow(s, p);
      return std::pow(one_minus, -1.0 / p);
    };
    const double q = 2.0 * ts.integrate(f, 0.0, 1.0);
    r.worst = std::max(r.worst, std::fabs(q - pi_p(PExponent(p))));
  }
  const double pi2_err = std::fabs(pi_p(PExponent(2.0)) - std::numbers::pi);
  r.seconds = sw.seconds();
  r.passed = r.worst <= r.limit && pi2_err <= 1e-12;
  std::ostringstream os;
  os << "|pi_2 - pi| = " << pi2_err << " (limit 1e-12)";
  r.detail = os.str();
  return r;
}

inline CriterionResult flat_limit() {
  Stopwatch sw;
  CriterionResult r = make_result(3, "flat-limit");
  r.limit = 1e-3;
  for (double p : {1.5, 2.0, 3.0})
    for (double n : {2.0, 5.0})
      for (double d : {1.0, std::numbers::pi}) {
        const double lb = lambda_bar(n, -1e-8, d, p).value;
        r.worst = std::max(r.worst, std::fabs(lb - flat_lambda(p, d)) / lb);
      }
  r.seconds = sw.seconds();
  r.passed = r.worst <= r.limit && r.seconds < 10.0;
  r.detail = "12 solves at k = -1e-8, runtime budget 10 s";
  return r;
}

inline CriterionResult fd_oracle() {
  Stopwatch sw;
  CriterionResult r = make_result(4, "fd-oracle");
  r.limit = 1e-4;
  for (double n : {2.0, 3.0, 5.0})
    for (double d : {1.0, std::numbers::pi, 5.0}) {
      const double lb = lambda_bar(n, -1.0, d, 2.0).value;
      const double fd = fd_eigenvalue_p2(n, -1.0, d, 4000);
      r.worst = std::max(r.worst, rel(lb, fd));
    }
  r.seconds = sw.seconds();
  r.passed = r.worst <= r.limit && r.seconds < 30.0;
  r.detail = "p = 2, k = -1, N = 4000, runtime budget 30 s";
  return r;
}

inline CriterionResult cross_formulation() {
  Stopwatch sw;
  CriterionResult r = make_result(5, "cross-formulation");
  r.limit = 1e-7;
  int compared = 0, both_infinite = 0, mismatched = 0;
  for (double p : {1.5, 2.0, 3.0})
    for (double n : {2.0, 3.0, 5.0})
      for (double lambda : {2.0, 6.0, 18.0}) {
        const Params params(p, n, -1.0, lambda);
        const double abar = find_abar(params).a_bar;
        for (double a : {-abar, 0.5}) {
          const ModelSolution s = solve_model(Family::cosh, a, params);
          const SecondOrderSolution o = shoot_second_order(Family::cosh, a, params);
          if (s.finite() != o.finite) {
            ++mismatched;
            continue;
          }
          if (!s.finite()) {
            ++both_infinite;
            continue;
          }
          ++compared;
          r.worst = std::max({r.worst, rel(o.delta, s.delta()), rel(o.m, s.m())});
        }
      }
  r.seconds = sw.seconds();
  r.passed = r.worst <= r.limit && mismatched == 0;
  std::ostringstream os;
  os << compared << " finite pairs, " << both_infinite << " agreed infinite, " << mismatched
     << " finiteness mismatches; a in {-abar, 0.5}";
  r.detail = os.str();
  return r;
}

inline CriterionResult monotonicity() {
  Stopwatch sw;
  CriterionResult r = make_result(6, "monotonicity");
  r.limit = -1e-10;
  r.worst = kInfinity;
  const double p = 2.5;
  int comparisons = 0;
  // Smallest relative margin of the stated direction over consecutive grid points.
  auto scan = [&](const std::vector<double>& grid, auto&& value, bool increasing) {
    std::vector<double> vals(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { vals[i] = value(grid[i]); });
    double worst = kInfinity;
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
      const double diff = increasing ? vals[i + 1] - vals[i] : vals[i] - vals[i + 1];
      worst = std::min(worst, diff / std::max(std::fabs(vals[i]), std::fabs(vals[i + 1])));
      ++comparisons;
    }
    r.worst = std::min(r.worst, worst);
    return worst;
  };
  const double wd = scan(linspace(0.5, 6.0, 21), [&](double d) { return lambda_bar(3.0, -1.0, d, p).value; }, false);
  const double wk = scan(linspace(-4.0, -0.05, 21), [&](double k) { return lambda_bar(3.0, k, 2.0, p).value; }, true);
  const double wn = scan(linspace(1.0, 6.0, 21), [&](double n) { return lambda_bar(n, -1.0, 2.0, p).value; }, true);
  // The p = 2 finite-volume eigenvalue gives an n-trend independent of the shooting solver.
  const double fd2 = fd_eigenvalue_p2(2.0, -1.0, 2.0, 4000);
  const double fd5 = fd_eigenvalue_p2(5.0, -1.0, 2.0, 4000);
  r.seconds = sw.seconds();
  r.passed = r.worst >= r.limit && comparisons == 60;
  std::ostringstream os;
  os << comparisons << " comparisons at p = 2.5; smallest relative margin per direction: d " << wd
     << ", k " << wk << ", n " << wn << "; p = 2 finite-volume oracle at d = 2: lambda(n=2) = " << fd2
     << ", lambda(n=5) = " << fd5;
  r.detail = os.str();
  return r;
}

inline CriterionResult diameter() {
  Stopwatch sw;
  CriterionResult r = make_result(7, "diameter");
  r.limit = 0.0;
  r.worst = kInfinity;
  std::mt19937_64 rng(7);
  int checks = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const Params params = random_oscillating(rng);
    const double jensen = pi_p(params.exponent()) / params.alpha();
    const double c = params.sqrt_neg_k();
    const double abar = find_abar(params).a_bar;
    auto margin = [&](double m) {
      r.worst = std::min(r.worst, m);
      ++checks;
    };
    for (double a : {0.0, 0.5 / c, 2.0 / c}) margin(solve_model(Family::sinh, a, params).delta() / jensen - 1.0);
    margin(solve_model(Family::exp, 0.0, params).delta() / jensen - 1.0);
    margin(1.0 - 2.0 * abar / jensen);
    for (double off : {-1.0, -0.25, 0.25, 1.0}) {
      margin(solve_model(Family::cosh, -abar + off, params).delta() / (2.0 * abar) - 1.0);
    }
  }
  r.seconds = sw.seconds();
  r.passed = r.worst > r.limit;
  r.detail = std::to_string(checks) + " strict inequalities over 10 random oscillating parameter sets; worst = smallest relative margin";
  return r;
}

inline CriterionResult alpha_closed_form() {
  Stopwatch sw;
  CriterionResult r = make_result(8, "alpha-critical");
  r.limit = 1e-10;
  for (double n : {2.0, 3.0, 5.0})
    for (double k : {-0.25, -1.0, -4.0}) {
      const double ab = alpha_critical(2.0, n, k).alpha_bar;
      r.worst = std::max(r.worst, std::fabs(ab - (n - 1.0) * std::sqrt(-k) / 2.0));
    }
  r.seconds = sw.seconds();
  r.passed = r.worst <= r.limit;
  r.detail = "p = 2, 9 (n, k) pairs";
  return r;
}

inline CriterionResult m_landscape() {
  Stopwatch sw;
  CriterionResult r = make_result(9, "m-landscape");
  r.limit = 1e-3;
  bool monotone = true;
  const std::vector<Params> cases{{2.0, 3.0, -1.0, 6.0}, {1.5, 2.0, -1.0, 4.0}, {3.0, 4.0, -0.5, 8.0}};
  for (const Params& params : cases) {
    const double c = params.sqrt_neg_k();
    const double m2 = limiting_maximum(params);
    const double abar = find_abar(params).a_bar;
    std::vector<double> a3{-abar, -0.5 * abar, 0.0};
    std::vector<double> a1{0.0};
    for (double s : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
      a3.push_back(s / c);
      a1.push_back(s / c);
    }
    const auto rows3 = model_landscape(Family::cosh, a3, params);
    const auto rows1 = model_landscape(Family::sinh, a1, params);
    for (std::size_t i = 0; i + 1 < rows3.size(); ++i) monotone = monotone && rows3[i + 1].m < rows3[i].m;
    for (std::size_t i = 0; i + 1 < rows1.size(); ++i) monotone = monotone && rows1[i + 1].m > rows1[i].m;
    for (const auto* rows : {&rows3, &rows1}) {
      for (const auto& row : *rows) monotone = monotone && row.finite && row.error.empty();
      r.worst = std::max(r.worst, std::fabs(rows->back().m - m2));
    }
    monotone = monotone && rows3.back().m > m2 && rows1.back().m < m2;
  }
  r.seconds = sw.seconds();
  r.passed = monotone && r.worst <= r.limit;
  r.detail = std::string("strict monotonicity ") + (monotone ? "holds" : "FAILS") +
             "; worst = max |m(i, 16/sqrt(-k)) - m_2|";
  return r;
}

inline CriterionResult round_trip() {
  Stopwatch sw;
  CriterionResult r = make_result(10, "round-trip");
  r.limit = 1e-6;
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> P(1.5, 4.0), N(1.5, 6.0), K(-2.0, -0.1), L(-1.5, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double p = P(rng), n = N(rng), k = K(rng), lambda = std::exp(L(rng));
    const double d = delta_bar(n, k, lambda, p).value;
    r.worst = std::max(r.worst, rel(lambda_bar(n, k, d, p).value, lambda));
  }
  r.seconds = sw.seconds();
  r.passed = r.worst <= r.limit;
  r.detail = "10 random (p, n, k, lambda)";
  return r;
}

inline CriterionResult gradient_comparison() {
  Stopwatch sw;
  CriterionResult r = make_result(11, "gradient-comparison");
  r.limit = 1e-8;
  r.worst = -kInfinity;
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> fam(1, 3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int applicable = 0;
  bool all_passed = true;
  for (int trial = 0; trial < 20; ++trial) {
    const Params params = random_oscillating(rng);
    const double c = params.sqrt_neg_k();
    const double abar = find_abar(params).a_bar;
    auto random_model = [&] {
      const Family f = family_from_index(fam(rng));
      const double a = f == Family::cosh ? -abar + 3.0 * U(rng) / c : 3.0 * U(rng) / c;
      return solve_model(f, a, params);
    };
    ModelSolution s1 = random_model();
    ModelSolution s2 = random_model();
    const bool swap = s1.m() > s2.m();
    const GradientReport rep = check_gradient_comparison(swap ? s2 : s1, swap ? s1 : s2, 200, r.limit);
    applicable += rep.applicable ? 1 : 0;
    all_passed = all_passed && rep.applicable && rep.passed;
    r.worst = std::max(r.worst, rep.max_excess);
  }
  r.seconds = sw.seconds();
  r.passed = all_passed && applicable == 20;
  r.detail = std::to_string(applicable) + "/20 pairs applicable, 200 samples each; worst = max(|w1'| - |w2'|)";
  return r;
}

inline CriterionResult sharpness() {
  Stopwatch sw;
  CriterionResult r = make_result(12, "sharpness");
  r.limit = 1e-2;
  const double d = 2.0, k = -1.0;
  bool monotone = true;
  double prev = kInfinity;
  for (int i = 1; i <= 100; ++i) {
    const double v = sharpness_diameter_bound(i, d, k);
    monotone = monotone && v < prev && v > d;
    prev = v;
  }
  const double at10 = sharpness_diameter_bound(10, d, k);
  const double fiber = std::numbers::pi * std::cosh(1.0) / 10.0;
  const double independent = std::hypot(d, fiber);
  r.worst = rel(at10, independent);
  const double tail = std::fabs(sharpness_diameter_bound(1000000, d, k) - d);
  r.seconds = sw.seconds();
  r.passed = monotone && r.worst <= r.limit && tail <= 1e-6;
  std::ostringstream os;
  os << "decreasing over i = 1..100: " << (monotone ? "yes" : "NO") << "; |bound(1e6) - d| = " << tail
     << "; bound(10)/d - 1 = " << at10 / d - 1.0;
  r.detail = os.str();
  return r;
}

}  // namespace verify_detail

inline const std::vector<Criterion>& acceptance_criteria() {
  using namespace verify_detail;
  static const std::vector<Criterion> list{
      {1, "ptrig-identity", "|sin_p|^p + |cos_p|^p = 1", ptrig_identity},
      {2, "pi-p", "pi_p closed form vs quadrature", pi_p_quadrature},
      {3, "flat-limit", "k -> 0 degeneration of lambda_bar", flat_limit},
      {4, "fd-oracle", "p = 2 shooting vs finite-volume eigenvalue", fd_oracle},
      {5, "cross-formulation", "Pruefer vs second-order shooting", cross_formulation},
      {6, "monotonicity", "lambda_bar monotone in d, k, n", monotonicity},
      {7, "diameter", "model diameters vs pi_p/alpha and 2 abar", diameter},
      {8, "alpha-critical", "alpha_bar closed form at p = 2", alpha_closed_form},
      {9, "m-landscape", "m(3, .) and m(1, .) monotone with limit m_2", m_landscape},
      {10, "round-trip", "lambda_bar(delta_bar(lambda)) = lambda", round_trip},
      {11, "gradient-comparison", "model gradient comparison", gradient_comparison},
      {12, "sharpness", "collapsing-sequence diameter bound", sharpness},
  };
  return list;
}

inline std::vector<std::string> suite_names() {
  std::vector<std::string> names{"all"};
  for (const auto& c : acceptance_criteria()) names.push_back(c.suite);
  return names;
}

/// Runs one suite by name, or every suite for "all". Unknown names throw std::invalid_argument.
inline std::vector<CriterionResult> run_suites(const std::string& name) {
  std::vector<CriterionResult> out;
  for (const auto& c : acceptance_criteria()) {
    if (name != "all" && name != c.suite) continue;
    try {
      out.push_back(c.run());
    } catch (const std::exception& ex) {
      CriterionResult failed = make_result(c.id, c.suite);
      failed.detail = std::string("exception: ") + ex.what();
      out.push_back(failed);
    }
  }
  if (out.empty()) throw std::invalid_argument("unknown verification suite: " + name);
  return out;
}

}  // namespace pspectral
