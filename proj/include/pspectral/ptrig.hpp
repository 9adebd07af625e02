/**
 * @file ptrig.hpp
 * @brief Generalized p-trigonometric functions sin_p, cos_p, pi_p and signed powers.
 *
 * sin_p is defined on [0, pi_p/2] as the inverse of
 *
 *     F_p(x) = \int_0^x (1 - s^p)^{-1/p} ds,
 *
 * extended to the real line by oddness, the reflection sin_p(pi_p - t) = sin_p(t)
 * and 2 pi_p periodicity; cos_p is its derivative, so |sin_p|^p + |cos_p|^p = 1.
 *
 * Near the top of the branch the integrand is singular. With q = p/(p-1) the
 * conjugate exponent, the tail satisfies
 *
 *     pi_p/2 - F_p(x) = F_q(cos_p^{p-1}) / (p-1),
 *
 * so both halves of the branch reduce to the same regular integral. The direct
 * path (sinp, cosp, ptrig_direct) inverts F by safeguarded Newton with F evaluated
 * by adaptive Gauss-Kronrod. PTrigTable caches a Chebyshev interpolant of the
 * same inversion for use inside ODE right-hand sides.
 */
#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace pspectral {

/// Exponent p of the p-Laplacian. Accuracy is only asserted for p in [1.1, 10].
class PExponent {
 public:
  explicit PExponent(double p) : p_(p) {
    if (!(p > 1.0) || !std::isfinite(p)) {
      throw std::invalid_argument("p-exponent must be a finite number > 1");
    }
  }

  double value() const { return p_; }
  /// q = p / (p - 1)
  double conjugate() const { return p_ / (p_ - 1.0); }

  static constexpr double validated_min = 1.1;
  static constexpr double validated_max = 10.0;

 private:
  double p_;
};

/// |x|^{q-1} x, i.e. the odd extension of x^q. signed_pow(u, p-1) is u^{(p-1)}.
inline double signed_pow(double x, double q) {
  return std::copysign(std::pow(std::fabs(x), q), x);
}

/// pi_p = 2 pi / (p sin(pi/p)); the half period of sin_p.
inline double pi_p(PExponent p) {
  const double pv = p.value();
  return 2.0 * std::numbers::pi / (pv * std::sin(std::numbers::pi / pv));
}

/// Values of the p-trig functions at one point, plus the combinations the
/// Pruefer equations need.
struct PTrigPoint {
  double sin = 0.0;
  double cos = 1.0;
  double cos_pm1 = 1.0;    ///< signed_pow(cos, p - 1)
  double abs_cos_p = 1.0;  ///< |cos|^p = 1 - |sin|^p
};

namespace detail {

/// F_r(y) = \int_0^y (1 - s^r)^{-1/r} ds for 0 <= y with y^r <= 1/2.
/// Substituting s = y u^4 makes the integrand smooth at u = 0.
inline double branch_integral(double r, double y) {
  if (y <= 0.0) return 0.0;
  const double yr = std::pow(y, r);
  auto integrand = [r, y, yr](double u) {
    const double u2 = u * u;
    const double u4 = u2 * u2;
    const double sr = yr * std::pow(u4, r);
    return 4.0 * y * u2 * u * std::pow(1.0 - sr, -1.0 / r);
  };
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, 0.0, 1.0, 8, 1e-12, &error);
}

/// Largest argument handled by branch_integral: y^r = 1/2.
inline double branch_limit(double r) { return std::pow(0.5, 1.0 / r); }

/// Solves branch_integral(r, x) = s for x in [0, branch_limit(r)].
inline double invert_branch(double r, double s) {
  if (s <= 0.0) return 0.0;
  double lo = 0.0;
  double hi = branch_limit(r);
  double x = std::min(s, hi);
  for (int iter = 0; iter < 100; ++iter) {
    const double residual = branch_integral(r, x) - s;
    if (residual > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    const double slope_inv = std::pow(1.0 - std::pow(x, r), 1.0 / r);
    double next = x - residual * slope_inv;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::fabs(next - x);
    x = next;
    if (step <= 4.0 * std::numeric_limits<double>::epsilon() * x || hi - lo <= 1e-300) break;
  }
  return x;
}

/// Reduced argument: t mapped to [0, pi_p/2] with the signs to restore.
struct Reduced {
  double t;
  double sin_sign;
  double cos_sign;
};

inline Reduced reduce(double t, double half_period) {
  const double period = 4.0 * half_period;
  double u = std::fmod(t + half_period, period);
  if (u < 0.0) u += period;
  u -= half_period;  // u in [-pi_p/2, 3 pi_p/2)
  double cos_sign = 1.0;
  if (u > half_period) {
    u = 2.0 * half_period - u;
    cos_sign = -1.0;
  }
  const double sin_sign = u < 0.0 ? -1.0 : 1.0;
  return {std::min(std::fabs(u), half_period), sin_sign, cos_sign};
}

/// Assembles a PTrigPoint for p from the lower-branch solution sin = x.
inline PTrigPoint from_lower(double p, double x) {
  const double cp = std::max(0.0, 1.0 - std::pow(x, p));
  PTrigPoint out;
  out.sin = x;
  out.abs_cos_p = cp;
  out.cos = std::pow(cp, 1.0 / p);
  out.cos_pm1 = std::pow(cp, (p - 1.0) / p);
  return out;
}

/// Assembles a PTrigPoint for p from the upper-branch solution cos^{p-1} = y.
inline PTrigPoint from_upper(double p, double y) {
  const double q = p / (p - 1.0);
  const double cp = std::pow(y, q);
  PTrigPoint out;
  out.cos_pm1 = y;
  out.abs_cos_p = cp;
  out.cos = std::pow(y, 1.0 / (p - 1.0));
  out.sin = std::pow(std::max(0.0, 1.0 - cp), 1.0 / p);
  return out;
}

inline PTrigPoint apply_signs(PTrigPoint v, const Reduced& r) {
  v.sin *= r.sin_sign;
  v.cos *= r.cos_sign;
  v.cos_pm1 *= r.cos_sign;
  return v;
}

/// Branch constants for one p.
struct BranchSplit {
  double p;
  double q;
  double half_period;  ///< pi_p / 2
  double switch_t;     ///< F_p(2^{-1/p}), where |sin_p|^p = 1/2
};

inline BranchSplit make_split(PExponent pe) {
  BranchSplit s;
  s.p = pe.value();
  s.q = pe.conjugate();
  s.half_period = 0.5 * pi_p(pe);
  s.switch_t = branch_integral(s.p, branch_limit(s.p));
  return s;
}

inline PTrigPoint evaluate_direct(const BranchSplit& s, double t) {
  const Reduced r = reduce(t, s.half_period);
  PTrigPoint v;
  if (r.t <= s.switch_t) {
    v = from_lower(s.p, invert_branch(s.p, r.t));
  } else {
    const double tail = (s.p - 1.0) * (s.half_period - r.t);
    v = from_upper(s.p, invert_branch(s.q, tail));
  }
  return apply_signs(v, r);
}

/// Chebyshev interpolant of x/s as a function of z = s^r for the inversion
/// F_r(x) = s on [0, s_max]. x/s is analytic in z.
class BranchInterpolant {
 public:
  BranchInterpolant() = default;

  BranchInterpolant(double r, double s_max) : r_(r), z_max_(std::pow(s_max, r)) {
    // Node values carry ~1e-15 quadrature noise, so raising the degree past
    // convergence only adds noise; stop at the first fit below the floor.
    for (std::size_t degree = 16; degree <= 128; degree += 8) {
      fit(degree);
      if (max_check_error() < 1e-14) return;
    }
  }

  double invert(double s) const {
    if (s <= 0.0) return 0.0;
    const double z = std::pow(s, r_);
    return s * clenshaw(2.0 * z / z_max_ - 1.0);
  }

 private:
  void fit(std::size_t degree) {
    const std::size_t n = degree + 1;
    std::vector<double> values(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double theta = std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(n);
      const double z = 0.5 * z_max_ * (std::cos(theta) + 1.0);
      values[j] = ratio(z);
    }
    coeffs_.assign(n, 0.0);
    for (std::size_t m = 0; m < n; ++m) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double theta = std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(n);
        acc += values[j] * std::cos(static_cast<double>(m) * theta);
      }
      coeffs_[m] = 2.0 * acc / static_cast<double>(n);
    }
    coeffs_[0] *= 0.5;
  }

  double ratio(double z) const {
    const double s = std::pow(z, 1.0 / r_);
    if (s <= 0.0) return 1.0;
    return invert_branch(r_, s) / s;
  }

  double max_check_error() const {
    double worst = 0.0;
    constexpr int checks = 17;
    for (int j = 0; j < checks; ++j) {
      const double z = z_max_ * (static_cast<double>(j) + 0.37) / checks;
      worst = std::max(worst, std::fabs(clenshaw(2.0 * z / z_max_ - 1.0) - ratio(z)));
    }
    return worst;
  }

  double clenshaw(double x) const {
    double b1 = 0.0;
    double b2 = 0.0;
    for (std::size_t m = coeffs_.size(); m-- > 1;) {
      const double b0 = 2.0 * x * b1 - b2 + coeffs_[m];
      b2 = b1;
      b1 = b0;
    }
    return x * b1 - b2 + coeffs_[0];
  }

  double r_ = 2.0;
  double z_max_ = 1.0;
  std::vector<double> coeffs_;
};

}  // namespace detail

/// Direct evaluation: Newton inversion of the defining integral.
inline PTrigPoint ptrig_direct(PExponent p, double t) {
  return detail::evaluate_direct(detail::make_split(p), t);
}

inline double sinp(PExponent p, double t) { return ptrig_direct(p, t).sin; }

inline double cosp(PExponent p, double t) { return ptrig_direct(p, t).cos; }

/// Inverse of the p-polar map (y, x) = e (sin_p(phi), cos_p(phi)) on one period.
/// Returns phi in [-pi_p/2, 3 pi_p/2).
inline double phase_from_cartesian(PExponent p, double y, double x) {
  if (y == 0.0 && x == 0.0) {
    throw std::invalid_argument("phase_from_cartesian: (0, 0) has no phase");
  }
  const detail::BranchSplit s = detail::make_split(p);
  const double ay = std::fabs(y);
  const double ax = std::fabs(x);
  const double yp = std::pow(ay, s.p);
  const double xp = std::pow(ax, s.p);
  const double e = std::pow(yp + xp, 1.0 / s.p);
  double base = 0.0;
  if (yp <= xp) {
    base = detail::branch_integral(s.p, ay / e);
  } else {
    const double c_pm1 = std::pow(ax / e, s.p - 1.0);
    base = s.half_period - detail::branch_integral(s.q, c_pm1) / (s.p - 1.0);
  }
  const double signed_base = y < 0.0 ? -base : base;
  if (x >= 0.0) return signed_base;
  return 2.0 * s.half_period - signed_base;
}

/// Cached fast evaluator for one p. Immutable after construction.
class PTrigTable {
 public:
  explicit PTrigTable(PExponent p)
      : p_(p),
        split_(detail::make_split(p)),
        lower_(split_.p, split_.switch_t),
        upper_(split_.q, (split_.p - 1.0) * (split_.half_period - split_.switch_t)) {}

  PExponent exponent() const { return p_; }
  double half_period() const { return split_.half_period; }
  double period() const { return 4.0 * split_.half_period; }

  PTrigPoint evaluate(double t) const {
    const detail::Reduced r = detail::reduce(t, split_.half_period);
    PTrigPoint v;
    if (r.t <= split_.switch_t) {
      v = detail::from_lower(split_.p, lower_.invert(r.t));
    } else {
      const double tail = (split_.p - 1.0) * (split_.half_period - r.t);
      v = detail::from_upper(split_.p, upper_.invert(tail));
    }
    return detail::apply_signs(v, r);
  }

  double sin(double t) const { return evaluate(t).sin; }
  double cos(double t) const { return evaluate(t).cos; }

 private:
  PExponent p_;
  detail::BranchSplit split_;
  detail::BranchInterpolant lower_;
  detail::BranchInterpolant upper_;
};

/// Memoized PTrigTable per exponent; safe for concurrent callers.
inline std::shared_ptr<const PTrigTable> ptrig_table(PExponent p) {
  static std::mutex mutex;
  static std::map<double, std::shared_ptr<const PTrigTable>> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(p.value()); it != cache.end()) return it->second;
  }
  auto table = std::make_shared<const PTrigTable>(p);
  std::lock_guard lock(mutex);
  return cache.try_emplace(p.value(), std::move(table)).first->second;
}

}  // namespace pspectral
