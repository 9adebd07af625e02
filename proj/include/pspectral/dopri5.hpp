/**
 * @file dopri5.hpp
 * @brief Dormand-Prince 5(4) integrator keeping the continuous extension of every
 *        accepted step, so a whole trajectory can be interpolated afterwards.
 *
 * Coefficients and the order-4 dense output follow Hairer, Norsett & Wanner,
 * "Solving Ordinary Differential Equations I" (DOPRI5 / CONTD5).
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace pspectral {

/// Raised when a numerical procedure cannot deliver a result (step-size
/// underflow, bracket failure, non-convergence).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <std::size_t N>
using State = std::array<double, N>;

/// One accepted step and its interpolation coefficients.
template <std::size_t N>
struct DenseSegment {
  double t0 = 0.0;
  double h = 0.0;
  std::array<State<N>, 5> rcont{};

  double t1() const { return t0 + h; }

  State<N> value(double t) const {
    const double theta = (t - t0) / h;
    const double theta1 = 1.0 - theta;
    State<N> y;
    for (std::size_t i = 0; i < N; ++i) {
      y[i] = rcont[0][i] +
             theta * (rcont[1][i] +
                      theta1 * (rcont[2][i] + theta * (rcont[3][i] + theta1 * rcont[4][i])));
    }
    return y;
  }

  /// d/dt of the interpolating polynomial.
  State<N> derivative(double t) const {
    const double th = (t - t0) / h;
    State<N> dy;
    for (std::size_t i = 0; i < N; ++i) {
      // y = r0 + th r1 + (th - th^2) r2 + (th^2 - th^3) r3 + (th^2 - 2 th^3 + th^4) r4
      const double d = rcont[1][i] + (1.0 - 2.0 * th) * rcont[2][i] +
                       (2.0 * th - 3.0 * th * th) * rcont[3][i] +
                       (2.0 * th - 6.0 * th * th + 4.0 * th * th * th) * rcont[4][i];
      dy[i] = d / h;
    }
    return dy;
  }
};

/// Piecewise-polynomial interpolant over the accepted steps of an integration.
template <std::size_t N>
class DenseTrajectory {
 public:
  DenseTrajectory() = default;
  DenseTrajectory(double t0, const State<N>& y0) : t_begin_(t0), t_end_(t0), y_begin_(y0) {}

  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }
  std::size_t steps() const { return segments_.size(); }
  const std::vector<DenseSegment<N>>& segments() const { return segments_; }

  void append(const DenseSegment<N>& seg) {
    segments_.push_back(seg);
    t_end_ = seg.t1();
  }

  /// Shortens the trajectory so that it ends at t (t inside the last segment range).
  void truncate(double t) {
    t = std::clamp(t, t_begin_, t_end_);
    while (!segments_.empty() && segments_.back().t0 >= t && segments_.size() > 1) {
      segments_.pop_back();
    }
    t_end_ = t;
  }

  /// State at t, clamped to [t_begin, t_end].
  State<N> operator()(double t) const {
    if (segments_.empty()) return y_begin_;
    t = std::clamp(t, t_begin_, t_end_);
    return locate(t).value(t);
  }

  State<N> derivative(double t) const {
    if (segments_.empty()) return State<N>{};
    t = std::clamp(t, t_begin_, t_end_);
    return locate(t).derivative(t);
  }

 private:
  const DenseSegment<N>& locate(double t) const {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double value, const DenseSegment<N>& s) { return value < s.t0; });
    if (it != segments_.begin()) --it;
    return *it;
  }

  double t_begin_ = 0.0;
  double t_end_ = 0.0;
  State<N> y_begin_{};
  std::vector<DenseSegment<N>> segments_;
};

struct Dopri5Options {
  double atol = 1e-11;
  double rtol = 1e-11;
  double initial_step = 0.0;  ///< 0 selects a starting step automatically
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 2'000'000;
};

/// What the step observer sees after each accepted step.
template <std::size_t N>
struct StepInfo {
  const DenseSegment<N>& segment;
  const State<N>& y;     ///< state at segment.t1()
  const State<N>& dydt;  ///< right-hand side at segment.t1()
};

/**
 * Integrates y' = rhs(t, y) forward from t0 until t_limit or until the observer
 * returns false. The observer is called once per accepted step, after the
 * step has been appended to the trajectory.
 */
template <std::size_t N, class Rhs, class Observer>
DenseTrajectory<N> integrate_dopri5(Rhs&& rhs, double t0, const State<N>& y0, double t_limit,
                                    const Dopri5Options& opt, Observer&& observer) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                   a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                   d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                   d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

  DenseTrajectory<N> traj(t0, y0);
  if (!(t_limit > t0)) return traj;

  State<N> y = y0;
  State<N> k1 = rhs(t0, y);
  State<N> k2, k3, k4, k5, k6, k7, ytmp, ynew;

  auto scale = [&](double a, double b) {
    return opt.atol + opt.rtol * std::max(std::fabs(a), std::fabs(b));
  };

  double t = t0;
  double h = opt.initial_step;
  if (h <= 0.0) {
    // Hairer's starting-step heuristic.
    double d0 = 0.0, d1n = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = scale(y[i], y[i]);
      d0 += (y[i] / sk) * (y[i] / sk);
      d1n += (k1[i] / sk) * (k1[i] / sk);
    }
    d0 = std::sqrt(d0 / N);
    d1n = std::sqrt(d1n / N);
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, t_limit - t0);
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h0 * k1[i];
    const State<N> f1 = rhs(t0 + h0, ytmp);
    double d2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = scale(y[i], y[i]);
      d2 += ((f1[i] - k1[i]) / sk) * ((f1[i] - k1[i]) / sk);
    }
    d2 = std::sqrt(d2 / N) / h0;
    const double dm = std::max(d1n, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
    h = std::min(100.0 * h0, h1);
  }
  h = std::min({h, opt.max_step, t_limit - t0});

  bool last_rejected = false;
  for (std::size_t step = 0; step < opt.max_steps; ++step) {
    if (t_limit - t <= 0.0) return traj;
    if (h < 1e-14 * std::max(1.0, std::fabs(t))) {
      throw NumericalError("dopri5: step size underflow at t = " + std::to_string(t));
    }
    bool hit_limit = false;
    if (t + h >= t_limit) {
      h = t_limit - t;
      hit_limit = true;
    }

    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    k2 = rhs(t + c2 * h, ytmp);
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    k3 = rhs(t + c3 * h, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = rhs(t + c4 * h, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = rhs(t + c5 * h, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    k6 = rhs(t + h, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    const double t_new = hit_limit ? t_limit : t + h;
    k7 = rhs(t_new, ynew);

    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double ei =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sk = scale(y[i], ynew[i]);
      err += (ei / sk) * (ei / sk);
    }
    err = std::sqrt(err / N);
    if (!std::isfinite(err)) err = 1e10;

    if (err <= 1.0) {
      DenseSegment<N> seg;
      seg.t0 = t;
      seg.h = t_new - t;
      for (std::size_t i = 0; i < N; ++i) {
        const double ydiff = ynew[i] - y[i];
        const double bspl = h * k1[i] - ydiff;
        seg.rcont[0][i] = y[i];
        seg.rcont[1][i] = ydiff;
        seg.rcont[2][i] = bspl;
        seg.rcont[3][i] = ydiff - h * k7[i] - bspl;
        seg.rcont[4][i] =
            h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      traj.append(seg);
      t = t_new;
      y = ynew;
      k1 = k7;
      if (!observer(StepInfo<N>{traj.segments().back(), y, k1})) return traj;
      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 10.0);
      h = std::min(h * fac, opt.max_step);
      last_rejected = false;
    } else {
      const double fac = std::max(0.2, 0.9 * std::pow(err, -0.2));
      h *= fac;
      last_rejected = true;
    }
  }
  throw NumericalError("dopri5: maximum number of steps exceeded");
}

template <std::size_t N, class Rhs>
DenseTrajectory<N> integrate_dopri5(Rhs&& rhs, double t0, const State<N>& y0, double t_limit,
                                    const Dopri5Options& opt = {}) {
  return integrate_dopri5<N>(std::forward<Rhs>(rhs), t0, y0, t_limit, opt,
                             [](const StepInfo<N>&) { return true; });
}

}  // namespace pspectral
