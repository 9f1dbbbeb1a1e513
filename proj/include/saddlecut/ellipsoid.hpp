#pragma once

// Ellipsoid method over a convex body given by a membership + separation
// oracle. The objective oracle may return delta-subgradients; the attained
// value then degrades additively by delta.

#include "saddlecut/core.hpp"

#include <Eigen/Cholesky>

namespace saddlecut {

/// Localizer {x : (x-c)^T H^{-1} (x-c) <= 1} plus the incumbent.
struct EllipsoidState {
  Vector center;
  Matrix shape;  // H, symmetric positive definite, units of length^2
  int iteration = 0;

  Vector best_point;
  double best_value = std::numeric_limits<double>::infinity();
  bool has_best = false;

  static EllipsoidState from_ball(const BallDomain& ball) {
    EllipsoidState s;
    s.center = ball.center;
    s.shape = ball.radius * ball.radius *
              Matrix::Identity(ball.dim(), ball.dim());
    return s;
  }

  bool contains(const Vector& x, double tol = 0.0) const {
    Eigen::LLT<Matrix> llt(shape);
    if (llt.info() != Eigen::Success)
      throw StateCorruptionError("ellipsoid: shape matrix lost definiteness");
    const Vector d = x - center;
    return d.dot(llt.solve(d)) <= 1.0 + tol;
  }
};

struct SeparationOracle {
  std::function<bool(const Vector&)> contains;
  /// Called only on infeasible points; returns w != 0 with
  /// Q subset of {x : <w, x - c> <= 0}.
  std::function<Vector(const Vector&)> separate;

  static SeparationOracle for_domain(Domain d) {
    SeparationOracle o;
    auto shared = std::make_shared<Domain>(std::move(d));
    o.contains = [shared](const Vector& x) { return shared->contains(x); };
    o.separate = [shared](const Vector& x) { return shared->separate(x); };
    return o;
  }
};

/// One central cut: returns the minimum-volume ellipsoid containing
/// {x in E : <w, x - c> <= 0}. Scale-invariant in w.
inline EllipsoidState ellipsoid_step(const EllipsoidState& state,
                                     const Vector& w) {
  const int n = static_cast<int>(state.center.size());
  if (n < 2)
    throw std::invalid_argument("ellipsoid_step: dim >= 2 (use bisection)");
  if (w.size() != n)
    throw std::invalid_argument("ellipsoid_step: cut dimension mismatch");
  const Vector hw = state.shape * w;
  const double q = w.dot(hw);
  if (!(q > 0.0))
    throw StateCorruptionError("ellipsoid_step: w^T H w <= 0");
  const double nn = static_cast<double>(n);
  EllipsoidState next = state;
  next.center = state.center - hw / ((nn + 1.0) * std::sqrt(q));
  Matrix h = (nn * nn) / (nn * nn - 1.0) *
             (state.shape - (2.0 / (nn + 1.0)) * (hw * hw.transpose()) / q);
  next.shape = 0.5 * (h + h.transpose());
  next.iteration = state.iteration + 1;
  return next;
}

/// sqrt(2*gap/mu): argument bound from a function gap under mu-strong
/// convexity.
inline double strongly_convex_argument_bound(double gap, double mu) {
  if (gap < 0.0)
    throw std::invalid_argument("strongly_convex_argument_bound: gap >= 0");
  if (!(mu > 0.0))
    throw std::invalid_argument("strongly_convex_argument_bound: mu > 0");
  return std::sqrt(2.0 * gap / mu);
}

struct EllipsoidOptions {
  Deadline deadline = Deadline::none();
  /// Evaluated at every feasible center after the oracle call; returning true
  /// stops the run with the current best point.
  std::function<bool(const Vector& center, double value)> stop_when;
  /// Observation hook for property checks, called after every cut.
  std::function<void(const EllipsoidState& before, const EllipsoidState& after)>
      on_step;
  /// Stop with the incumbent instead of throwing when the shape matrix is
  /// numerically exhausted (extremely anisotropic localizers near the oracle
  /// noise floor). The report is flagged budget_exhausted.
  bool stop_on_degeneracy = false;
};

struct EllipsoidResult {
  Vector point;
  RunReport report;
};

namespace detail {

// 1D fallback: bisection over [c-R, c+R] driven by subgradient signs.
inline EllipsoidResult ellipsoid_minimize_1d(
    const FirstOrderOracle& oracle, const SeparationOracle& feasible,
    const BallDomain& ball, int iterations, double delta,
    const EllipsoidOptions& opts) {
  double lo = ball.center[0] - ball.radius;
  double hi = ball.center[0] + ball.radius;
  EllipsoidResult res;
  res.report.epsilon = delta;
  Vector best(1);
  double best_value = std::numeric_limits<double>::infinity();
  bool has_best = false;
  for (int k = 0; k < iterations; ++k) {
    if (opts.deadline.expired()) {
      res.report.timed_out = true;
      break;
    }
    Vector c(1);
    c[0] = 0.5 * (lo + hi);
    ++res.report.outer_iterations;
    double slope;
    if (feasible.contains(c)) {
      auto [val, g] = oracle.eval(c);
      if (!has_best || val < best_value) {
        best = c;
        best_value = val;
        has_best = true;
      }
      if (g[0] == 0.0) break;
      if (opts.stop_when && opts.stop_when(c, val)) {
        res.report.stopped_by_criterion = true;
        break;
      }
      slope = g[0];
    } else {
      slope = feasible.separate(c)[0];
    }
    if (slope > 0.0)
      hi = c[0];
    else
      lo = c[0];
  }
  if (!has_best)
    throw InfeasibleError("ellipsoid_minimize: no feasible center visited");
  res.point = best;
  res.report.residual = best_value;
  return res;
}

}  // namespace detail

/// Cutting-plane minimization of a convex function given by a
/// delta-subgradient oracle over a convex body inside `ball`.
///
/// After N iterations the best visited feasible center x satisfies
///   g(x) - g(x*) <= (B R / rho) exp(-N / (2 n^2)) + delta
/// whenever the body contains a ball of radius rho and |g| oscillates by at
/// most B. Returns early on a zero subgradient.
inline EllipsoidResult ellipsoid_minimize(const FirstOrderOracle& oracle,
                                          const SeparationOracle& feasible,
                                          const BallDomain& ball,
                                          int iterations, double delta,
                                          const EllipsoidOptions& opts = {}) {
  if (iterations < 1)
    throw std::invalid_argument("ellipsoid_minimize: iterations >= 1");
  if (delta < 0.0)
    throw std::invalid_argument("ellipsoid_minimize: delta >= 0");
  if (ball.dim() == 1)
    return detail::ellipsoid_minimize_1d(oracle, feasible, ball, iterations,
                                         delta, opts);

  EllipsoidState state = EllipsoidState::from_ball(ball);
  EllipsoidResult res;
  res.report.epsilon = delta;
  for (int k = 0; k < iterations; ++k) {
    if (opts.deadline.expired()) {
      res.report.timed_out = true;
      break;
    }
    Vector w;
    ++res.report.outer_iterations;
    if (feasible.contains(state.center)) {
      auto [val, g] = oracle.eval(state.center);
      if (!state.has_best || val < state.best_value) {
        state.best_point = state.center;
        state.best_value = val;
        state.has_best = true;
      }
      if (g.isZero(0.0)) break;  // zero delta-subgradient: center is optimal
      if (opts.stop_when && opts.stop_when(state.center, val)) {
        res.report.stopped_by_criterion = true;
        break;
      }
      w = std::move(g);
    } else {
      w = feasible.separate(state.center);
    }
    EllipsoidState next;
    try {
      next = ellipsoid_step(state, w);
    } catch (const StateCorruptionError&) {
      if (opts.stop_on_degeneracy && state.has_best) {
        res.report.budget_exhausted = true;
        break;
      }
      throw;
    }
    next.best_point = state.best_point;
    next.best_value = state.best_value;
    next.has_best = state.has_best;
    if (opts.on_step) opts.on_step(state, next);
    state = std::move(next);
  }
  if (!state.has_best)
    throw InfeasibleError("ellipsoid_minimize: no feasible center visited");
  res.point = state.best_point;
  res.report.residual = state.best_value;
  return res;
}

}  // namespace saddlecut
