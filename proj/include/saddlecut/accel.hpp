#pragma once

// Accelerated solvers for the large-dimension subproblems: the accelerated
// meta-algorithm, its restarted variant with oracle-complexity separation,
// and the fast gradient method driven by an inexact model.

#include "saddlecut/core.hpp"

namespace saddlecut {

// ---------------------------------------------------------------------------
// Accelerated meta-algorithm for min { U(y) = u(y) + v(y) }.

/// Progress record of one accelerated-meta run.
struct UmState {
  double coupling = 0.0;  // A_k
  Vector y, z, z_mid;
  int iteration = 0;
};

/// Solver of the regularized linearization step
///   argmin_y { u(zm) + <grad_u(zm), y - zm> + v(y) + (H/2)||y - zm||^2 }.
/// Implementations must satisfy the first-order optimality condition of that
/// subproblem to 1e-10.
using UmAuxSolver =
    std::function<Vector(const Vector& grad_u_zm, const Vector& zm, double H)>;

struct UmTrace {
  std::vector<double> coupling_values;  // A_1, A_2, ...
  long aux_solves = 0;
};

/// Accelerated meta-algorithm. Requires H >= 2 L_u for the theorem's rate.
/// When v is nonsmooth, its (sub)gradient at y_{k+1} is recovered from the
/// optimality condition of the aux subproblem: -grad_u(zm) - H (y - zm).
inline Vector accelerated_meta(
    const SmoothFn& u, const UmAuxSolver& v_aux, double H, int iterations,
    Vector z0, const std::function<Vector(const Vector&)>& grad_v = {},
    UmTrace* trace = nullptr) {
  if (!(H > 0.0)) throw std::invalid_argument("accelerated_meta: H > 0");
  if (iterations < 1)
    throw std::invalid_argument("accelerated_meta: iterations >= 1");
  const double lambda = 1.0 / (2.0 * H);
  double coupling = 0.0;  // A_0
  Vector y = z0;
  Vector z = std::move(z0);
  for (int k = 0; k < iterations; ++k) {
    const double step =
        0.5 * (lambda + std::sqrt(lambda * lambda + 4.0 * lambda * coupling));
    const double coupling_next = coupling + step;
    const Vector zm = (coupling * y + step * z) / coupling_next;
    const Vector gu_zm = u.grad(zm);
    const Vector y_next = v_aux(gu_zm, zm, H);
    Vector gv;
    if (grad_v) {
      gv = grad_v(y_next);
    } else {
      gv = -gu_zm - H * (y_next - zm);
    }
    z -= step * (u.grad(y_next) + gv);
    y = y_next;
    coupling = coupling_next;
    if (trace) {
      trace->coupling_values.push_back(coupling);
      ++trace->aux_solves;
    }
  }
  return y;
}

/// Inner iteration count per restart, fixed by the restart analysis.
inline int restart_inner_iterations(double H, double mu) {
  if (!(H > 0.0) || !(mu > 0.0))
    throw std::invalid_argument("restart_inner_iterations: H, mu > 0");
  return static_cast<int>(std::ceil(std::sqrt(32.0 * H / mu)));
}

/// Restarted accelerated meta-algorithm for mu-strongly convex U = u + v.
/// Each restart runs ceil(sqrt(32 H / mu)) inner iterations and at least
/// quarters the gap.
inline Vector restarted_meta(const SmoothFn& u, const UmAuxSolver& v_aux,
                             double H, double mu, int restarts, Vector z,
                             const std::function<Vector(const Vector&)>&
                                 grad_v = {},
                             UmTrace* trace = nullptr) {
  if (restarts < 1)
    throw std::invalid_argument("restarted_meta: restarts >= 1");
  const int inner = restart_inner_iterations(H, mu);
  for (int k = 0; k < restarts; ++k)
    z = accelerated_meta(u, v_aux, H, inner, std::move(z), grad_v, trace);
  return z;
}

/// Restart count sufficient to certify gap <= target when the initial gap is
/// bounded by gap0 (quartering per restart).
inline int restarts_for_gap(double gap0, double target) {
  if (!(target > 0.0)) throw std::invalid_argument("restarts_for_gap: target > 0");
  if (gap0 <= target) return 1;
  return static_cast<int>(
      std::max(1.0, std::ceil(std::log(gap0 / target) / std::log(4.0))));
}

// ---------------------------------------------------------------------------
// Oracle-complexity separation: the aux subproblem is itself solved by a
// nested restarted meta-algorithm on (v, linearized-u + ridge) with
// mu_new = H/2 and H_new = 2 L_v. Applies when v is smooth with L_u <= L_v.

struct SlidingCounters {
  long grad_u_calls = 0;
  long grad_v_calls = 0;
};

inline Vector meta_sliding(const SmoothFn& u, const SmoothFn& v, double H,
                           double mu, double lipschitz_v, int restarts,
                           Vector z0, SlidingCounters* calls = nullptr,
                           UmTrace* trace = nullptr) {
  SmoothFn u_counted{u.value, [&u, calls](const Vector& x) {
                       if (calls) ++calls->grad_u_calls;
                       return u.grad(x);
                     }};
  SmoothFn v_counted{v.value, [&v, calls](const Vector& x) {
                       if (calls) ++calls->grad_v_calls;
                       return v.grad(x);
                     }};

  const double h_inner = 2.0 * std::max(lipschitz_v, 1e-12);
  const double mu_inner = H / 2.0;

  // Solves min_y { <g, y - zm> + v(y) + (H/2)||y - zm||^2 } by nested
  // restarts; the nested aux subproblem is an explicit quadratic.
  UmAuxSolver aux = [&, h_inner, mu_inner, H](const Vector& g, const Vector& zm,
                                              double) -> Vector {
    SmoothFn quad{[g, zm, H](const Vector& y) {
                    return g.dot(y - zm) + 0.5 * H * (y - zm).squaredNorm();
                  },
                  [g, zm, H](const Vector& y) -> Vector {
                    return g + H * (y - zm);
                  }};
    UmAuxSolver nested_aux = [&v_counted, &g, &zm, H, h_inner](
                                 const Vector& gv, const Vector& zm2,
                                 double) -> Vector {
      // argmin <gv, y - zm2> + <g, y - zm> + (H/2)||y-zm||^2
      //        + (h_inner/2)||y - zm2||^2
      return (H * zm + h_inner * zm2 - gv - g) / (H + h_inner);
    };
    Vector y = zm;
    const double res0 = (v_counted.grad(y) + quad.grad(y)).norm();
    const double tol = std::max(1e-11 * (1.0 + res0), 1e-13);
    for (int pass = 0; pass < 60; ++pass) {
      const double res = (v_counted.grad(y) + quad.grad(y)).norm();
      if (res <= tol) break;
      y = restarted_meta(v_counted, nested_aux, h_inner, mu_inner, 1,
                         std::move(y), quad.grad);
    }
    return y;
  };

  return restarted_meta(u_counted, aux, H, mu, restarts, std::move(z0),
                        v_counted.grad, trace);
}

// ---------------------------------------------------------------------------
// Fast gradient method for a (delta, L)-model.

/// Inexact model of f at z: f_delta(z) plus a convex term psi(., z) with
///   0 <= f(y) - f_delta(z) - psi(y, z) <= (L/2)||y - z||^2 + delta.
struct ModelOracle {
  /// Inexact value f_delta(z). Optional for the solver itself.
  std::function<double(const Vector&)> value;
  /// Model term psi(y, z); used by invariant checks only.
  std::function<double(const Vector& y, const Vector& z)> psi;
  /// argmin_y { (coef/2)||y - u||^2 + alpha * psi(y, z) } over the domain.
  std::function<Vector(double coef, const Vector& u, double alpha,
                       const Vector& z)>
      prox_solve;
  double delta = 0.0;
  double lipschitz = 0.0;        // L
  double strong_convexity = 0.0; // mu of psi(., z)
};

/// Largest root of L a^2 - (1 + A mu) a - A (1 + A mu) = 0. Both terms of the
/// numerator are positive, so this branch does not cancel; the other root
/// would.
inline double fgm_step_root(double coupling, double mu, double lipschitz) {
  const double b = 1.0 + coupling * mu;
  const double disc = b * b + 4.0 * lipschitz * coupling * b;
  if (!(disc >= 0.0) || !(lipschitz > 0.0))
    throw std::invalid_argument("fgm_step_root: no positive real root");
  return (b + std::sqrt(disc)) / (2.0 * lipschitz);
}

struct FgmTrace {
  std::vector<Vector> iterates;
  std::vector<double> coupling_values;  // A_k
  std::vector<double> step_values;      // alpha_k
};

/// Fast gradient method with an inexact model. Returns y^N with
///   f(y^N) - f* <= L R^2 exp(-(N-1)/2 sqrt(mu/L)) + (1 + sqrt(L/mu)) delta.
inline Vector fgm_model(const ModelOracle& oracle, int iterations, Vector y0,
                        FgmTrace* trace = nullptr,
                        const Deadline& deadline = Deadline::none(),
                        const std::function<bool(const Vector&)>& stop_when = {},
                        long* iterations_done = nullptr) {
  if (iterations < 1) throw std::invalid_argument("fgm_model: iterations >= 1");
  const double mu = oracle.strong_convexity;
  const double L = oracle.lipschitz;
  if (!(mu > 0.0)) throw std::invalid_argument("fgm_model: mu > 0");
  if (L < 0.0) throw std::invalid_argument("fgm_model: L >= 0");

  Vector y = y0;
  Vector u = y0;
  double coupling = 0.0;  // A_0

  if (L == 0.0) {
    // Exact model: minimizing psi(., y0) minimizes f outright.
    y = oracle.prox_solve(0.0, u, 1.0, y0);
    if (iterations_done) *iterations_done = 1;
    return y;
  }

  for (int k = 0; k < iterations; ++k) {
    if (deadline.expired()) break;
    const double step = fgm_step_root(coupling, mu, L);
    const double coupling_next = coupling + step;
    const Vector z = (step * u + coupling * y) / coupling_next;
    const double coef = 1.0 + coupling * mu;
    u = oracle.prox_solve(coef, u, step, z);
    y = (step * u + coupling * y) / coupling_next;
    coupling = coupling_next;
    if (trace) {
      trace->iterates.push_back(y);
      trace->coupling_values.push_back(coupling);
      trace->step_values.push_back(step);
    }
    if (iterations_done) *iterations_done = k + 1;
    if (stop_when && stop_when(y)) break;
  }
  return y;
}

/// Iteration budget making the exponential term of the rate at most
/// target_gap, given ||y0 - y*|| <= radius.
inline int fgm_iterations_for(double lipschitz, double mu, double radius,
                              double target_gap) {
  if (!(mu > 0.0) || !(target_gap > 0.0))
    throw std::invalid_argument("fgm_iterations_for: mu, target > 0");
  if (lipschitz <= 0.0) return 1;
  const double lead = lipschitz * radius * radius;
  if (lead <= target_gap) return 1;
  const double n =
      1.0 + std::ceil(2.0 * std::sqrt(lipschitz / mu) * std::log(lead / target_gap));
  return n >= static_cast<double>(1 << 30) ? (1 << 30) : static_cast<int>(n);
}

}  // namespace saddlecut
