#pragma once

// Composed saddle-point solvers:
//   solve_small_x        ellipsoid outer over x, accelerated inner over y
//   solve_small_y        model-FGM outer over x, ellipsoid inner over y
//   solve_dichotomy_outer  multidimensional dichotomy over y, accelerated
//                          inner over x
// Outer/inner accuracies are wired so every inner gap is certified by the
// inner method's own rate bound.

#include "saddlecut/accel.hpp"
#include "saddlecut/core.hpp"
#include "saddlecut/dichotomy.hpp"
#include "saddlecut/ellipsoid.hpp"

namespace saddlecut {

enum class InnerCaseY { smooth_h, prox_h, separable };
enum class InnerCaseX { smooth_r, prox_r, separable };

struct Approach1Config {
  double eps = 0.0;  // target accuracy by argument
  InnerCaseY inner_case = InnerCaseY::prox_h;
  bool warm_start = true;
  Deadline deadline = Deadline::none();
  std::function<bool(const Vector& x, const Vector& y)> stop_when;
};

struct Approach2Config {
  double eps = 0.0;  // target accuracy by argument
  std::optional<Vector> x0;  // default: center of the x domain
  Deadline deadline = Deadline::none();
  std::function<bool(const Vector& x, const Vector& y)> stop_when;
};

struct CompositeL {
  double value = 0.0;
};

/// L = L_xx + 2 L_xy^2 / mu_y, the smoothness constant of
/// max_y F(., y) inherited from the coupling.
inline CompositeL composite_L(const SaddleSpec& spec) {
  const auto& c = spec.constants;
  if (!(c.mu_y > 0.0)) throw std::invalid_argument("composite_L: mu_y > 0");
  return CompositeL{c.lxx + 2.0 * c.lxy * c.lxy / c.mu_y};
}

/// Inner tolerance rule 2 (1 + sqrt(L/mu_x)) eps_y <= eps/2 at equality.
inline double approach2_inner_tolerance(double l_composite, double mu_x,
                                        double eps) {
  if (!(mu_x > 0.0) || !(eps > 0.0))
    throw std::invalid_argument("approach2_inner_tolerance: mu_x, eps > 0");
  return eps / (4.0 * (1.0 + std::sqrt(l_composite / mu_x)));
}

/// Outer ellipsoid budget ceil(2 n^2 ln(4 B R / (mu_x rho eps^2))).
inline long approach1_outer_iterations(int n, double value_bound, double radius,
                                       double inner_radius, double mu_x,
                                       double eps) {
  const double arg =
      4.0 * value_bound * radius / (mu_x * inner_radius * eps * eps);
  return static_cast<long>(
      std::ceil(2.0 * static_cast<double>(n) * n * std::log(std::max(2.0, arg))));
}

/// A delta-accurate inner maximizer turns the x-slice subgradient into a
/// delta-subgradient of g(x) = max_y S(x, y).
inline std::pair<Vector, double> delta_subgradient_of_max(
    const SaddleSpec& spec, const Vector& x, const Vector& y_tilde,
    double inner_gap) {
  Vector w = spec.F_grad_x(x, y_tilde);
  if (spec.r_smooth) w += spec.r_grad(x);
  return {std::move(w), inner_gap};
}

struct SaddleResult {
  Vector point;
  RunReport report;
};

namespace detail {

// Inner maximizers for approach 1: given x, return y with
// g(x) - S(x, y) <= delta certified.
class InnerMaximizer {
 public:
  InnerMaximizer(const SaddleSpec& spec, InnerCaseY mode, double delta,
                 bool warm_start)
      : spec_(spec), mode_(mode), delta_(delta), warm_(warm_start) {}

  Vector solve(const Vector& x, RunReport& rep) {
    Vector y0 = start_point();
    Vector y;
    switch (mode_) {
      case InnerCaseY::prox_h:
        y = solve_prox(x, y0, rep);
        break;
      case InnerCaseY::smooth_h:
        y = solve_smooth(x, y0, rep);
        break;
      case InnerCaseY::separable:
        y = solve_separable(x, rep);
        break;
    }
    rep.max_warm_start_distance =
        std::max(rep.max_warm_start_distance, (y - y0).norm());
    if (warm_) previous_ = y;
    return y;
  }

 private:
  Vector start_point() const {
    if (warm_ && previous_) return *previous_;
    if (const auto* b = std::get_if<BoxDomain>(&spec_.y_domain.set))
      return b->center();
    if (const auto* b = std::get_if<BallDomain>(&spec_.y_domain.set))
      return b->center;
    return Vector::Zero(spec_.y_domain.dim());
  }

  // (0, L_yy)-model of -F(x, .) + h with prox-friendly h.
  Vector solve_prox(const Vector& x, const Vector& y0, RunReport& rep) {
    if (!spec_.h_prox)
      throw std::invalid_argument("solve_small_x: prox_h case needs h_prox");
    const auto& c = spec_.constants;
    ModelOracle model;
    model.lipschitz = c.lyy;
    model.strong_convexity = c.mu_y;
    model.delta = 0.0;
    model.prox_solve = [this, &x](double coef, const Vector& u, double alpha,
                                  const Vector& z) -> Vector {
      const Vector g = spec_.F_grad_y(x, z);
      // argmin <-(coef u + alpha g), y> + alpha h(y) + (coef/2)||y||^2
      return spec_.h_prox_step(Vector((-coef * u - alpha * g) / alpha),
                               coef / (2.0 * alpha));
    };
    const double radius = warm_radius();
    const int iters = fgm_iterations_for(c.lyy, c.mu_y, radius, delta_);
    long done = 0;
    const Vector y = fgm_model(model, iters, y0, nullptr, Deadline::none(), {},
                               &done);
    rep.inner_iterations += done;
    return y;
  }

  // Restarted meta-algorithm with oracle separation on u + v =
  // -F(x,.) + h, taking u as the smoother of the two.
  Vector solve_smooth(const Vector& x, const Vector& y0, RunReport& rep) {
    if (!spec_.h_smooth)
      throw std::invalid_argument("solve_small_x: smooth_h case needs h_smooth");
    const auto& c = spec_.constants;
    SmoothFn neg_f{[this, &x](const Vector& y) { return -spec_.F_value(x, y); },
                   [this, &x](const Vector& y) -> Vector {
                     return -spec_.F_grad_y(x, y);
                   }};
    SmoothFn h{[this](const Vector& y) { return spec_.h_value(y); },
               [this](const Vector& y) { return spec_.h_grad(y); }};
    const bool swap = c.lyy > c.lh;  // u must be the smoother term
    const SmoothFn& u = swap ? h : neg_f;
    const SmoothFn& v = swap ? neg_f : h;
    const double lu = swap ? c.lh : c.lyy;
    const double lv = swap ? c.lyy : c.lh;
    const double radius = warm_radius();
    const double gap0 = 0.5 * (c.lyy + c.lh) * radius * radius;
    const int restarts = restarts_for_gap(gap0, delta_);
    // Any H >= 2 L_u keeps the quartering-per-restart rate; flooring at mu_y
    // keeps the nested budget sqrt(32 H / mu) bounded when L_u = 0.
    const double H = std::max(2.0 * lu, c.mu_y);
    UmTrace trace;
    const Vector y =
        meta_sliding(u, v, H, c.mu_y, lv, restarts, y0, nullptr, &trace);
    rep.inner_iterations += trace.aux_solves;
    return y;
  }

  // m independent 1D maximizations of S_i(x, .) on box slices.
  Vector solve_separable(const Vector& x, RunReport& rep) {
    if (!spec_.separable_y_deriv)
      throw std::invalid_argument(
          "solve_small_x: separable case needs separable_y_deriv");
    const auto* box = std::get_if<BoxDomain>(&spec_.y_domain.set);
    if (!box)
      throw std::invalid_argument("solve_small_x: separable case needs a box");
    const auto& c = spec_.constants;
    const double curv =
        c.l_separable > 0.0 ? c.l_separable : std::max(c.lyy + c.lh, c.mu_y);
    if (!(curv > 0.0))
      throw std::invalid_argument(
          "solve_small_x: separable case needs a curvature bound");
    const int m = box->dim();
    const double per_coord = delta_ / m;
    // minimizer inside the final bracket gives gap <= (curv/8) width^2
    const double width = std::sqrt(8.0 * per_coord / curv);
    Vector y(m);
    for (int i = 0; i < m; ++i) {
      long evals = 0;
      auto slope = [&](double t) {
        ++spec_.counters->value;
        return -spec_.separable_y_deriv(x, i, t);
      };
      y[i] = dichotomy_1d(slope, box->lower[i], box->upper[i], width, &evals);
      rep.inner_iterations += evals;
    }
    return y;
  }

  double warm_radius() const {
    const double r = spec_.constants.ry_bound;
    if (r > 0.0) return r;
    return std::max(spec_.y_domain.enclosing_ball().radius * 2.0, 1e-6);
  }

  const SaddleSpec& spec_;
  InnerCaseY mode_;
  double delta_;
  bool warm_;
  std::optional<Vector> previous_;
};

}  // namespace detail

/// Approach 1: the outer x (low-dimensional) is handled by the ellipsoid
/// method with delta-subgradients obtained from inner maximizations solved to
/// gap mu_x eps^2/4. Returns x with ||x - x*|| <= eps.
inline SaddleResult solve_small_x(const SaddleSpec& spec,
                                  const Approach1Config& cfg) {
  if (!(cfg.eps > 0.0)) throw std::invalid_argument("solve_small_x: eps > 0");
  const auto& c = spec.constants;
  if (!(c.mu_x > 0.0) || !(c.value_bound > 0.0))
    throw std::invalid_argument("solve_small_x: mu_x and B must be positive");

  const int n = spec.x_domain.dim();
  const BallDomain ball = spec.x_domain.enclosing_ball();
  const double rho = spec.x_domain.inscribed_radius();
  const double delta = c.mu_x * cfg.eps * cfg.eps / 4.0;
  const long outer = approach1_outer_iterations(n, c.value_bound, ball.radius,
                                                rho, c.mu_x, cfg.eps);

  SaddleResult res;
  res.report.method = "approach1";
  res.report.epsilon = cfg.eps;
  res.report.certified_gap = delta;

  detail::InnerMaximizer inner(spec, cfg.inner_case, delta, cfg.warm_start);
  Vector last_y;
  FirstOrderOracle oracle(
      [&](const Vector& x) {
        last_y = inner.solve(x, res.report);
        auto wd = delta_subgradient_of_max(spec, x, last_y, delta);
        return std::make_pair(spec.S_value(x, last_y), std::move(wd.first));
      },
      delta, OracleMode::delta_subgradient);

  EllipsoidOptions eopts;
  eopts.deadline = cfg.deadline;
  eopts.stop_on_degeneracy = true;
  if (cfg.stop_when)
    eopts.stop_when = [&](const Vector& x, double) {
      return cfg.stop_when(x, last_y);
    };
  auto out = ellipsoid_minimize(oracle, SeparationOracle::for_domain(spec.x_domain),
                                ball, static_cast<int>(outer), delta, eopts);
  res.point = out.point;
  res.report.outer_iterations = out.report.outer_iterations;
  res.report.timed_out = out.report.timed_out;
  res.report.stopped_by_criterion = out.report.stopped_by_criterion;
  res.report.residual = out.report.residual;
  res.report.inner_point = inner.solve(res.point, res.report);
  res.report.counters = *spec.counters;
  return res;
}

/// Approach 2: the outer x is handled by the fast gradient method with a
/// (2 eps_y, 2L)-model; every model query maximizes F(x, .) over the
/// low-dimensional y by the ellipsoid method to gap eps_y.
inline SaddleResult solve_small_y(const SaddleSpec& spec,
                                  const Approach2Config& cfg) {
  if (!(cfg.eps > 0.0)) throw std::invalid_argument("solve_small_y: eps > 0");
  const auto& c = spec.constants;
  if (!spec.r_prox)
    throw std::invalid_argument("solve_small_y: r must be prox-friendly");
  if (!(c.mu_x > 0.0) || !(c.value_bound > 0.0))
    throw std::invalid_argument("solve_small_y: mu_x and B must be positive");

  const double l_comp = composite_L(spec).value;
  const double l_model = 2.0 * l_comp;
  // Tolerance rule at equality, and the strong-convexity conversion that
  // certifies the argument bound; use the tighter.
  const double f_target = c.mu_x * cfg.eps * cfg.eps / 4.0;
  const double eps_y =
      std::min(approach2_inner_tolerance(l_comp, c.mu_x, cfg.eps),
               f_target / (2.0 * (1.0 + std::sqrt(l_model / c.mu_x))));

  const int m = spec.y_domain.dim();
  const BallDomain y_ball = spec.y_domain.enclosing_ball();
  const double rho_y = spec.y_domain.inscribed_radius();
  const long inner_budget = static_cast<long>(std::ceil(
      2.0 * m * m *
      std::log(std::max(2.0, c.value_bound * y_ball.radius / (rho_y * eps_y)))));

  SaddleResult res;
  res.report.method = "approach2";
  res.report.epsilon = cfg.eps;
  res.report.certified_gap = eps_y;

  SeparationOracle feas = SeparationOracle::for_domain(spec.y_domain);
  Vector last_y = y_ball.center;
  auto maximize_inner = [&](const Vector& x) -> Vector {
    FirstOrderOracle neg(
        [&](const Vector& y) {
          return std::make_pair(-spec.F_value(x, y),
                                Vector(-spec.F_grad_y(x, y)));
        });
    EllipsoidOptions eopts;
    eopts.stop_on_degeneracy = true;
    auto out = ellipsoid_minimize(neg, feas, y_ball,
                                  static_cast<int>(inner_budget), 0.0, eopts);
    res.report.inner_iterations += out.report.outer_iterations;
    return out.point;
  };

  ModelOracle model;
  model.lipschitz = l_model;
  model.strong_convexity = c.mu_x;
  model.delta = 2.0 * eps_y;
  model.prox_solve = [&](double coef, const Vector& u, double alpha,
                         const Vector& z) -> Vector {
    last_y = maximize_inner(z);
    const Vector g = spec.F_grad_x(z, last_y);
    if (alpha <= 0.0) throw std::invalid_argument("solve_small_y: alpha > 0");
    return spec.r_prox_step(Vector((alpha * g - coef * u) / alpha),
                            coef / (2.0 * alpha));
  };

  const double rx = c.rx_bound > 0.0
                        ? c.rx_bound
                        : 2.0 * spec.x_domain.enclosing_ball().radius;
  const int outer = fgm_iterations_for(l_model, c.mu_x, rx, f_target);
  Vector x0 = cfg.x0 ? *cfg.x0 : spec.x_domain.enclosing_ball().center;
  long done = 0;
  std::function<bool(const Vector&)> stop;
  if (cfg.stop_when)
    stop = [&](const Vector& x) { return cfg.stop_when(x, last_y); };
  res.point = fgm_model(model, outer, x0, nullptr, cfg.deadline, stop, &done);
  res.report.outer_iterations = done;
  res.report.timed_out = cfg.deadline.expired();
  res.report.inner_point = maximize_inner(res.point);
  res.report.counters = *spec.counters;
  return res;
}

// ---------------------------------------------------------------------------
// Approach 3: dichotomy over the low-dimensional y.

struct DichotomyOuterConfig {
  DichotomyConfig dichotomy;  // constants of f(y) = h(y) - min_x {r + F}
  InnerCaseX inner_case = InnerCaseX::prox_r;
  Deadline deadline = Deadline::none();
  std::function<bool(const Vector& y, const Vector& x)> stop_when;
  double delta_floor = 1e-13;
};

namespace detail {

// Inner minimizers for the dichotomy outer loop: given y and a target
// function gap, return x with r(x) + F(x,y) - min <= gap certified.
class InnerMinimizer {
 public:
  InnerMinimizer(const SaddleSpec& spec, InnerCaseX mode) : spec_(spec), mode_(mode) {}

  Vector solve(const Vector& y, double gap, RunReport& rep) {
    switch (mode_) {
      case InnerCaseX::smooth_r:
        return solve_smooth(y, gap, rep);
      case InnerCaseX::prox_r:
        return solve_prox(y, gap, rep);
      case InnerCaseX::separable:
        return solve_separable(y, gap, rep);
    }
    throw std::logic_error("unreachable");
  }

 private:
  Vector start(const Vector& fallback) const {
    return previous_ ? *previous_ : fallback;
  }

  Vector solve_smooth(const Vector& y, double gap, RunReport& rep) {
    if (!spec_.r_smooth)
      throw std::invalid_argument("dichotomy outer: smooth_r needs r_smooth");
    const auto& c = spec_.constants;
    const double mu = c.mu_x;
    const double L = std::max(c.lr + c.lxx, mu);
    ModelOracle model;
    model.lipschitz = L;
    model.strong_convexity = mu;
    model.prox_solve = [this, &y, mu](double coef, const Vector& u, double alpha,
                                      const Vector& z) -> Vector {
      const Vector g = spec_.r_grad(z) + spec_.F_grad_x(z, y);
      // argmin (coef/2)||x-u||^2 + alpha(<g,x> + (mu/2)||x-z||^2)
      const Vector x =
          (coef * u + alpha * mu * z - alpha * g) / (coef + alpha * mu);
      return spec_.x_domain.project(x);
    };
    const double rx = radius_bound();
    const int iters = fgm_iterations_for(L, mu, rx, gap);
    long done = 0;
    Vector x0 = start(spec_.x_domain.project(Vector::Zero(spec_.x_domain.dim())));
    Vector x = fgm_model(model, iters, x0, nullptr, Deadline::none(), {}, &done);
    rep.inner_iterations += done;
    previous_ = x;
    return x;
  }

  Vector solve_prox(const Vector& y, double gap, RunReport& rep) {
    if (!spec_.r_prox)
      throw std::invalid_argument("dichotomy outer: prox_r needs r_prox");
    const auto& c = spec_.constants;
    Vector x0 = start(Vector::Zero(spec_.x_domain.dim()));
    if (c.lxx == 0.0) {
      // F affine in x: a single prox step is the exact minimizer.
      const Vector g = spec_.F_grad_x(x0, y);
      Vector x = spec_.r_prox_step(g, 0.0);
      ++rep.inner_iterations;
      previous_ = x;
      return x;
    }
    SmoothFn u{[this, &y](const Vector& x) { return spec_.F_value(x, y); },
               [this, &y](const Vector& x) { return spec_.F_grad_x(x, y); }};
    UmAuxSolver aux = [this](const Vector& g, const Vector& zm,
                             double H) -> Vector {
      return spec_.r_prox_step(Vector(g - H * zm), 0.5 * H);
    };
    const double H = 2.0 * c.lxx;
    const double rx = radius_bound();
    const double gap0 = 0.5 * (c.lxx + c.lr) * rx * rx;
    const int restarts = restarts_for_gap(std::max(gap0, gap), gap);
    UmTrace trace;
    Vector x = restarted_meta(u, aux, H, c.mu_x, restarts, x0, {}, &trace);
    rep.inner_iterations += trace.aux_solves;
    previous_ = x;
    return x;
  }

  Vector solve_separable(const Vector& y, double gap, RunReport& rep) {
    if (!spec_.separable_x_deriv)
      throw std::invalid_argument(
          "dichotomy outer: separable needs separable_x_deriv");
    const auto* box = std::get_if<BoxDomain>(&spec_.x_domain.set);
    if (!box)
      throw std::invalid_argument("dichotomy outer: separable needs a box");
    const auto& c = spec_.constants;
    const double curv =
        c.l_separable > 0.0 ? c.l_separable : std::max(c.lxx + c.lr, c.mu_x);
    const int m = box->dim();
    const double width = std::sqrt(8.0 * (gap / m) / curv);
    Vector x(m);
    for (int i = 0; i < m; ++i) {
      long evals = 0;
      auto slope = [&](double t) {
        ++spec_.counters->value;
        return spec_.separable_x_deriv(y, i, t);
      };
      x[i] = dichotomy_1d(slope, box->lower[i], box->upper[i], width, &evals);
      rep.inner_iterations += evals;
    }
    previous_ = x;
    return x;
  }

  double radius_bound() const {
    const double r = spec_.constants.rx_bound;
    if (r > 0.0) return r;
    return 2.0 * spec_.x_domain.enclosing_ball().radius;
  }

  const SaddleSpec& spec_;
  InnerCaseX mode_;
  std::optional<Vector> previous_;
};

}  // namespace detail

/// Approach 3: maximize min_x {r(x) + F(x,y)} - h(y) over the low-dimensional
/// y by the multidimensional dichotomy with inexact gradients; every gradient
/// query solves the inner x-problem to the gap the two inner-tolerance rules
/// permit for the requested gradient accuracy.
inline SaddleResult solve_dichotomy_outer(const SaddleSpec& spec,
                                          const DichotomyOuterConfig& cfg) {
  if (!spec.h_smooth)
    throw std::invalid_argument("solve_dichotomy_outer: needs smooth h");
  const auto& c = spec.constants;
  if (!(c.mu_x > 0.0))
    throw std::invalid_argument("solve_dichotomy_outer: mu_x > 0");

  DichotomyConfig dcfg = cfg.dichotomy;
  // Regularization fallback when the dual lacks strong convexity: add
  // (eps/(2 R^2)) ||y - y0||^2 and aim for eps/2.
  BoxDomain box;
  const SimplexDomain* simplex = std::get_if<SimplexDomain>(&spec.y_domain.set);
  if (const auto* b = std::get_if<BoxDomain>(&spec.y_domain.set)) {
    box = *b;
  } else if (simplex) {
    box = BoxDomain(Vector::Zero(simplex->dim()),
                    Vector::Constant(simplex->dim(), simplex->bound));
  } else {
    throw std::invalid_argument(
        "solve_dichotomy_outer: y domain must be a box or simplex");
  }
  const Vector y_anchor = box.center();
  double reg = 0.0;
  if (!(dcfg.strong_convexity > 0.0)) {
    const double r2 = box.diameter() * box.diameter();
    reg = dcfg.target_eps / r2;
    dcfg.target_eps *= 0.5;
    dcfg.strong_convexity = reg;
    dcfg.grad_lipschitz += reg;
    dcfg.value_lipschitz += reg * box.diameter();
  }
  dcfg.initial_diagonal = box.diameter();
  const double l_second =
      dcfg.l_second > 0.0 ? dcfg.l_second : dcfg.grad_lipschitz;

  SaddleResult res;
  res.report.method = "dichotomy_outer";
  res.report.epsilon = cfg.dichotomy.target_eps;

  detail::InnerMinimizer inner(spec, cfg.inner_case);
  Vector last_x = Vector::Zero(spec.x_domain.dim());
  const bool exact_inner =
      cfg.inner_case == InnerCaseX::prox_r && c.lxx == 0.0;

  InexactGradient grad;
  grad.eval = [&](const Vector& y, double request) {
    const double dt = std::max(request, cfg.delta_floor);
    const double first = c.lxy > 0.0
                             ? c.mu_x * dt * dt / (2.0 * c.lxy * c.lxy)
                             : std::numeric_limits<double>::infinity();
    const double second = 2.0 * dt * dt / l_second;
    const double gap = std::min(std::max(first, second), 1e2);
    last_x = inner.solve(y, gap, res.report);
    res.report.certified_gap = std::max(res.report.certified_gap, gap);
    Vector nu = spec.h_grad(y) - spec.F_grad_y(last_x, y);
    if (reg > 0.0) nu += reg * (y - y_anchor);
    return std::make_pair(std::move(nu), exact_inner ? 0.0 : dt);
  };

  DichotomyOptions dopts;
  dopts.deadline = cfg.deadline;
  dopts.delta_floor = cfg.delta_floor;
  if (cfg.stop_when)
    dopts.stop_when = [&](const Vector& y) { return cfg.stop_when(y, last_x); };
  if (simplex) {
    const double omega = simplex->bound;
    dopts.segment_clip = [omega](const Vector& fixed, int dim, double lo,
                                 double hi) {
      double budget = omega;
      for (int i = 0; i < fixed.size(); ++i)
        if (i != dim) budget -= fixed[i];
      const double upper = std::min(hi, budget);
      if (upper < lo) return std::make_pair(lo, lo);
      return std::make_pair(lo, upper);
    };
  }

  auto out = multidim_dichotomy(grad, box, dcfg, dopts);
  res.point = simplex ? simplex->project(out.point) : out.point;
  res.report.outer_iterations = out.report.sweeps;
  res.report.subproblem_count = out.report.subproblem_count;
  res.report.budget_exhausted = out.report.budget_exhausted;
  res.report.timed_out = out.report.timed_out;
  res.report.stopped_by_criterion = out.report.stopped_externally;
  res.report.inner_point = last_x;
  res.report.counters = *spec.counters;
  return res;
}

}  // namespace saddlecut
