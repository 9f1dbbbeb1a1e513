#pragma once

// One-dimensional dichotomy and the recursive multidimensional dichotomy on a
// box. Each hyperplane cut is justified either by the sign of the
// perpendicular gradient component (trustworthy once the subproblem is
// accurate enough) or the current point is accepted as an eps-solution of the
// level's problem. Gradients may be inexact; the solver requests the accuracy
// it needs.

#include "saddlecut/core.hpp"

namespace saddlecut {

struct DichotomyConfig {
  double value_lipschitz = 0.0;   // M_f
  double grad_lipschitz = 0.0;    // L_f
  double strong_convexity = 0.0;  // mu_f
  double target_eps = 0.0;        // accuracy by function value
  double initial_diagonal = 0.0;  // diagonal of the box the problem lives on
  double l_second = 0.0;          // constant of the second inner-gap rule; 0 -> grad_lipschitz

  void validate() const {
    if (!(value_lipschitz > 0.0) || !(grad_lipschitz > 0.0) ||
        !(strong_convexity > 0.0) || !(target_eps > 0.0) ||
        !(initial_diagonal > 0.0))
      throw std::invalid_argument("DichotomyConfig: all constants must be > 0");
  }
};

/// C_f = max(1/L, R/(M + L R)).
inline double dichotomy_adapt_constant(double value_lipschitz,
                                       double grad_lipschitz, double diagonal) {
  return std::max(1.0 / grad_lipschitz,
                  diagonal / (value_lipschitz + grad_lipschitz * diagonal));
}

enum class StopAction { Continue, CutKeepLower, CutKeepUpper, Accept };

/// Decision rule for a subproblem solution with argument accuracy delta_arg
/// and gradient accuracy delta_tilde: trust the sign of the perpendicular
/// component, accept the point as an eps-solution on the level's box, or keep
/// refining. The config carries the level's eps (target_eps) and box diagonal
/// (initial_diagonal).
inline StopAction stop_check(double nu_perp, double delta_arg,
                             double delta_tilde, const DichotomyConfig& cfg) {
  const double m = cfg.value_lipschitz;
  const double lg = cfg.grad_lipschitz;
  const double r = cfg.initial_diagonal;
  const double cf = dichotomy_adapt_constant(m, lg, r);
  const double lhs = cf * delta_tilde + delta_arg;
  const double mag = std::abs(nu_perp);
  if (mag > 0.0 && lhs <= mag / lg)
    return nu_perp > 0.0 ? StopAction::CutKeepLower : StopAction::CutKeepUpper;
  if (lhs <= (cfg.target_eps - r * mag) / (m + lg * r)) return StopAction::Accept;
  return StopAction::Continue;
}

/// Sweep count after which the surviving box is small enough for the target,
/// ceil(log2(4 R (M + 2 L R) / (L eps))).
inline long dichotomy_sweep_bound(const DichotomyConfig& cfg) {
  const double r = cfg.initial_diagonal;
  const double m = cfg.value_lipschitz;
  const double lg = cfg.grad_lipschitz;
  return static_cast<long>(std::ceil(std::log2(
      std::max(2.0, 4.0 * r * (m + 2.0 * lg * r) / (lg * cfg.target_eps)))));
}

/// Worst-case count of lower-dimensional subproblem solves,
/// ceil(2^((n^2+n)/2) log2^n(C R / eps)); 1 when C R / eps <= 1. Used as a
/// hard budget guard against unsatisfiable stopping conditions.
inline long recursion_cost_bound(int n, double diagonal, double eps,
                                 const DichotomyConfig& cfg) {
  if (n < 1) throw std::invalid_argument("recursion_cost_bound: n >= 1");
  const double c = std::max(
      {cfg.value_lipschitz,
       4.0 * (cfg.value_lipschitz + 2.0 * cfg.grad_lipschitz * diagonal) /
           cfg.grad_lipschitz,
       128.0 * cfg.grad_lipschitz * cfg.grad_lipschitz / cfg.strong_convexity});
  const double x = c * diagonal / eps;
  if (!(x > 1.0)) return 1;
  const double val = std::exp2(0.5 * (static_cast<double>(n) * n + n)) *
                     std::pow(std::log2(x), n);
  if (val >= 9e18) return std::numeric_limits<long>::max();
  return static_cast<long>(std::ceil(val));
}

/// Bisection by gradient sign on [lo, hi]; budget ceil(log2((hi-lo)/eps_arg))
/// iterations, returns the midpoint of the final bracket.
inline double dichotomy_1d(
    const std::function<double(double)>& grad, double lo, double hi,
    double eps_arg, long* evals = nullptr,
    const std::function<void(double, double)>& on_bracket = {}) {
  if (!(eps_arg > 0.0)) throw std::invalid_argument("dichotomy_1d: eps_arg > 0");
  if (hi < lo) throw std::invalid_argument("dichotomy_1d: empty interval");
  long budget = 0;
  if (hi - lo > eps_arg)
    budget = static_cast<long>(std::ceil(std::log2((hi - lo) / eps_arg)));
  for (long k = 0; k < budget; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double slope = grad(mid);
    if (evals) ++(*evals);
    if (slope == 0.0) return mid;
    if (slope > 0.0)
      hi = mid;
    else
      lo = mid;
    if (on_bracket) on_bracket(lo, hi);
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Multidimensional dichotomy.

/// Inexact gradient source. eval(x, request) returns (nu, achieved) with
/// ||nu - grad f(x)|| <= achieved; the callee makes achieved <= request when
/// it can.
struct InexactGradient {
  std::function<std::pair<Vector, double>(const Vector&, double)> eval;

  static InexactGradient exact(std::function<Vector(const Vector&)> g) {
    InexactGradient ig;
    ig.eval = [g = std::move(g)](const Vector& x, double) {
      return std::make_pair(g(x), 0.0);
    };
    return ig;
  }
};

struct DichotomyReport {
  long gradient_calls = 0;
  long subproblem_count = 0;  // 1D subproblem instantiations
  long sweeps = 0;            // top-level sweeps completed
  bool accepted = false;      // stopped through the accept branch
  bool budget_exhausted = false;
  bool stopped_externally = false;
  bool timed_out = false;
};

struct DichotomyOptions {
  Deadline deadline = Deadline::none();
  /// External stopping rule, checked at every gradient query point.
  std::function<bool(const Vector&)> stop_when;
  /// Called after every hyperplane cut with the deciding gradient component,
  /// the query point and the surviving box.
  std::function<void(int depth, int dim, bool keep_lower, double nu_perp,
                     const Vector& at, const Vector& lo, const Vector& hi)>
      on_cut;
  /// Optional restriction of 1D search segments to a convex subset of the
  /// box (e.g. a simplex). Receives a point fixing the frozen coordinates,
  /// the free dimension and its current range; returns the clipped range.
  std::function<std::pair<double, double>(const Vector&, int, double, double)>
      segment_clip;
  long max_gradient_calls = 0;  // 0 -> recursion_cost_bound default
  double delta_floor = 1e-13;   // smallest gradient accuracy ever requested
};

struct DichotomyResult {
  Vector point;
  DichotomyReport report;
};

namespace detail {

struct DichotomyRun {
  const DichotomyConfig& base;
  const InexactGradient& grad;
  const DichotomyOptions& opts;
  DichotomyReport report;
  long grad_budget = 0;
  bool aborted = false;
  std::optional<Vector> external_stop;

  std::pair<Vector, double> query(const Vector& x, double request) {
    ++report.gradient_calls;
    if (report.gradient_calls >= grad_budget) {
      aborted = true;
      report.budget_exhausted = true;
    }
    auto out = grad.eval(x, std::max(request, 0.0));
    if (opts.stop_when && !external_stop && opts.stop_when(x)) {
      external_stop = x;
      report.stopped_externally = true;
    }
    return out;
  }

  bool halted() {
    if (opts.deadline.expired()) {
      report.timed_out = true;
      return true;
    }
    return aborted || external_stop.has_value();
  }
};

class LevelSolver {
 public:
  LevelSolver(DichotomyRun& run, Vector lo, Vector hi, double eps, int depth)
      : run_(run), lo_(std::move(lo)), hi_(std::move(hi)), eps_(eps),
        depth_(depth) {
    for (int i = 0; i < lo_.size(); ++i)
      if (hi_[i] > lo_[i]) free_.push_back(i);
    if (free_.size() == 1) ++run_.report.subproblem_count;
    if (diagonal() > 0.0 && eps_ > 0.0) sweep_budget_ = dichotomy_sweep_bound(level_config());
  }

  int free_count() const { return static_cast<int>(free_.size()); }
  Vector center() const { return 0.5 * (lo_ + hi_); }
  double diagonal() const { return (hi_ - lo_).norm(); }
  double half_diagonal() const { return 0.5 * diagonal(); }
  bool can_sweep() const {
    return sweeps_done_ < sweep_budget_ && diagonal() > 1e-280;
  }
  long sweeps_done() const { return sweeps_done_; }
  const Vector& lower() const { return lo_; }
  const Vector& upper() const { return hi_; }

  bool has_accepted() const { return accepted_.has_value(); }
  const Vector& accepted_point() const { return *accepted_; }
  double accepted_delta() const { return accepted_delta_; }

  DichotomyConfig level_config() const {
    DichotomyConfig cfg = run_.base;
    cfg.target_eps = eps_;
    cfg.initial_diagonal = std::max(diagonal(), 1e-300);
    return cfg;
  }

  /// One pass over all free coordinates, cutting each once. Sets the accepted
  /// point when this level's stop rule fires.
  void sweep() {
    for (int i : free_) {
      if (run_.halted() || accepted_) return;
      cut_coordinate(i);
    }
    ++sweeps_done_;
  }

 private:
  void cut_coordinate(int dim) {
    const double c = 0.5 * (lo_[dim] + hi_[dim]);
    Vector child_lo = lo_, child_hi = hi_;
    child_lo[dim] = child_hi[dim] = c;

    // Clip a 1D child segment to the feasible subset, when configured.
    if (free_count() == 2 && run_.opts.segment_clip) {
      int j = free_[0] == dim ? free_[1] : free_[0];
      auto [a, b] = run_.opts.segment_clip(child_lo, j, child_lo[j], child_hi[j]);
      if (b < a) b = a;
      child_lo[j] = a;
      child_hi[j] = b;
    }

    const DichotomyConfig cfg = level_config();
    const double lg = cfg.grad_lipschitz;
    const double cf = dichotomy_adapt_constant(cfg.value_lipschitz, lg,
                                               cfg.initial_diagonal);
    // Tolerance of the child's own accept rule, tightened by the current
    // box diagonal.
    double child_eps =
        run_.base.strong_convexity * eps_ * eps_ /
        (128.0 * lg * lg * cfg.initial_diagonal * cfg.initial_diagonal);
    child_eps = std::max(child_eps, 1e-300);

    auto child = std::make_unique<LevelSolver>(run_, child_lo, child_hi,
                                               child_eps, depth_ + 1);
    const double floor = run_.opts.delta_floor;
    double request_cap = cfg.initial_diagonal / cf;  // coarse first query
    double last_nu = 0.0;
    for (int round = 0; round < 256; ++round) {
      if (run_.halted()) return;
      Vector x;
      double delta_arg;
      bool refinable;
      if (child->has_accepted()) {
        x = child->accepted_point();
        delta_arg = child->accepted_delta();
        refinable = false;
      } else if (child->free_count() == 0) {
        x = child->center();
        delta_arg = 0.0;
        refinable = false;
      } else {
        x = child->center();
        delta_arg = child->half_diagonal();
        refinable = child->can_sweep();
      }
      const double request = std::max(
          floor, std::min(delta_arg > 0.0 ? delta_arg / cf : request_cap,
                          request_cap));
      auto [nu, achieved] = run_.query(x, request);
      if (run_.external_stop) return;
      const double perp = nu[dim];
      last_nu = perp;
      switch (stop_check(perp, delta_arg, achieved, cfg)) {
        case StopAction::CutKeepLower:
          apply_cut(dim, c, true, perp, x);
          return;
        case StopAction::CutKeepUpper:
          apply_cut(dim, c, false, perp, x);
          return;
        case StopAction::Accept:
          accepted_ = x;
          accepted_delta_ = std::min(
              std::sqrt(2.0 * eps_ / run_.base.strong_convexity),
              delta_arg > 0.0 ? delta_arg : half_diagonal());
          return;
        case StopAction::Continue:
          break;
      }
      // The rule failed with lhs = cf*achieved + delta_arg > need; shrink
      // whichever side dominates.
      const double mag = std::abs(perp);
      const double need = std::max(
          mag / lg, (eps_ - cfg.initial_diagonal * mag) /
                        (cfg.value_lipschitz + lg * cfg.initial_diagonal));
      if (achieved > request && cf * achieved > need) {
        // The oracle cannot honor tighter requests and its noise alone
        // already blocks both branches: cut by the sign at hand.
        run_.report.budget_exhausted = true;
        apply_cut(dim, c, perp >= 0.0, perp, x);
        return;
      }
      const bool child_dominates = delta_arg >= cf * achieved;
      if (child_dominates && child->free_count() > 0) {
        if (refinable) {
          child->sweep();
          continue;
        }
        // Exhausted or self-accepted child: restart it on its current box
        // with a tighter target.
        const Vector nlo = child->lower();
        const Vector nhi = child->upper();
        const double neps = std::max(child->eps() / 16.0, 1e-300);
        child =
            std::make_unique<LevelSolver>(run_, nlo, nhi, neps, depth_ + 1);
        continue;
      }
      if (request_cap > floor) {
        request_cap = std::max(
            floor, std::min(0.25 * request_cap, 0.5 * (need / cf)));
        continue;
      }
      // Nothing left to tighten: cut by the sign at hand; a tie keeps the
      // lower half.
      run_.report.budget_exhausted = true;
      apply_cut(dim, c, last_nu >= 0.0, last_nu, child->center());
      return;
    }
    run_.report.budget_exhausted = true;
    apply_cut(dim, c, last_nu >= 0.0, last_nu, child->center());
  }

 public:
  double eps() const { return eps_; }

 private:

  void apply_cut(int dim, double c, bool keep_lower, double nu_perp,
                 const Vector& at) {
    if (keep_lower)
      hi_[dim] = c;
    else
      lo_[dim] = c;
    if (run_.opts.on_cut)
      run_.opts.on_cut(depth_, dim, keep_lower, nu_perp, at, lo_, hi_);
  }

  DichotomyRun& run_;
  Vector lo_, hi_;
  double eps_;
  int depth_;
  std::vector<int> free_;
  long sweep_budget_ = 0;
  long sweeps_done_ = 0;
  std::optional<Vector> accepted_;
  double accepted_delta_ = 0.0;
};

}  // namespace detail

/// Minimize a convex function with Lipschitz gradient over a box, using only
/// (possibly inexact) gradients. Returns a point whose function gap is at
/// most cfg.target_eps whenever the stopping rules were satisfiable at every
/// visited subproblem; otherwise the report is flagged.
inline DichotomyResult multidim_dichotomy(const InexactGradient& grad,
                                          const BoxDomain& box,
                                          const DichotomyConfig& cfg,
                                          const DichotomyOptions& opts = {}) {
  cfg.validate();
  const int n = box.dim();
  if (n < 1 || n > 5)
    throw std::invalid_argument("multidim_dichotomy: 1 <= dim <= 5");

  detail::DichotomyRun run{cfg, grad, opts, {}, 0, false, {}};
  if (opts.max_gradient_calls > 0) {
    run.grad_budget = opts.max_gradient_calls;
  } else {
    const long bound =
        recursion_cost_bound(n, box.diameter(), cfg.target_eps, cfg);
    run.grad_budget = bound > std::numeric_limits<long>::max() / 64
                          ? std::numeric_limits<long>::max()
                          : std::max<long>(bound * 64, 4096);
  }

  detail::LevelSolver top(run, box.lower, box.upper, cfg.target_eps, 0);
  DichotomyResult res;
  const double eps_over_m = cfg.target_eps / cfg.value_lipschitz;
  while (true) {
    if (top.has_accepted()) {
      res.point = top.accepted_point();
      run.report.accepted = true;
      break;
    }
    if (run.halted()) {
      res.point = run.external_stop ? *run.external_stop : top.center();
      break;
    }
    if (top.diagonal() <= eps_over_m) {
      res.point = top.center();
      break;
    }
    if (!top.can_sweep()) {
      res.point = top.center();
      run.report.budget_exhausted = true;
      break;
    }
    top.sweep();
  }
  run.report.sweeps = top.sweeps_done();
  res.report = run.report;
  return res;
}

}  // namespace saddlecut
