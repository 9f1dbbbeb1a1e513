#pragma once

// Shared domain records, oracle abstractions and small numerical utilities
// used by every solver in the library.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace saddlecut {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline bool all_finite(const Vector& v) { return v.allFinite(); }

struct StateCorruptionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Random numbers.
//
// Streams are fully determined by the seed: mt19937_64 (a standardized
// generator) plus explicit bit-to-real mappings, so instances reproduce
// bitwise across platforms. The standard <random> distributions are avoided
// on purpose; their output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform draw from [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * M_PI * u2;
    spare_ = mag * std::sin(ang);
    has_spare_ = true;
    return mag * std::cos(ang);
  }

  Vector uniform_vector(int dim, double a, double b) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = uniform(a, b);
    return v;
  }

  Vector normal_vector(int dim) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = normal();
    return v;
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Oracle call accounting. One instance per run; a run is single-threaded.

struct CallCounters {
  std::uint64_t grad_x = 0;  // gradients of the coupling term in x
  std::uint64_t grad_y = 0;  // gradients of the coupling term in y
  std::uint64_t grad_r = 0;
  std::uint64_t grad_h = 0;
  std::uint64_t prox = 0;
  std::uint64_t value = 0;  // value-only evaluations

  std::uint64_t total() const {
    return grad_x + grad_y + grad_r + grad_h + prox + value;
  }
  bool operator==(const CallCounters&) const = default;
};

// ---------------------------------------------------------------------------
// Domains.

struct BoxDomain {
  Vector lower;
  Vector upper;

  BoxDomain() = default;
  BoxDomain(Vector lo, Vector up) : lower(std::move(lo)), upper(std::move(up)) {
    if (lower.size() != upper.size() || lower.size() < 1)
      throw std::invalid_argument("BoxDomain: bound dimensions must match");
    for (int i = 0; i < lower.size(); ++i)
      if (!(lower[i] <= upper[i]))
        throw std::invalid_argument("BoxDomain: lower[i] <= upper[i] required");
    if (!all_finite(lower) || !all_finite(upper))
      throw std::invalid_argument("BoxDomain: bounds must be finite");
  }

  int dim() const { return static_cast<int>(lower.size()); }

  bool contains(const Vector& x, double tol = 0.0) const {
    for (int i = 0; i < dim(); ++i)
      if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
    return true;
  }

  Vector project(const Vector& x) const {
    return x.cwiseMax(lower).cwiseMin(upper);
  }

  Vector center() const { return 0.5 * (lower + upper); }

  /// Euclidean diameter ||upper - lower||_2.
  double diameter() const { return (upper - lower).norm(); }

  double min_side() const { return (upper - lower).minCoeff(); }

  /// Radius of the largest inscribed Euclidean ball.
  double inscribed_radius() const { return 0.5 * min_side(); }

  /// Outward normal of a violated facet; valid separating vector for any
  /// point outside the box.
  Vector separate(const Vector& x) const {
    int worst = -1;
    double gap = 0.0, sign = 0.0;
    for (int i = 0; i < dim(); ++i) {
      if (x[i] > upper[i] && x[i] - upper[i] > gap) {
        worst = i;
        gap = x[i] - upper[i];
        sign = 1.0;
      }
      if (x[i] < lower[i] && lower[i] - x[i] > gap) {
        worst = i;
        gap = lower[i] - x[i];
        sign = -1.0;
      }
    }
    if (worst < 0) throw std::invalid_argument("separate: point is inside");
    Vector w = Vector::Zero(dim());
    w[worst] = sign;
    return w;
  }
};

/// Componentwise clamp; the Euclidean projection onto a box.
inline Vector project_box(const Vector& x, const BoxDomain& q) {
  if (x.size() != q.dim())
    throw std::invalid_argument("project_box: dimension mismatch");
  return q.project(x);
}

struct BallDomain {
  Vector center;
  double radius = 0.0;

  BallDomain() = default;
  BallDomain(Vector c, double r) : center(std::move(c)), radius(r) {
    if (!(radius > 0.0)) throw std::invalid_argument("BallDomain: radius > 0");
  }

  int dim() const { return static_cast<int>(center.size()); }

  bool contains(const Vector& x, double tol = 0.0) const {
    return (x - center).norm() <= radius + tol;
  }

  Vector project(const Vector& x) const {
    const Vector d = x - center;
    const double n = d.norm();
    if (n <= radius) return x;
    return center + d * (radius / n);
  }

  Vector separate(const Vector& x) const { return x - center; }
};

/// {y >= 0, sum(y) <= bound}: a right simplex with legs of length `bound`.
struct SimplexDomain {
  int dim_ = 0;
  double bound = 0.0;

  SimplexDomain() = default;
  SimplexDomain(int dim, double omega) : dim_(dim), bound(omega) {
    if (dim < 1 || !(omega > 0.0))
      throw std::invalid_argument("SimplexDomain: dim >= 1 and bound > 0");
  }

  int dim() const { return dim_; }

  bool contains(const Vector& x, double tol = 0.0) const {
    if (x.minCoeff() < -tol) return false;
    return x.sum() <= bound + tol;
  }

  /// Euclidean projection onto {y >= 0, sum(y) <= bound}.
  Vector project(const Vector& x) const {
    Vector p = x.cwiseMax(0.0);
    if (p.sum() <= bound) return p;
    // Project onto the face {y >= 0, sum(y) = bound} by the sort method.
    std::vector<double> u(x.data(), x.data() + x.size());
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      cum += u[k];
      const double t = (cum - bound) / static_cast<double>(k + 1);
      if (k + 1 == u.size() || u[k + 1] <= t) {
        theta = t;
        break;
      }
    }
    return (x.array() - theta).max(0.0).matrix();
  }

  Vector separate(const Vector& x) const {
    for (int i = 0; i < dim_; ++i) {
      if (x[i] < 0.0) {
        Vector w = Vector::Zero(dim_);
        w[i] = -1.0;
        return w;
      }
    }
    if (x.sum() > bound) return Vector::Ones(dim_);
    throw std::invalid_argument("separate: point is inside");
  }

  /// Radius of the largest ball inscribed in the simplex (2D: the incircle).
  double inscribed_radius() const {
    // Distance from the incenter to the facets of {y>=0, sum<=bound}.
    return bound / (static_cast<double>(dim_) + std::sqrt(static_cast<double>(dim_)));
  }
};

struct Domain {
  std::variant<BoxDomain, BallDomain, SimplexDomain> set;

  Domain() : set(BallDomain(Vector::Zero(1), 1.0)) {}
  Domain(BoxDomain b) : set(std::move(b)) {}
  Domain(BallDomain b) : set(std::move(b)) {}
  Domain(SimplexDomain s) : set(std::move(s)) {}

  int dim() const {
    return std::visit([](const auto& s) { return s.dim(); }, set);
  }
  bool contains(const Vector& x, double tol = 0.0) const {
    return std::visit([&](const auto& s) { return s.contains(x, tol); }, set);
  }
  Vector project(const Vector& x) const {
    return std::visit([&](const auto& s) { return s.project(x); }, set);
  }
  Vector separate(const Vector& x) const {
    return std::visit([&](const auto& s) { return s.separate(x); }, set);
  }

  /// A Euclidean ball containing the set.
  BallDomain enclosing_ball() const {
    if (const auto* b = std::get_if<BallDomain>(&set)) return *b;
    if (const auto* b = std::get_if<BoxDomain>(&set))
      return BallDomain(b->center(), 0.5 * b->diameter());
    const auto& s = std::get<SimplexDomain>(set);
    Vector c = Vector::Constant(s.dim(), s.bound / (s.dim() + 1.0));
    double r = 0.0;
    // Farthest vertices are the origin and bound*e_i.
    r = std::max(r, c.norm());
    Vector v = Vector::Zero(s.dim());
    v[0] = s.bound;
    r = std::max(r, (v - c).norm());
    return BallDomain(c, r);
  }

  /// Radius of a ball contained in the set.
  double inscribed_radius() const {
    if (const auto* b = std::get_if<BallDomain>(&set)) return b->radius;
    if (const auto* b = std::get_if<BoxDomain>(&set)) return b->inscribed_radius();
    return std::get<SimplexDomain>(set).inscribed_radius();
  }
};

// ---------------------------------------------------------------------------
// Oracles.

enum class OracleMode { exact, delta_subgradient, inexact_gradient };

/// Evaluates f(x) together with a gradient-like vector. In exact mode the
/// vector is the gradient/subgradient; in delta_subgradient mode it is a
/// delta-subgradient; in inexact_gradient mode it satisfies
/// ||grad - nabla f(x)|| <= inexactness.
struct FirstOrderOracle {
  std::function<std::pair<double, Vector>(const Vector&)> eval;
  double inexactness = 0.0;
  OracleMode mode = OracleMode::exact;

  FirstOrderOracle() = default;
  FirstOrderOracle(std::function<std::pair<double, Vector>(const Vector&)> f,
                   double delta = 0.0, OracleMode m = OracleMode::exact)
      : eval(std::move(f)), inexactness(delta), mode(m) {
    if (inexactness < 0.0)
      throw std::invalid_argument("FirstOrderOracle: inexactness >= 0");
    if (mode == OracleMode::exact && inexactness != 0.0)
      throw std::invalid_argument("FirstOrderOracle: exact mode needs delta = 0");
  }
};

/// {value, gradient} pair for a smooth term.
struct SmoothFn {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> grad;
};

/// Function r for which min { <c1,x> + r(x) + c2*||x||^2 } over its domain is
/// solvable in closed form. prox_step returns that minimizer.
struct ProxFriendlyFn {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector& c1, double c2)> prox_step;
};

/// r(x) = (mu/2)||x||^2 on all of space: prox_step = -c1/(mu + 2 c2).
inline ProxFriendlyFn make_quadratic_prox(double mu) {
  if (mu < 0.0) throw std::invalid_argument("make_quadratic_prox: mu >= 0");
  ProxFriendlyFn r;
  r.value = [mu](const Vector& x) { return 0.5 * mu * x.squaredNorm(); };
  r.prox_step = [mu](const Vector& c1, double c2) -> Vector {
    return -c1 / (mu + 2.0 * c2);
  };
  return r;
}

/// Same quadratic restricted to a ball. The objective is isotropic, so the
/// constrained minimizer is the projection of the unconstrained one.
inline ProxFriendlyFn make_quadratic_prox(double mu, BallDomain ball) {
  ProxFriendlyFn r;
  r.value = [mu](const Vector& x) { return 0.5 * mu * x.squaredNorm(); };
  r.prox_step = [mu, ball = std::move(ball)](const Vector& c1, double c2) {
    return ball.project(Vector(-c1 / (mu + 2.0 * c2)));
  };
  return r;
}

/// h(y) = <c, y> over a box.
inline ProxFriendlyFn make_linear_prox(Vector c, BoxDomain box) {
  ProxFriendlyFn h;
  h.value = [c](const Vector& y) { return c.dot(y); };
  h.prox_step = [c = std::move(c), box = std::move(box)](const Vector& c1,
                                                         double c2) {
    return box.project(Vector(-(c1 + c) / (2.0 * c2)));
  };
  return h;
}

// ---------------------------------------------------------------------------
// Saddle problem description: min_x max_y { r(x) + F(x,y) - h(y) }.

struct SaddleConstants {
  double mu_x = 0.0;           // strong convexity of the x-part
  double mu_y = 0.0;           // strong concavity of the y-part
  double lxx = 0.0;            // Lipschitz constant of grad_x F in x
  double lxy = 0.0;            // cross Lipschitz constant
  double lyy = 0.0;            // Lipschitz constant of grad_y F in y
  double lh = 0.0;             // Lipschitz constant of grad h
  double lr = 0.0;             // Lipschitz constant of grad r
  double value_bound = 0.0;    // B: oscillation bound of the reduced objective
  double value_lipschitz = 0;  // M_f of the reduced objective
  double grad_lipschitz = 0;   // L_f of the reduced objective
  double strong_convexity = 0; // mu_f of the reduced objective
  double ry_bound = 0.0;       // bound on warm-start distance in y
  double rx_bound = 0.0;       // bound on ||x0 - x*||
  double l_separable = 0.0;    // curvature bound of 1D slices (separable case)
};

struct SaddleSpec {
  std::function<double(const Vector&, const Vector&)> coupling_value;  // F
  std::function<Vector(const Vector&, const Vector&)> coupling_grad_x;
  std::function<Vector(const Vector&, const Vector&)> coupling_grad_y;

  std::optional<ProxFriendlyFn> r_prox, h_prox;
  std::optional<SmoothFn> r_smooth, h_smooth;

  // Separable access, set only when the corresponding case-3 solver applies:
  // S(x, y) = sum_i S_i(x, y_i) -> (x, i, y_i), and
  // r(x) + F(x, y) = sum_i T_i(x_i, y) -> (y, i, x_i).
  std::function<double(const Vector&, int, double)> separable_y_value;
  std::function<double(const Vector&, int, double)> separable_y_deriv;
  std::function<double(const Vector&, int, double)> separable_x_value;
  std::function<double(const Vector&, int, double)> separable_x_deriv;

  Domain x_domain, y_domain;
  SaddleConstants constants;
  std::shared_ptr<CallCounters> counters = std::make_shared<CallCounters>();

  double F_value(const Vector& x, const Vector& y) const {
    ++counters->value;
    return coupling_value(x, y);
  }
  Vector F_grad_x(const Vector& x, const Vector& y) const {
    ++counters->grad_x;
    return coupling_grad_x(x, y);
  }
  Vector F_grad_y(const Vector& x, const Vector& y) const {
    ++counters->grad_y;
    return coupling_grad_y(x, y);
  }
  double r_value(const Vector& x) const {
    if (!r_prox && !r_smooth) return 0.0;
    ++counters->value;
    return r_prox ? r_prox->value(x) : r_smooth->value(x);
  }
  double h_value(const Vector& y) const {
    if (!h_prox && !h_smooth) return 0.0;
    ++counters->value;
    return h_prox ? h_prox->value(y) : h_smooth->value(y);
  }
  Vector r_grad(const Vector& x) const {
    if (!r_smooth) return Vector::Zero(x.size());
    ++counters->grad_r;
    return r_smooth->grad(x);
  }
  Vector h_grad(const Vector& y) const {
    if (!h_smooth) return Vector::Zero(y.size());
    ++counters->grad_h;
    return h_smooth->grad(y);
  }
  Vector r_prox_step(const Vector& c1, double c2) const {
    ++counters->prox;
    return r_prox->prox_step(c1, c2);
  }
  Vector h_prox_step(const Vector& c1, double c2) const {
    ++counters->prox;
    return h_prox->prox_step(c1, c2);
  }

  /// S(x, y) = r(x) + F(x, y) - h(y).
  double S_value(const Vector& x, const Vector& y) const {
    return r_value(x) + F_value(x, y) - h_value(y);
  }
};

// ---------------------------------------------------------------------------
// Shared run bookkeeping.

struct RunReport {
  std::string method;
  std::string problem;
  int n = 0;
  int m = 0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;

  long outer_iterations = 0;
  long inner_iterations = 0;
  long subproblem_count = 0;  // 1D subproblem solves in the dichotomy
  CallCounters counters;
  double residual = std::numeric_limits<double>::quiet_NaN();
  double certified_gap = 0.0;  // largest certified inner gap used
  double max_warm_start_distance = 0.0;
  double wall_seconds = 0.0;
  bool timed_out = false;
  bool budget_exhausted = false;
  bool stopped_by_criterion = false;
  Vector inner_point;  // final inner-variable iterate, when meaningful
  Vector outer_point;  // final outer-variable iterate, when meaningful
  // best objective value seen at a feasible primal iterate (dual harness runs)
  double best_feasible_value = std::numeric_limits<double>::quiet_NaN();
};

struct Deadline {
  std::optional<std::chrono::steady_clock::time_point> at;

  static Deadline none() { return Deadline{}; }
  static Deadline after_seconds(double s) {
    Deadline d;
    d.at = std::chrono::steady_clock::now() +
           std::chrono::duration_cast<std::chrono::steady_clock::duration>(
               std::chrono::duration<double>(s));
    return d;
  }
  bool expired() const {
    return at && std::chrono::steady_clock::now() >= *at;
  }
};

// ---------------------------------------------------------------------------
// Inexact-oracle facts.

/// Guaranteed bound on ||g_delta(x) - nabla f(x)|| for a (delta, L)-oracle at
/// points at distance >= sqrt(delta/(2L)) from the boundary: sqrt(L*delta/2).
inline double delta_oracle_gap_bound(double delta, double lipschitz_grad) {
  if (!(lipschitz_grad > 0.0))
    throw std::invalid_argument("delta_oracle_gap_bound: L > 0 required");
  if (delta < 0.0)
    throw std::invalid_argument("delta_oracle_gap_bound: delta >= 0 required");
  return std::sqrt(lipschitz_grad * delta / 2.0);
}

}  // namespace saddlecut
