#pragma once

// Problem builders: generic Lagrangian dual of a constrained convex program,
// the sparse quadratic instance with max-aggregated linear constraints, and
// the l2-regularized LogSumExp instance with linear constraints.

#include "saddlecut/core.hpp"
#include "saddlecut/saddle.hpp"

#include <nlohmann/json.hpp>

#include <numbers>

namespace saddlecut {

// ---------------------------------------------------------------------------
// Spectral norm by power iteration, deterministic start.

inline double spectral_norm(const Matrix& m, double rel_tol = 1e-8,
                            int max_iters = 10000) {
  Vector v = Vector::Ones(m.cols()).normalized();
  double sigma = 0.0;
  for (int k = 0; k < max_iters; ++k) {
    Vector w = m.transpose() * (m * v);
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    w /= nw;
    const double next = std::sqrt(nw);
    if (k > 0 && std::abs(next - sigma) <= rel_tol * next) return next;
    sigma = next;
    v = std::move(w);
  }
  return sigma;
}

// ---------------------------------------------------------------------------
// Generic constrained program and its dual localization.

struct ConstrainedProgram {
  std::function<double(const Vector&)> objective;  // mu_f-strongly convex
  std::vector<std::function<double(const Vector&)>> constraints;  // convex
  Vector slater_point;  // g_i(slater_point) < 0 for all i
  double mu_f = 0.0;
  double m_g = 0.0;  // Lipschitz constant of the constraint map
  // When false, the localizer subtracts this lower bound on min f instead of
  // dropping the term.
  bool objective_nonnegative = true;
  double objective_lower = 0.0;
};

struct DualLocalizer {
  BoxDomain box;   // {y >= 0, y_k <= bound}
  double omega;    // simplex leg length, same bound
  double gamma;    // Slater margin min_i(-g_i(x0))
};

/// Multiplier localization from the Slater condition:
/// ||y*||_1 <= (f(x0) - min f) / gamma.
inline DualLocalizer dual_localizer(const ConstrainedProgram& p) {
  double gamma = std::numeric_limits<double>::infinity();
  for (const auto& g : p.constraints)
    gamma = std::min(gamma, -g(p.slater_point));
  if (!(gamma > 0.0))
    throw InfeasibleError("dual_localizer: Slater condition violated");
  const double top = p.objective(p.slater_point) -
                     (p.objective_nonnegative ? 0.0 : p.objective_lower);
  const double bound = std::max(top, 0.0) / gamma;
  const int k = static_cast<int>(p.constraints.size());
  DualLocalizer out{BoxDomain(Vector::Zero(k), Vector::Constant(k, bound)),
                    bound, gamma};
  return out;
}

/// L = M_g^2 / mu_f: Lipschitz constant of the dual gradient.
inline double dual_gradient_lipschitz(double mu_f, double m_g) {
  if (!(mu_f > 0.0))
    throw std::invalid_argument("dual_gradient_lipschitz: mu_f > 0");
  if (m_g < 0.0)
    throw std::invalid_argument("dual_gradient_lipschitz: m_g >= 0");
  return m_g * m_g / mu_f;
}

// ---------------------------------------------------------------------------
// Max-aggregated affine constraints.

struct AffineConstraint {
  Vector normal;
  double offset = 0.0;
  double value(const Vector& x) const { return normal.dot(x) + offset; }
};

struct MaxAffine {
  std::vector<AffineConstraint> pieces;

  double value(const Vector& x) const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : pieces) best = std::max(best, p.value(x));
    return best;
  }
  /// Smallest index attaining the max.
  int attaining(const Vector& x) const {
    int arg = 0;
    double best = pieces[0].value(x);
    for (std::size_t i = 1; i < pieces.size(); ++i) {
      const double v = pieces[i].value(x);
      if (v > best) {
        best = v;
        arg = static_cast<int>(i);
      }
    }
    return arg;
  }
  Vector subgradient(const Vector& x) const {
    return pieces[attaining(x)].normal;
  }
  double lipschitz() const {
    double m = 0.0;
    for (const auto& p : pieces) m = std::max(m, p.normal.norm());
    return m;
  }
};

/// Splits constraints into two max-aggregates: first floor(m/2), then the
/// rest.
inline std::pair<MaxAffine, MaxAffine> aggregate_max_constraints(
    const std::vector<AffineConstraint>& gs) {
  if (gs.size() < 2)
    throw std::invalid_argument("aggregate_max_constraints: m >= 2");
  const std::size_t half = gs.size() / 2;
  MaxAffine g1, g2;
  g1.pieces.assign(gs.begin(), gs.begin() + half);
  g2.pieces.assign(gs.begin() + half, gs.end());
  return {std::move(g1), std::move(g2)};
}

// ---------------------------------------------------------------------------
// Quadratic instance: f(x) = 1/2 ||Ax - b||^2 over a ball, affine
// constraints aggregated into two max-type ones.

struct QuadraticInstance {
  Matrix a;
  Vector b;
  std::vector<AffineConstraint> constraints;
  double radius = 0.0;
  double density = 0.0;
  std::uint64_t seed = 0;
};

inline QuadraticInstance generate_quadratic(int n, int m, double radius,
                                            double density,
                                            std::uint64_t seed) {
  if (n < 1 || m < 2)
    throw std::invalid_argument("generate_quadratic: n >= 1, m >= 2");
  Rng rng(seed);
  QuadraticInstance inst;
  inst.a = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j)
        inst.a(i, j) = rng.uniform(0.0, 1.1);
      else if (rng.uniform() < density)
        inst.a(i, j) = rng.uniform(0.0, 1.0);
    }
  inst.b = Vector(n);
  for (int i = 0; i < n; ++i) inst.b[i] = rng.uniform(0.0, 0.5);
  inst.constraints.resize(m);
  for (int i = 0; i < m; ++i) {
    inst.constraints[i].normal = Vector(n);
    for (int j = 0; j < n; ++j)
      inst.constraints[i].normal[j] = rng.uniform(0.0, 0.1);
    inst.constraints[i].offset = rng.uniform(0.0, 0.1);
  }
  inst.radius = radius;
  inst.density = density;
  inst.seed = seed;
  return inst;
}

struct QuadraticDualOptions {
  long inner_iterations = 800;
  long reference_iterations = 5000;
};

/// Dual phi(l1, l2) = min_{||x|| <= r} { f(x) + l1 g1(x) + l2 g2(x) } over the
/// triangle {l >= 0, l1 + l2 <= omega}; the inner minimization runs a
/// projected subgradient method with a fixed budget.
class QuadraticDual {
 public:
  QuadraticDual(QuadraticInstance inst, QuadraticDualOptions opts = {})
      : inst_(std::move(inst)), opts_(opts),
        counters_(std::make_shared<CallCounters>()) {
    auto gs = aggregate_max_constraints(inst_.constraints);
    g1_ = std::move(gs.first);
    g2_ = std::move(gs.second);
    const int n = static_cast<int>(inst_.a.rows());

    // Slater point along -1: g^i(-t 1) = -t sum(c^i) + d^i < 0.
    double t = 0.0;
    for (const auto& g : inst_.constraints) {
      const double s = g.normal.sum();
      if (!(s > 0.0))
        throw InfeasibleError("QuadraticDual: constraint with nonpositive row sum");
      t = std::max(t, g.offset / s);
    }
    t *= 2.0;
    slater_ = Vector::Constant(n, -t);
    if (slater_.norm() > 0.9 * inst_.radius)
      throw InfeasibleError("QuadraticDual: Slater point outside the ball");

    ConstrainedProgram prog;
    prog.objective = [this](const Vector& x) { return objective(x); };
    prog.constraints = {
        [this](const Vector& x) { return g1_.value(x); },
        [this](const Vector& x) { return g2_.value(x); }};
    prog.slater_point = slater_;
    auto loc = dual_localizer(prog);
    omega_ = loc.omega;
    gamma_ = loc.gamma;
    box_ = loc.box;

    norm_a_ = spectral_norm(inst_.a);
    mu_f_ = Eigen::SelfAdjointEigenSolver<Matrix>(
                inst_.a.transpose() * inst_.a)
                .eigenvalues()
                .minCoeff();
    m_g_ = std::max(g1_.lipschitz(), g2_.lipschitz());
    // Calibrate the realized inner gap against the long-run reference at the
    // triangle center.
    const Vector mid = Vector::Constant(2, omega_ / 4.0);
    const auto coarse = evaluate(mid, opts_.inner_iterations);
    const auto fine = evaluate(mid, opts_.reference_iterations);
    inner_gap_estimate_ = std::max(coarse.lagrangian - fine.lagrangian, 1e-9);
  }

  struct Eval {
    double lagrangian = 0.0;  // value at the returned x
    Vector x;
    Vector constraint_values;  // (g1, g2) at x
  };

  double objective(const Vector& x) const {
    ++counters_->value;
    return 0.5 * (inst_.a * x - inst_.b).squaredNorm();
  }

  Eval evaluate(const Vector& lambda, long iterations = 0) const {
    const long budget = iterations > 0 ? iterations : opts_.inner_iterations;
    const int n = static_cast<int>(inst_.a.rows());
    const double r = inst_.radius;
    const double step_m =
        norm_a_ * (norm_a_ * r + inst_.b.norm()) + lambda.sum() * m_g_ + 1e-12;
    Vector x = Vector::Zero(n);
    Vector best_x = x;
    double best_val = lagrangian(lambda, x);
    for (long k = 1; k <= budget; ++k) {
      ++counters_->grad_x;
      Vector g = inst_.a.transpose() * (inst_.a * x - inst_.b) +
                 lambda[0] * g1_.subgradient(x) + lambda[1] * g2_.subgradient(x);
      x -= (r / (step_m * std::sqrt(static_cast<double>(k)))) * g;
      const double nx = x.norm();
      if (nx > r) x *= r / nx;
      const double val = lagrangian(lambda, x);
      if (val < best_val) {
        best_val = val;
        best_x = x;
      }
    }
    Eval out;
    out.lagrangian = best_val;
    out.x = best_x;
    out.constraint_values = Vector(2);
    out.constraint_values[0] = g1_.value(best_x);
    out.constraint_values[1] = g2_.value(best_x);
    return out;
  }

  double lagrangian(const Vector& lambda, const Vector& x) const {
    ++counters_->value;
    return 0.5 * (inst_.a * x - inst_.b).squaredNorm() +
           lambda[0] * g1_.value(x) + lambda[1] * g2_.value(x);
  }

  const QuadraticInstance& instance() const { return inst_; }
  const MaxAffine& g1() const { return g1_; }
  const MaxAffine& g2() const { return g2_; }
  const Vector& slater() const { return slater_; }
  double omega() const { return omega_; }
  double gamma() const { return gamma_; }
  double mu_f() const { return mu_f_; }
  double m_g() const { return m_g_; }
  double inner_gap_estimate() const { return inner_gap_estimate_; }
  const BoxDomain& dual_box() const { return box_; }
  std::shared_ptr<CallCounters> counters() const { return counters_; }
  long inner_budget() const { return opts_.inner_iterations; }

 private:
  QuadraticInstance inst_;
  QuadraticDualOptions opts_;
  MaxAffine g1_, g2_;
  Vector slater_;
  BoxDomain box_;
  double omega_ = 0.0, gamma_ = 0.0;
  double norm_a_ = 0.0, mu_f_ = 0.0, m_g_ = 0.0;
  double inner_gap_estimate_ = 0.0;
  std::shared_ptr<CallCounters> counters_;
};

// ---------------------------------------------------------------------------
// LogSumExp instance: LSE(x) = log2(1 + sum_k e^{alpha_k x_k}) +
// (mu_x/2)||x||^2 subject to B x <= c.

struct LogSumExpInstance {
  Vector alpha;  // m
  Matrix b_mat;  // n x m
  Vector c;      // n, all ones
  double mu_x = 0.0;
  std::uint64_t seed = 0;
};

inline LogSumExpInstance generate_logsumexp(int n, int m, std::uint64_t seed,
                                            double alpha0 = 1e-3,
                                            double b_range = 1e3,
                                            double mu_x = 1e-3) {
  if (n < 1 || m < 1)
    throw std::invalid_argument("generate_logsumexp: dims >= 1");
  Rng rng(seed);
  LogSumExpInstance inst;
  inst.alpha = Vector(m);
  for (int k = 0; k < m; ++k) inst.alpha[k] = rng.uniform(-alpha0, alpha0);
  inst.b_mat = Matrix(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) inst.b_mat(i, j) = rng.uniform(-b_range, b_range);
  inst.c = Vector::Ones(n);
  inst.mu_x = mu_x;
  inst.seed = seed;
  return inst;
}

/// log2(1 + sum_k exp(alpha_k x_k)), overflow-safe.
inline double lse_value(const Vector& alpha, const Vector& x) {
  const Vector t = alpha.cwiseProduct(x);
  const double peak = std::max(0.0, t.maxCoeff());
  double s = std::exp(-peak);
  for (int k = 0; k < t.size(); ++k) s += std::exp(t[k] - peak);
  return (peak + std::log(s)) / std::numbers::ln2;
}

inline Vector lse_grad(const Vector& alpha, const Vector& x) {
  const Vector t = alpha.cwiseProduct(x);
  const double peak = std::max(0.0, t.maxCoeff());
  double s = std::exp(-peak);
  for (int k = 0; k < t.size(); ++k) s += std::exp(t[k] - peak);
  Vector g(t.size());
  for (int k = 0; k < t.size(); ++k)
    g[k] = alpha[k] * std::exp(t[k] - peak) / (s * std::numbers::ln2);
  return g;
}

/// Curvature bound of the LSE part: max_k alpha_k^2 / ln 2.
inline double lse_grad_lipschitz(const Vector& alpha) {
  return alpha.cwiseAbs().maxCoeff() * alpha.cwiseAbs().maxCoeff() /
         std::numbers::ln2;
}

struct LogSumExpDual {
  LogSumExpInstance inst;
  SaddleSpec spec;        // r(x) + F(x,y) - h(y) with dual variable y
  BoxDomain base_box;     // localizer from the trivial Slater point x0 = 0
  BoxDomain dual_box;     // refined localizer actually used by the solvers
  double gamma = 0.0;     // margin at x0 = 0
  double primal_radius = 0.0;
  double norm_b = 0.0;
  double l_lse = 0.0;
  double mu_dual = 0.0;   // certified strong concavity of the dual (0 if none)
  double l_dual = 0.0;    // certified smoothness of the dual

  Vector constraint_values(const Vector& x) const {
    return inst.b_mat * x - inst.c;
  }
  double primal_value(const Vector& x) const {
    return lse_value(inst.alpha, x) + 0.5 * inst.mu_x * x.squaredNorm();
  }
};

/// Assembles the Lagrangian saddle form of the LogSumExp problem together
/// with localizers and certified dual constants.
inline LogSumExpDual build_logsumexp_dual(LogSumExpInstance inst) {
  LogSumExpDual out;
  out.inst = std::move(inst);
  const auto& li = out.inst;
  const int n = static_cast<int>(li.b_mat.rows());
  const int m = static_cast<int>(li.b_mat.cols());

  ConstrainedProgram prog;
  prog.objective = [&li](const Vector& x) {
    return lse_value(li.alpha, x) + 0.5 * li.mu_x * x.squaredNorm();
  };
  for (int i = 0; i < n; ++i)
    prog.constraints.push_back([&li, i](const Vector& x) {
      return li.b_mat.row(i).dot(x) - li.c[i];
    });
  prog.slater_point = Vector::Zero(m);
  auto base = dual_localizer(prog);
  out.base_box = base.box;
  out.gamma = base.gamma;

  // Refined localizer: a deeper Slater point along the solution of
  // B u = 1 shrinks the multiplier bound by orders of magnitude.
  BoxDomain box = base.box;
  const Matrix bbt = li.b_mat * li.b_mat.transpose();
  const Eigen::SelfAdjointEigenSolver<Matrix> es(bbt);
  const double bbt_min = es.eigenvalues().minCoeff();
  if (bbt_min > 1e-12 * es.eigenvalues().maxCoeff()) {
    const Vector u = li.b_mat.transpose() * bbt.ldlt().solve(Vector::Ones(n));
    const double t = std::sqrt(2.0 * prog.objective(prog.slater_point) / li.mu_x) /
                     std::max(u.norm(), 1e-300);
    ConstrainedProgram deep = prog;
    deep.slater_point = -t * u;
    const auto refined = dual_localizer(deep);
    if (refined.omega < base.omega) {
      box = BoxDomain(Vector::Zero(n),
                      Vector::Constant(n, refined.omega));
    }
  }
  out.dual_box = box;

  out.norm_b = spectral_norm(li.b_mat);
  out.l_lse = lse_grad_lipschitz(li.alpha);

  // Primal ball: the witness radius from the value argument, enlarged when
  // needed so that Lagrangian minimizers over the refined box stay interior.
  const double omega = box.upper.maxCoeff();
  const double witness = std::sqrt(
      2.0 * (std::log2(m + 1.0) + omega * li.c.lpNorm<1>()) / li.mu_x);
  const double grad_lse_max = li.alpha.cwiseAbs().maxCoeff() / std::numbers::ln2;
  const double reach =
      (out.norm_b * omega * std::sqrt(static_cast<double>(n)) + grad_lse_max) /
      li.mu_x;
  out.primal_radius = std::max(witness, 1.1 * reach);

  if (bbt_min > 0.0) {
    out.mu_dual = bbt_min / (li.mu_x + out.l_lse);
    out.l_dual = es.eigenvalues().maxCoeff() / li.mu_x;
  } else {
    out.mu_dual = 0.0;
    out.l_dual = dual_gradient_lipschitz(li.mu_x, out.norm_b);
  }

  // Saddle form: r(x) = (mu_x/2)||x||^2,
  // F(x,y) = LSE(x) + y^T B x, h(y) = y^T c.
  SaddleSpec& spec = out.spec;
  const Matrix& bm = li.b_mat;
  const Vector alpha = li.alpha;
  const Vector c = li.c;
  const double mu_x = li.mu_x;
  spec.coupling_value = [alpha, &bm](const Vector& x, const Vector& y) {
    return lse_value(alpha, x) + y.dot(bm * x);
  };
  spec.coupling_grad_x = [alpha, &bm](const Vector& x, const Vector& y) -> Vector {
    return lse_grad(alpha, x) + bm.transpose() * y;
  };
  spec.coupling_grad_y = [&bm](const Vector& x, const Vector&) -> Vector {
    return bm * x;
  };
  spec.r_prox =
      make_quadratic_prox(mu_x, BallDomain(Vector::Zero(m), out.primal_radius));
  spec.r_smooth = SmoothFn{
      [mu_x](const Vector& x) { return 0.5 * mu_x * x.squaredNorm(); },
      [mu_x](const Vector& x) -> Vector { return mu_x * x; }};
  spec.h_smooth = SmoothFn{[c](const Vector& y) { return c.dot(y); },
                           [c](const Vector& y) -> Vector {
                             (void)y;
                             return c;
                           }};
  spec.x_domain = Domain(BallDomain(Vector::Zero(m), out.primal_radius));
  spec.y_domain = Domain(box);

  auto& sc = spec.constants;
  sc.mu_x = mu_x;
  sc.mu_y = out.mu_dual;
  sc.lxx = out.l_lse;
  sc.lxy = out.norm_b;
  sc.lyy = 0.0;
  sc.lh = 0.0;
  sc.lr = mu_x;
  const double phi_grad_max =
      c.norm() + out.norm_b * out.primal_radius;
  sc.value_bound = phi_grad_max * box.diameter() + 1.0;
  sc.value_lipschitz = phi_grad_max;
  sc.grad_lipschitz = out.l_dual;
  sc.strong_convexity = out.mu_dual;
  sc.rx_bound = 2.0 * out.primal_radius;
  return out;
}

// Kind-dispatched generation with the defaults of the experiment protocol.
using Instance = std::variant<QuadraticInstance, LogSumExpInstance>;

inline Instance generate_instance(const std::string& kind, int n, int m,
                                  std::uint64_t seed) {
  if (kind == "quadratic") return generate_quadratic(n, m, 5.0, 0.005, seed);
  if (kind == "logsumexp") return generate_logsumexp(n, m, seed);
  throw std::invalid_argument("generate_instance: unknown kind " + kind);
}

/// Stopping test |lambda^T g| <= eps/2 with g_i <= 0 for every inactive
/// multiplier; guarantees primal accuracy delta + eps for a delta-accurate
/// inner solution.
inline bool kkt_stop(const Vector& lambda, const Vector& g_vals, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("kkt_stop: eps > 0");
  if (std::abs(lambda.dot(g_vals)) > eps / 2.0) return false;
  for (int i = 0; i < lambda.size(); ++i)
    if (lambda[i] == 0.0 && g_vals[i] > 0.0) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Serialization: instances round-trip through JSON with explicit seeds and
// column-major matrix payloads.

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data(m.data(), m.data() + m.size());  // column-major
  j["data"] = data;
  return j;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw std::invalid_argument("matrix_from_json: size mismatch");
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

inline nlohmann::json vector_to_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Vector vector_from_json(const nlohmann::json& j) {
  const auto data = j.get<std::vector<double>>();
  Vector v(static_cast<Eigen::Index>(data.size()));
  std::copy(data.begin(), data.end(), v.data());
  return v;
}

inline nlohmann::json to_json(const QuadraticInstance& q) {
  nlohmann::json j;
  j["kind"] = "quadratic";
  j["seed"] = q.seed;
  j["radius"] = q.radius;
  j["density"] = q.density;
  j["a"] = matrix_to_json(q.a);
  j["b"] = vector_to_json(q.b);
  nlohmann::json cons = nlohmann::json::array();
  for (const auto& g : q.constraints) {
    nlohmann::json one;
    one["normal"] = vector_to_json(g.normal);
    one["offset"] = g.offset;
    cons.push_back(one);
  }
  j["constraints"] = cons;
  return j;
}

inline QuadraticInstance quadratic_from_json(const nlohmann::json& j) {
  QuadraticInstance q;
  q.seed = j.at("seed").get<std::uint64_t>();
  q.radius = j.at("radius").get<double>();
  q.density = j.at("density").get<double>();
  q.a = matrix_from_json(j.at("a"));
  q.b = vector_from_json(j.at("b"));
  for (const auto& one : j.at("constraints")) {
    AffineConstraint g;
    g.normal = vector_from_json(one.at("normal"));
    g.offset = one.at("offset").get<double>();
    q.constraints.push_back(std::move(g));
  }
  return q;
}

inline nlohmann::json to_json(const LogSumExpInstance& q) {
  nlohmann::json j;
  j["kind"] = "logsumexp";
  j["seed"] = q.seed;
  j["mu_x"] = q.mu_x;
  j["alpha"] = vector_to_json(q.alpha);
  j["b"] = matrix_to_json(q.b_mat);
  j["c"] = vector_to_json(q.c);
  return j;
}

inline LogSumExpInstance logsumexp_from_json(const nlohmann::json& j) {
  LogSumExpInstance q;
  q.seed = j.at("seed").get<std::uint64_t>();
  q.mu_x = j.at("mu_x").get<double>();
  q.alpha = vector_from_json(j.at("alpha"));
  q.b_mat = matrix_from_json(j.at("b"));
  q.c = vector_from_json(j.at("c"));
  return q;
}

}  // namespace saddlecut
