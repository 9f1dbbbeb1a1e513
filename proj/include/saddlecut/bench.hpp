#pragma once

// Benchmark harness: JSON config, method x epsilon run matrices over the two
// instance families, CSV/Markdown tables.

#include "saddlecut/problems.hpp"

#include <atomic>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

namespace saddlecut {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BenchConfig {
  std::string problem;            // "quadratic" | "logsumexp"
  int n = 0;                      // quadratic: primal dim; logsumexp: #constraints
  int m = 0;                      // quadratic: #constraints; logsumexp: primal dim
  std::vector<double> epsilons;   // positive, descending
  std::vector<std::string> methods;
  std::uint64_t seed = 0;
  double time_limit_sec = 0.0;    // 0: family default (100 s; 200 s for the
                                  // logsumexp n=4, m=10000 cell)
  std::string output;
  bool strict = false;
  int workers = 1;

  // constant overrides
  long inner_budget = 800;        // quadratic subgradient iterations
  long reference_budget = 5000;
  double radius = 5.0;            // quadratic primal ball
  double density = 0.005;
  double feas_tol = 1e-8;         // logsumexp feasibility threshold

  double effective_time_limit() const {
    if (time_limit_sec > 0.0) return time_limit_sec;
    if (problem == "logsumexp" && n == 4 && m == 10000) return 200.0;
    return 100.0;
  }
};

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> k = {
      "approach1",      "approach2", "dichotomy_outer",
      "ellipsoid_dual", "fgm_dual",  "triangle_dual"};
  return k;
}

inline BenchConfig parse_config(const nlohmann::json& j) {
  static const std::vector<std::string> keys = {
      "problem",     "n",      "m",          "epsilons",
      "methods",     "seed",   "time_limit_sec", "output",
      "strict",      "workers", "overrides"};
  static const std::vector<std::string> override_keys = {
      "inner_budget", "reference_budget", "radius", "density", "feas_tol"};
  for (const auto& [key, _] : j.items())
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ConfigError("unknown config key: " + key);
  BenchConfig cfg;
  cfg.problem = j.at("problem").get<std::string>();
  if (cfg.problem != "quadratic" && cfg.problem != "logsumexp")
    throw ConfigError("unknown problem: " + cfg.problem);
  cfg.n = j.at("n").get<int>();
  cfg.m = j.at("m").get<int>();
  cfg.epsilons = j.at("epsilons").get<std::vector<double>>();
  if (cfg.epsilons.empty()) throw ConfigError("epsilons: empty");
  for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
    if (!(cfg.epsilons[i] > 0.0)) throw ConfigError("epsilons: must be positive");
    if (i > 0 && cfg.epsilons[i] >= cfg.epsilons[i - 1])
      throw ConfigError("epsilons: must be descending");
  }
  cfg.methods = j.at("methods").get<std::vector<std::string>>();
  if (cfg.methods.empty()) throw ConfigError("methods: empty");
  for (const auto& m : cfg.methods)
    if (std::find(known_methods().begin(), known_methods().end(), m) ==
        known_methods().end())
      throw ConfigError("unknown method: " + m);
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("time_limit_sec"))
    cfg.time_limit_sec = j.at("time_limit_sec").get<double>();
  if (j.contains("output")) cfg.output = j.at("output").get<std::string>();
  if (j.contains("strict")) cfg.strict = j.at("strict").get<bool>();
  if (j.contains("workers")) cfg.workers = std::max(1, j.at("workers").get<int>());
  if (j.contains("overrides")) {
    const auto& o = j.at("overrides");
    for (const auto& [key, _] : o.items())
      if (std::find(override_keys.begin(), override_keys.end(), key) ==
          override_keys.end())
        throw ConfigError("unknown override key: " + key);
    if (o.contains("inner_budget"))
      cfg.inner_budget = o.at("inner_budget").get<long>();
    if (o.contains("reference_budget"))
      cfg.reference_budget = o.at("reference_budget").get<long>();
    if (o.contains("radius")) cfg.radius = o.at("radius").get<double>();
    if (o.contains("density")) cfg.density = o.at("density").get<double>();
    if (o.contains("feas_tol")) cfg.feas_tol = o.at("feas_tol").get<double>();
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// LogSumExp dual runners.

namespace detail {

// Warm-started inner minimizer of the Lagrangian in x at fixed multipliers,
// run to (near) machine accuracy; the inner problem is extremely well
// conditioned after the composite split.
class LseInner {
 public:
  explicit LseInner(const LogSumExpDual& built)
      : built_(built), x_(Vector::Zero(built.inst.b_mat.cols())) {}

  const Vector& solve(const Vector& y, CallCounters& counters) {
    const auto& li = built_.inst;
    ModelOracle model;
    model.lipschitz = std::max(built_.l_lse, 1e-18);
    model.strong_convexity = li.mu_x;
    model.prox_solve = [&](double coef, const Vector& u, double alpha,
                           const Vector& z) -> Vector {
      ++counters.grad_x;
      ++counters.prox;
      const Vector g = lse_grad(li.alpha, z) + li.b_mat.transpose() * y;
      const Vector target = (coef * u - alpha * g) / alpha;
      return built_.spec.r_prox->prox_step(Vector(-target), coef / (2.0 * alpha));
    };
    const double target_gap = 1e-26;
    const int iters = fgm_iterations_for(model.lipschitz, li.mu_x,
                                         2.0 * built_.primal_radius, target_gap);
    x_ = fgm_model(model, iters, x_);
    return x_;
  }

 private:
  const LogSumExpDual& built_;
  Vector x_;
};

inline RunReport finish_report(RunReport rep, const BenchConfig& cfg,
                               const std::string& method, double eps) {
  rep.method = method;
  rep.problem = cfg.problem;
  rep.n = cfg.n;
  rep.m = cfg.m;
  rep.epsilon = eps;
  rep.seed = cfg.seed;
  return rep;
}

inline RunReport run_logsumexp_method(const BenchConfig& cfg,
                                      const LogSumExpDual& built,
                                      const std::string& method, double eps) {
  const Deadline deadline = Deadline::after_seconds(cfg.effective_time_limit());
  RunReport rep;
  CallCounters counters;
  LseInner inner(built);
  const BoxDomain& box = built.dual_box;
  const Matrix& bm = built.inst.b_mat;
  const Vector& c = built.inst.c;

  Vector best_y = box.center();
  Vector best_x = Vector::Zero(bm.cols());
  double best_resid = std::numeric_limits<double>::infinity();
  bool stopped = false;

  // Minimize f(y) = -min_x L(x, y) over the localizer box;
  // nu = c - B x(y) is a (near-exact) subgradient.
  auto dual_value_grad = [&](const Vector& y) {
    const Vector& x = inner.solve(y, counters);
    ++counters.grad_y;
    ++counters.grad_h;
    const double val = -(built.primal_value(x) + y.dot(bm * x - c));
    return std::make_pair(val, Vector(c - bm * x));
  };
  auto check_stop = [&](const Vector& y) {
    const Vector& x = inner.solve(y, counters);
    const Vector g = bm * x - c;
    const double resid = std::abs(y.dot(g));
    if (resid < best_resid) {
      best_resid = resid;
      best_y = y;
      best_x = x;
    }
    if (kkt_stop(y, g, eps) && g.maxCoeff() <= cfg.feas_tol) {
      stopped = true;
      return true;
    }
    return false;
  };

  if (method == "ellipsoid_dual" || method == "approach1") {
    FirstOrderOracle oracle(
        [&](const Vector& y) {
          auto [val, nu] = dual_value_grad(y);
          return std::make_pair(val, std::move(nu));
        },
        0.0, OracleMode::delta_subgradient);
    EllipsoidOptions opts;
    opts.deadline = deadline;
    opts.stop_on_degeneracy = true;
    opts.stop_when = [&](const Vector& y, double) { return check_stop(y); };
    const BallDomain ball(box.center(), 0.5 * box.diameter() + 1e-30);
    const long budget = static_cast<long>(std::ceil(
        2.0 * cfg.n * cfg.n *
        std::log(std::max(2.0, box.diameter() / 1e-21)))) + 64;
    auto out = ellipsoid_minimize(oracle, SeparationOracle::for_domain(Domain(box)),
                                  ball, static_cast<int>(budget), 0.0, opts);
    rep = out.report;
    if (!stopped) {
      best_y = out.point;
      check_stop(out.point);
    }
  } else if (method == "fgm_dual") {
    double mu = built.mu_dual;
    Vector anchor = box.center();
    double reg = 0.0;
    if (!(mu > 0.0)) {
      reg = eps / (box.diameter() * box.diameter());
      mu = reg;
    }
    ModelOracle model;
    model.strong_convexity = mu;
    model.lipschitz = built.l_dual + mu;
    model.prox_solve = [&](double coef, const Vector& u, double alpha,
                           const Vector& z) -> Vector {
      auto [val, nu] = dual_value_grad(z);
      (void)val;
      if (reg > 0.0) nu += reg * (z - anchor);
      return box.project(
          Vector((coef * u + alpha * mu * z - alpha * nu) / (coef + alpha * mu)));
    };
    const long budget =
        fgm_iterations_for(model.lipschitz, mu, box.diameter(),
                           std::max(mu * 1e-40, 1e-300)) +
        64;
    long done = 0;
    Vector y = fgm_model(model, static_cast<int>(budget), box.center(), nullptr,
                         deadline, [&](const Vector& yy) { return check_stop(yy); },
                         &done);
    rep.outer_iterations = done;
    rep.timed_out = deadline.expired() && !stopped;
    if (!stopped) check_stop(y);
  } else if (method == "dichotomy_outer") {
    SaddleSpec spec = built.spec;
    spec.counters = std::make_shared<CallCounters>();
    DichotomyOuterConfig dcfg;
    dcfg.dichotomy.value_lipschitz = spec.constants.value_lipschitz;
    dcfg.dichotomy.grad_lipschitz = spec.constants.grad_lipschitz;
    dcfg.dichotomy.strong_convexity = built.mu_dual;
    dcfg.dichotomy.initial_diagonal = box.diameter();
    dcfg.dichotomy.target_eps =
        std::max(built.mu_dual * 1e-38, 1e-300);
    dcfg.inner_case = InnerCaseX::prox_r;
    dcfg.deadline = deadline;
    dcfg.stop_when = [&](const Vector& y, const Vector&) {
      return check_stop(y);
    };
    auto out = solve_dichotomy_outer(spec, dcfg);
    rep = out.report;
    if (!stopped) check_stop(out.point);
  } else if (method == "approach2") {
    // The low-dimensional group treated as auxiliary: outer FGM over x,
    // inner ellipsoid over the regularized dual.
    SaddleSpec spec = built.spec;
    spec.counters = std::make_shared<CallCounters>();
    const double reg = eps / (box.diameter() * box.diameter() + 1e-300);
    const Vector anchor = box.center();
    auto base_f = spec.coupling_value;
    auto base_gy = spec.coupling_grad_y;
    spec.coupling_value = [base_f, reg, anchor](const Vector& x, const Vector& y) {
      return base_f(x, y) - 0.5 * reg * (y - anchor).squaredNorm();
    };
    spec.coupling_grad_y = [base_gy, reg, anchor](const Vector& x,
                                                  const Vector& y) -> Vector {
      return base_gy(x, y) - reg * (y - anchor);
    };
    spec.constants.mu_y = reg;
    // h(y) = c^T y folded into F keeps the inner ellipsoid self-contained.
    auto with_h = spec.coupling_value;
    auto with_h_gy = spec.coupling_grad_y;
    const Vector cc = c;
    spec.coupling_value = [with_h, cc](const Vector& x, const Vector& y) {
      return with_h(x, y) - cc.dot(y);
    };
    spec.coupling_grad_y = [with_h_gy, cc](const Vector& x,
                                           const Vector& y) -> Vector {
      return with_h_gy(x, y) - cc;
    };
    spec.y_domain = Domain(box);
    Approach2Config acfg;
    acfg.eps = eps / 2.0;
    acfg.deadline = deadline;
    acfg.stop_when = [&](const Vector&, const Vector& y) {
      return check_stop(y);
    };
    auto out = solve_small_y(spec, acfg);
    rep = out.report;
    if (!stopped) check_stop(out.report.inner_point);
  } else {
    throw ConfigError("method not supported for logsumexp: " + method);
  }

  rep.counters.grad_x += counters.grad_x;
  rep.counters.grad_y += counters.grad_y;
  rep.counters.grad_r += counters.grad_r;
  rep.counters.grad_h += counters.grad_h;
  rep.counters.prox += counters.prox;
  rep.counters.value += counters.value;
  rep.stopped_by_criterion = stopped;
  rep.timed_out = rep.timed_out || (deadline.expired() && !stopped);
  rep.residual = best_resid;
  rep.inner_point = best_x;
  return finish_report(std::move(rep), cfg, method, eps);
}

// ---------------------------------------------------------------------------
// Quadratic dual runners.

inline RunReport run_quadratic_method(const BenchConfig& cfg,
                                      const QuadraticDual& dual,
                                      const std::string& method, double eps) {
  const Deadline deadline = Deadline::after_seconds(cfg.effective_time_limit());
  RunReport rep;
  const double omega = std::max(dual.omega(), 1e-12);
  const BoxDomain box(Vector::Zero(2), Vector::Constant(2, omega));

  Vector best_l = Vector::Zero(2);
  Vector best_x;
  double best_resid = std::numeric_limits<double>::infinity();
  double best_feasible = std::numeric_limits<double>::quiet_NaN();
  bool stopped = false;

  // The two callbacks below see the same multipliers back to back.
  Vector cache_l;
  QuadraticDual::Eval cache_ev;
  bool cache_valid = false;
  auto eval_cached = [&](const Vector& lambda) -> const QuadraticDual::Eval& {
    if (!cache_valid || cache_l != lambda) {
      cache_ev = dual.evaluate(lambda);
      cache_l = lambda;
      cache_valid = true;
    }
    return cache_ev;
  };

  auto check_stop = [&](const Vector& lambda) {
    const auto& ev = eval_cached(lambda);
    const double resid = std::abs(lambda.dot(ev.constraint_values));
    if (ev.constraint_values.maxCoeff() <= 0.0) {
      const double fv = 0.5 * (dual.instance().a * ev.x - dual.instance().b)
                                  .squaredNorm();
      if (!(best_feasible == best_feasible) || fv < best_feasible)
        best_feasible = fv;
    }
    if (!stopped && resid < best_resid) {
      best_resid = resid;
      best_l = lambda;
      best_x = ev.x;
    }
    if (resid < eps) {
      stopped = true;
      best_resid = resid;
      best_l = lambda;
      best_x = ev.x;
      return true;
    }
    return false;
  };

  // Constants of f(lambda) = -phi(lambda) on the localizer.
  const double m_g = dual.m_g();
  const double mu_f = std::max(dual.mu_f(), 1e-12);
  const double grad_lip = 2.0 * m_g * m_g / mu_f;
  double max_offset = 0.0;
  for (const auto& g : dual.instance().constraints)
    max_offset = std::max(max_offset, std::abs(g.offset));
  const double value_lip =
      std::numbers::sqrt2 * (m_g * dual.instance().radius + max_offset);

  const double grad_noise =
      m_g * std::sqrt(2.0 * dual.inner_gap_estimate() / mu_f);

  auto dual_grad = [&](const Vector& lambda) -> Vector {
    return -eval_cached(lambda).constraint_values;  // subgradient of -phi
  };

  if (method == "triangle_dual" || method == "dichotomy_outer") {
    DichotomyConfig dcfg;
    dcfg.value_lipschitz = value_lip + 1e-9;
    dcfg.grad_lipschitz = grad_lip + 1e-9;
    dcfg.initial_diagonal = box.diameter();

    // Regularization per the harness rule.
    const double reg = eps / (box.diameter() * box.diameter());
    dcfg.strong_convexity = reg;
    dcfg.grad_lipschitz += reg;
    dcfg.value_lipschitz += reg * box.diameter();
    dcfg.target_eps = eps * 1e-3;
    const Vector anchor = box.center();

    InexactGradient grad;
    grad.eval = [&](const Vector& lambda, double request) {
      Vector nu = dual_grad(lambda) + reg * (lambda - anchor);
      return std::make_pair(std::move(nu),
                            std::max(grad_noise, std::min(request, 1.0)));
    };
    DichotomyOptions opts;
    opts.deadline = deadline;
    opts.stop_when = [&](const Vector& lambda) { return check_stop(lambda); };
    if (method == "triangle_dual") {
      opts.segment_clip = [omega](const Vector& fixed, int dim, double lo,
                                  double hi) {
        double budget = omega;
        for (int i = 0; i < fixed.size(); ++i)
          if (i != dim) budget -= fixed[i];
        const double upper = std::min(hi, budget);
        return std::make_pair(lo, std::max(lo, upper));
      };
    }
    auto out = multidim_dichotomy(grad, box, dcfg, opts);
    rep.outer_iterations = out.report.sweeps;
    rep.subproblem_count = out.report.subproblem_count;
    rep.budget_exhausted = out.report.budget_exhausted;
    rep.timed_out = out.report.timed_out;
    if (!stopped) check_stop(out.point);
  } else if (method == "ellipsoid_dual") {
    const SimplexDomain tri(2, omega);
    FirstOrderOracle oracle(
        [&](const Vector& lambda) {
          const auto& ev = eval_cached(lambda);
          return std::make_pair(-ev.lagrangian, Vector(-ev.constraint_values));
        },
        dual.inner_gap_estimate(), OracleMode::delta_subgradient);
    EllipsoidOptions opts;
    opts.deadline = deadline;
    opts.stop_on_degeneracy = true;
    opts.stop_when = [&](const Vector& lambda, double) {
      return check_stop(lambda);
    };
    const Domain dom(tri);
    const BallDomain ball = dom.enclosing_ball();
    const long budget = static_cast<long>(std::ceil(
        8.0 * std::log(std::max(2.0, value_lip * box.diameter() /
                                          (eps * 1e-6))))) + 64;
    auto out = ellipsoid_minimize(oracle, SeparationOracle::for_domain(dom), ball,
                                  static_cast<int>(budget),
                                  dual.inner_gap_estimate(), opts);
    rep = out.report;
    if (!stopped) check_stop(out.point);
  } else if (method == "fgm_dual") {
    const double reg = eps / (box.diameter() * box.diameter());
    const Vector anchor = box.center();
    ModelOracle model;
    model.strong_convexity = reg;
    model.lipschitz = grad_lip + reg;
    model.prox_solve = [&](double coef, const Vector& u, double alpha,
                           const Vector& z) -> Vector {
      Vector nu = dual_grad(z) + reg * (z - anchor);
      return box.project(Vector((coef * u + alpha * reg * z - alpha * nu) /
                                (coef + alpha * reg)));
    };
    long done = 0;
    Vector y = fgm_model(model, 1 << 22, box.center(), nullptr, deadline,
                         [&](const Vector& lambda) { return check_stop(lambda); },
                         &done);
    rep.outer_iterations = done;
    if (!stopped) check_stop(y);
  } else {
    throw ConfigError("method not supported for quadratic: " + method);
  }

  rep.counters = *dual.counters();
  rep.stopped_by_criterion = stopped;
  rep.timed_out = rep.timed_out || (deadline.expired() && !stopped);
  rep.residual = best_resid;
  rep.inner_point = best_x;
  rep.outer_point = best_l;
  rep.best_feasible_value = best_feasible;
  return finish_report(std::move(rep), cfg, method, eps);
}

}  // namespace detail

/// One report per (method, epsilon) cell. Cells run on a bounded worker pool
/// and are merged by cell index, so the output order is scheduling-free.
inline std::vector<RunReport> run_matrix(const BenchConfig& cfg) {
  struct Cell {
    std::string method;
    double eps;
  };
  std::vector<Cell> cells;
  for (const auto& method : cfg.methods)
    for (double eps : cfg.epsilons) cells.push_back({method, eps});

  std::vector<RunReport> reports(cells.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::string> errors(cells.size());

  auto work = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        const auto t0 = std::chrono::steady_clock::now();
        RunReport rep;
        if (cfg.problem == "quadratic") {
          QuadraticDual dual(
              generate_quadratic(cfg.n, cfg.m, cfg.radius, cfg.density, cfg.seed),
              {cfg.inner_budget, cfg.reference_budget});
          rep = detail::run_quadratic_method(cfg, dual, cells[i].method,
                                             cells[i].eps);
        } else {
          auto built = build_logsumexp_dual(
              generate_logsumexp(cfg.n, cfg.m, cfg.seed));
          rep = detail::run_logsumexp_method(cfg, built, cells[i].method,
                                             cells[i].eps);
        }
        rep.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        reports[i] = std::move(rep);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };

  const int workers =
      std::max(1, std::min<int>(cfg.workers, static_cast<int>(cells.size())));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (!errors[i].empty())
      throw std::runtime_error("cell " + cells[i].method + ": " + errors[i]);
  return reports;
}

// ---------------------------------------------------------------------------
// Tables.

enum class TableFormat { csv, markdown };

inline std::string render_csv_row(const RunReport& r) {
  std::ostringstream os;
  os << r.method << ',' << r.problem << ',' << r.n << ',' << r.m << ','
     << std::setprecision(17) << r.epsilon << ',' << r.seed << ','
     << r.outer_iterations << ',' << r.counters.grad_x + r.counters.grad_r
     << ',' << r.counters.grad_y + r.counters.grad_h << ',' << r.counters.prox
     << ',' << r.counters.value << ',' << r.residual << ',' << r.wall_seconds
     << ',' << (r.timed_out ? 1 : 0);
  return os.str();
}

inline std::string render_table(const std::vector<RunReport>& reports,
                                TableFormat format) {
  if (reports.empty()) throw std::invalid_argument("render_table: no reports");
  std::ostringstream os;
  if (format == TableFormat::csv) {
    os << "method,problem,n,m,epsilon,seed,outer_iters,grad_x_calls,"
          "grad_y_calls,prox_calls,value_calls,residual,wall_sec,timed_out\n";
    for (const auto& r : reports) os << render_csv_row(r) << '\n';
    return os.str();
  }

  // Markdown: one table per n, epsilon-major rows, method columns.
  std::vector<int> ns;
  for (const auto& r : reports)
    if (std::find(ns.begin(), ns.end(), r.n) == ns.end()) ns.push_back(r.n);
  for (int n : ns) {
    std::vector<std::string> methods;
    std::vector<std::pair<double, int>> rows;  // (eps, m), ordered
    for (const auto& r : reports) {
      if (r.n != n) continue;
      if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
        methods.push_back(r.method);
      const auto key = std::make_pair(r.epsilon, r.m);
      if (std::find(rows.begin(), rows.end(), key) == rows.end())
        rows.push_back(key);
    }
    std::stable_sort(rows.begin(), rows.end(), [](auto a, auto b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    os << "### n = " << n << "\n\n";
    os << "| epsilon | m |";
    for (const auto& m : methods) os << ' ' << m << " iters | " << m << " sec |";
    os << '\n';
    os << "|---|---|";
    for (std::size_t k = 0; k < methods.size(); ++k) os << "---|---|";
    os << '\n';
    for (const auto& [eps, m] : rows) {
      os << "| " << eps << " | " << m << " |";
      for (const auto& method : methods) {
        const RunReport* hit = nullptr;
        for (const auto& r : reports)
          if (r.n == n && r.m == m && r.epsilon == eps && r.method == method)
            hit = &r;
        if (hit) {
          os << ' ' << hit->outer_iterations << (hit->timed_out ? "*" : "")
             << " | " << std::fixed << std::setprecision(3)
             << hit->wall_seconds << " |";
          os.unsetf(std::ios_base::floatfield);
        } else {
          os << " - | - |";
        }
      }
      os << '\n';
    }
    os << '\n';
  }
  return os.str();
}

/// Parses CSV produced by render_table back into reports (counter kinds are
/// merged into the two gradient columns on output, so grad_x/grad_y absorb
/// the r/h parts).
inline std::vector<RunReport> parse_csv(std::istream& in) {
  std::vector<RunReport> out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 14)
      throw std::invalid_argument("parse_csv: expected 14 fields");
    RunReport r;
    r.method = fields[0];
    r.problem = fields[1];
    r.n = std::stoi(fields[2]);
    r.m = std::stoi(fields[3]);
    r.epsilon = std::stod(fields[4]);
    r.seed = std::stoull(fields[5]);
    r.outer_iterations = std::stol(fields[6]);
    r.counters.grad_x = std::stoull(fields[7]);
    r.counters.grad_y = std::stoull(fields[8]);
    r.counters.prox = std::stoull(fields[9]);
    r.counters.value = std::stoull(fields[10]);
    r.residual = std::stod(fields[11]);
    r.wall_seconds = std::stod(fields[12]);
    r.timed_out = fields[13] == "1";
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace saddlecut
