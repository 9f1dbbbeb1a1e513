#include "saddlecut/core.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace saddlecut;

namespace {
Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}
}  // namespace

TEST_CASE("delta_oracle_gap_bound matches the closed form") {
  CHECK(delta_oracle_gap_bound(0.0, 5.0) == 0.0);
  CHECK(delta_oracle_gap_bound(2.0, 1.0) == Catch::Approx(1.0));
  CHECK(delta_oracle_gap_bound(0.08, 4.0) == Catch::Approx(0.4));
  CHECK_THROWS_AS(delta_oracle_gap_bound(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(delta_oracle_gap_bound(1.0, -2.0), std::invalid_argument);
  CHECK_THROWS_AS(delta_oracle_gap_bound(-1e-9, 1.0), std::invalid_argument);
}

TEST_CASE("delta_oracle_gap_bound is monotone in both arguments") {
  double prev = -1.0;
  for (double d : {0.0, 0.1, 0.5, 2.0, 7.0}) {
    const double b = delta_oracle_gap_bound(d, 3.0);
    CHECK(b >= prev);
    prev = b;
  }
  prev = -1.0;
  for (double L : {0.5, 1.0, 4.0, 16.0}) {
    const double b = delta_oracle_gap_bound(0.3, L);
    CHECK(b >= prev);
    prev = b;
  }
}

TEST_CASE("project_box clamps componentwise") {
  const BoxDomain unit(vec({0, 0}), vec({1, 1}));
  CHECK(project_box(vec({2, -1}), unit) == vec({1, 0}));
  CHECK(project_box(vec({0.5, 0.5}), unit) == vec({0.5, 0.5}));
  const BoxDomain seg(vec({-1}), vec({4}));
  CHECK(project_box(vec({-3}), seg) == vec({-1}));
  CHECK_THROWS_AS(project_box(vec({1, 2, 3}), unit), std::invalid_argument);
}

TEST_CASE("project_box is idempotent and nonexpansive") {
  Rng rng(7);
  const BoxDomain box(vec({-1, 0, 2}), vec({1, 3, 2.5}));
  for (int trial = 0; trial < 200; ++trial) {
    const Vector x = rng.uniform_vector(3, -5, 5);
    const Vector y = rng.uniform_vector(3, -5, 5);
    const Vector px = project_box(x, box);
    const Vector py = project_box(y, box);
    CHECK((project_box(px, box) - px).norm() == 0.0);
    CHECK((px - py).norm() <= (x - y).norm() + 1e-15);
  }
}

TEST_CASE("quadratic prox solves its optimality condition") {
  for (double mu : {0.5, 1.0, 3.0}) {
    const ProxFriendlyFn r = make_quadratic_prox(mu);
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const Vector c1 = rng.uniform_vector(4, -2, 2);
      const double c2 = rng.uniform(0.1, 4.0);
      const Vector x = r.prox_step(c1, c2);
      CHECK((x - Vector(-c1 / (mu + 2 * c2))).norm() <= 1e-10);
      // stationarity of <c1,x> + (mu/2)||x||^2 + c2||x||^2
      CHECK((c1 + mu * x + 2 * c2 * x).norm() <= 1e-10);
    }
  }
}

TEST_CASE("ball-constrained quadratic prox projects correctly") {
  const BallDomain ball(vec({0, 0}), 0.5);
  const ProxFriendlyFn r = make_quadratic_prox(1.0, ball);
  // Unconstrained solution far outside the ball lands on the boundary.
  const Vector x = r.prox_step(vec({-10, 0}), 1.0);
  CHECK(x.norm() == Catch::Approx(0.5));
  CHECK(x[0] > 0.0);
  // Interior solution is untouched.
  const Vector y = r.prox_step(vec({-0.3, 0}), 1.0);
  CHECK(y[0] == Catch::Approx(0.1));
}

TEST_CASE("box domain validates invariants") {
  CHECK_THROWS_AS(BoxDomain(vec({1, 0}), vec({0, 1})), std::invalid_argument);
  const BoxDomain b(vec({0, 0}), vec({3, 4}));
  CHECK(b.diameter() == Catch::Approx(5.0));
  CHECK(b.inscribed_radius() == Catch::Approx(1.5));
  CHECK(b.contains(vec({1, 1})));
  CHECK(!b.contains(vec({-1, 1})));
  const Vector w = b.separate(vec({-2, 2})); // violated facet x0 >= 0
  CHECK(w == vec({-1, 0}));
}

TEST_CASE("simplex domain projection") {
  const SimplexDomain tri(2, 1.0);
  CHECK(tri.contains(vec({0.2, 0.3})));
  CHECK(!tri.contains(vec({0.8, 0.5})));
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector x = rng.uniform_vector(2, -2, 2);
    const Vector p = tri.project(x);
    CHECK(tri.contains(p, 1e-12));
    // Projection optimality: no feasible point is closer.
    const Vector q = tri.project(rng.uniform_vector(2, -2, 2));
    CHECK((x - p).norm() <= (x - q).norm() + 1e-12);
  }
  // Interior fixed point.
  CHECK((tri.project(vec({0.1, 0.2})) - vec({0.1, 0.2})).norm() == 0.0);
}

TEST_CASE("rng streams are reproducible") {
  Rng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const double xa = a.uniform(-1, 1);
    all_equal = all_equal && xa == b.uniform(-1, 1);
    any_diff = any_diff || xa != c.uniform(-1, 1);
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("oracle mode invariants") {
  auto f = [](const Vector& x) { return std::make_pair(x.squaredNorm(), Vector(2 * x)); };
  CHECK_THROWS_AS(FirstOrderOracle(f, 0.1, OracleMode::exact),
                  std::invalid_argument);
  const FirstOrderOracle ok(f, 0.1, OracleMode::delta_subgradient);
  CHECK(ok.inexactness == 0.1);
}
