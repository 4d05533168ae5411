#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "supermann/gkm.hpp"
#include "supermann/operators.hpp"
#include "supermann/problems.hpp"
#include "supermann/rng.hpp"

#include <cmath>

using namespace supermann;

namespace {
Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v)
    out(i++) = x;
  return out;
}

ConvexSet random_set(Rng &rng, Index n) {
  switch (rng.below(3)) {
  case 0: {
    const Vector lo = rng.uniform_vector(n, -1.0, 0.5);
    return ConvexSet::box(lo, lo + rng.uniform_vector(n, 0.0, 2.0));
  }
  case 1:
    return ConvexSet::ball(rng.normal_vector(n), rng.uniform(0.1, 2.0));
  default:
    return ConvexSet::halfspace(rng.normal_vector(n), rng.normal());
  }
}
} // namespace

TEST_CASE("worked projection example") {
  // T = projection onto {x1 = 0}, alpha = 1/2
  const Metric e = Metric::euclidean(2);
  const Vector x = vec({2, 0}), w = vec({1, 1}), Rw = vec({1, 0});
  const double rho = separation_rho(x, w, Rw, 0.5, e);
  CHECK(rho == 2.0);
  CHECK(accepts(rho, 1.0, 1.0, 0.1));
  CHECK(gkm_update(x, w, Rw, rho, 1.0, e) == vec({0, 0}));
}

TEST_CASE("rho special cases") {
  const Metric e = Metric::euclidean(2);
  const Vector x = vec({1, 2}), Rx = vec({0.5, -1});
  CHECK(separation_rho(x, x, Rx, 0.7, e) == doctest::Approx(Rx.squaredNorm()).epsilon(1e-15));
  CHECK(separation_rho(x, vec({3, 3}), Vector::Zero(2), 0.7, e) == 0.0);
  CHECK(accepts(Rx.squaredNorm(), Rx.norm(), Rx.norm(), 0.99));
  CHECK_FALSE(accepts(0.0, 1.0, 1.0, 0.1));
}

TEST_CASE("gkm update special cases") {
  const Metric e = Metric::euclidean(2);
  const Vector x = vec({1, 2}), w = vec({0, 1}), Rw = vec({1, 1});
  CHECK(gkm_update(x, w, Rw, -1.0, 1.0, e) == x);
  CHECK(gkm_update(x, w, Rw, 0.0, 1.0, e) == x);
  CHECK(gkm_update(x, w, Vector::Zero(2), 3.0, 1.0, e) == x);

  // d = 0 recovers the relaxed operator
  ProblemInstance cones = build_cones_example();
  const auto &op = *cones.op;
  const Vector x0 = vec({1, 0.15});
  const Vector Tx = op.apply(x0), Rx = x0 - Tx;
  for (double lam : {0.3, 1.0, 1.4}) {
    const double rho = separation_rho(x0, x0, Rx, op.alpha(), op.metric());
    const Vector got = gkm_update(x0, x0, Rx, rho, lam, op.metric());
    CHECK((got - op.relax(x0, Tx, lam)).norm() <= 1e-15);
  }
}

TEST_CASE("candidate bookkeeping") {
  const Metric e = Metric::euclidean(2);
  const auto c = make_candidate(vec({2, 0}), vec({1, 1}), vec({1, 0}), 2.0, 0.5, e);
  CHECK(c.rho == separation_rho(c.x, c.w, c.Rw, 0.5, e));
  CHECK(c.norm_Rw == 1.0);
  CHECK_FALSE(c.is_fixed_point());
  CHECK(make_candidate(vec({2, 0}), vec({0, 1}), vec({0, 0}), 2.0, 0.5, e).is_fixed_point());
}

TEST_CASE("Fejer decrease and fixed points inside C_w on the planar and conic examples") {
  Rng rng(61);
  const ProblemInstance examples[] = {build_cones_example(), build_ball_line_example(),
                                      build_soc_example()};
  long tested = 0;
  for (const auto &inst : examples) {
    const auto &op = *inst.op;
    const double a = op.alpha();
    for (int t = 0; t < 2000; ++t) {
      const Vector x = 2.0 * rng.normal_vector(op.dim());
      const Vector d = rng.normal_vector(op.dim());
      const double tau = rng.uniform(0.0, 2.0);
      const double lam = rng.uniform(0.01, 1.0 / a - 0.01);
      const Vector w = x + tau * d, Rw = op.residual(w);
      const double rho = separation_rho(x, w, Rw, a, op.metric());
      for (const Vector &z : inst.known_fixed_points) {
        CHECK(Rw.squaredNorm() - 2 * a * Rw.dot(w - z) <= 1e-10);
        if (rho > 0 && Rw.squaredNorm() > 0) {
          const Vector xp = gkm_update(x, w, Rw, rho, lam, op.metric());
          const double lhs = (xp - z).squaredNorm();
          const double rhs = (x - z).squaredNorm() -
                             lam * (1 / a - lam) * rho * rho / Rw.squaredNorm() +
                             1e-10 * (x - z).squaredNorm();
          CHECK(lhs <= rhs);
          ++tested;
        }
      }
    }
  }
  CHECK(tested > 1000);
}

TEST_CASE("full-length update is the projection onto the separating halfspace") {
  Rng rng(67);
  ProblemInstance inst = build_soc_example();
  const auto &op = *inst.op;
  const double a = op.alpha();
  for (int t = 0; t < 500; ++t) {
    const Vector x = 2.0 * rng.normal_vector(3), w = x + rng.normal_vector(3);
    const Vector Rw = op.residual(w);
    const double rho = separation_rho(x, w, Rw, a, op.metric());
    if (!(rho > 0))
      continue;
    const Vector normal = 2 * a * Rw;
    const double offset = 2 * a * Rw.dot(w) - Rw.squaredNorm();
    const Vector proj = project_halfspace(normal, offset, x);
    const Vector upd = gkm_update(x, w, Rw, rho, 1.0 / (2 * a), op.metric());
    CHECK((upd - proj).norm() <= 1e-12 * (1 + x.norm()));
  }
}

TEST_CASE("line-search guarantee for small steps on random projections") {
  Rng rng(71);
  long failures = 0, trials = 0;
  for (int t = 0; t < 1000; ++t) {
    const Index n = 2 + static_cast<Index>(rng.below(9));
    auto op = make_alternating_projections(random_set(rng, n), ConvexSet::free_cone(n));
    op->set_alpha(0.5); // a single projection is firmly nonexpansive
    const Vector x = 3.0 * rng.normal_vector(n);
    const Vector Rx = op->residual(x);
    if (Rx.norm() == 0)
      continue;
    const Vector d = rng.normal_vector(n) * rng.uniform(0.01, 10.0);
    for (double sigma : {0.0, 0.1, 0.9}) {
      const double tau_max = (1 - sigma) * Rx.norm() / (4 * 0.5 * d.norm());
      for (double frac : {1.0, 0.5, rng.uniform(0.0, 1.0)}) {
        const Vector w = x + frac * tau_max * d, Rw = op->residual(w);
        const double rho = separation_rho(x, w, Rw, 0.5, op->metric());
        failures += !accepts(rho, Rw.norm(), Rx.norm(), sigma);
        ++trials;
      }
    }
  }
  CHECK(trials > 2500);
  CHECK(failures == 0);
}
