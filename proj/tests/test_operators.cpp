#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "supermann/engine.hpp"
#include "supermann/errors.hpp"
#include "supermann/operators.hpp"
#include "supermann/problems.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace supermann;
using testutil::averaged_excess;
using testutil::nonexpansive_excess;
using testutil::residual_lipschitz_excess;

namespace {
Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v)
    out(i++) = x;
  return out;
}

std::shared_ptr<FunctionOperator> identity_op(Index n) {
  return std::make_shared<FunctionOperator>(n, 0.5, Metric::euclidean(n),
                                            [](const Vector &x) { return x; });
}

OptimalControl single_integrator(double x0, double q, double ulo, double uhi, double xlo,
                                 double xhi) {
  OptimalControl p;
  p.A = Matrix::Constant(1, 1, 1.0);
  p.B = Matrix::Constant(1, 1, 1.0);
  p.horizon = 1;
  p.x0 = vec({x0});
  p.q_diag = vec({q});
  p.u_lo = vec({ulo});
  p.u_hi = vec({uhi});
  p.x_lo = vec({xlo});
  p.x_hi = vec({xhi});
  return p;
}

ConeProgram random_lp(Rng &rng, Index m, Index n) {
  ConeProgram p;
  p.A = rng.normal_matrix(m, n);
  p.b = rng.normal_vector(m);
  p.c = rng.normal_vector(n);
  p.cone = {ConeBlock{ConeBlock::Kind::Orthant, m}};
  return p;
}

void check_averaged(const AveragedOperator &op, Rng &rng, int trials, double scale) {
  INFO(op.name());
  CHECK(nonexpansive_excess(op, rng, trials, scale) <= 1e-10);
  CHECK(averaged_excess(op, rng, trials, scale) <= 1e-10);
  CHECK(residual_lipschitz_excess(op, rng, trials, scale) <= 1e-10);
}
} // namespace

TEST_CASE("residual examples and evaluation counter") {
  auto id = identity_op(2);
  CHECK(id->residual(vec({4, -1})) == vec({0, 0}));
  FunctionOperator zero(2, 0.5, Metric::euclidean(2),
                        [](const Vector &x) { return Vector(Vector::Zero(x.size())); });
  CHECK(zero.residual(vec({2, 3})) == vec({2, 3}));
  auto proj = make_alternating_projections(ConvexSet::hyperplane(vec({1, 0}), 0.0),
                                           ConvexSet::free_cone(2));
  CHECK(proj->residual(vec({2, 5})) == vec({2, 0}));

  CHECK(zero.evaluations() == 1);
  zero.apply(vec({1, 1}));
  CHECK(zero.evaluations() == 2);
  zero.reset_counters();
  CHECK(zero.evaluations() == 0);
  CHECK_THROWS_AS(zero.apply(vec({1, 2, 3})), UsageError);
}

TEST_CASE("relax") {
  auto id = identity_op(2);
  const Vector x = vec({2, 0}), Tx = vec({0, 0});
  CHECK(id->relax(x, Tx, 0.0) == x);
  CHECK(id->relax(x, Tx, 1.0) == Tx);
  CHECK(id->relax(x, Tx, 0.5) == vec({1, 0}));
  CHECK(id->relax(x, Tx, 2.0) == vec({-2, 0})); // 1/alpha = 2 allowed
  CHECK_THROWS_AS(id->relax(x, Tx, 2.5), UsageError);
  CHECK_THROWS_AS(id->relax(x, Tx, -0.1), UsageError);
}

TEST_CASE("averagedness of compositions") {
  CHECK(compose_averagedness(0.5, 0.5) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(compose_averagedness(1.0, 0.5) == 1.0);
  CHECK_THROWS_AS(compose_averagedness(0.0, 0.5), UsageError);
}

TEST_CASE("power iteration finds the largest eigenvalue") {
  Rng rng(2);
  const Matrix M = rng.normal_matrix(20, 12);
  const Matrix G = M.transpose() * M;
  const double est = power_iteration([&](const Vector &v) { return Vector(G * v); }, 12);
  const double exact = Eigen::SelfAdjointEigenSolver<Matrix>(G).eigenvalues().maxCoeff();
  CHECK(est == doctest::Approx(exact).epsilon(1e-6));
  CHECK(est <= exact * (1 + 1e-12));
}

TEST_CASE("alternating projections") {
  const auto h = ConvexSet::halfspace(vec({1, 1}), 1.0);
  auto same = make_alternating_projections(h, h);
  CHECK(same->apply(vec({0.2, 0.3})) == vec({0.2, 0.3}));
  CHECK(same->alpha() == doctest::Approx(2.0 / 3.0));

  ProblemInstance cones = build_cones_example();
  const auto &ap = dynamic_cast<const AlternatingProjections &>(*cones.op);
  const Vector x = vec({1, 0.15});
  CHECK(ap.first().project(x) == x);
  const Vector v = vec({0.3, -1});
  const Vector expected = x - (v.dot(x) / v.squaredNorm()) * v;
  CHECK((cones.op->apply(x) - expected).norm() <= 1e-15);
  CHECK(cones.op->residual(x).norm() > 0.1);
  CHECK(cones.op->residual(Vector::Zero(2)).norm() == 0.0);

  Rng rng(41);
  check_averaged(*cones.op, rng, 500, 2.0);
  check_averaged(*build_ball_line_example().op, rng, 500, 2.0);
  check_averaged(*build_soc_example().op, rng, 500, 2.0);
}

TEST_CASE("Douglas-Rachford cone operator") {
  Rng rng(43);
  auto drs = make_drs(random_lp(rng, 6, 4));
  CHECK(drs->alpha() == 0.5);
  CHECK(nonexpansive_excess(*drs, rng, 100, 3.0) <= 1e-10);
  CHECK(averaged_excess(*drs, rng, 100, 3.0) <= 1e-10);
  CHECK(residual_lipschitz_excess(*drs, rng, 100, 3.0) <= 1e-10);

  const Matrix Q = drs->embedding_matrix();
  for (int t = 0; t < 50; ++t) {
    const Vector u = rng.normal_vector(Q.rows());
    CHECK(std::abs(u.dot(Q * u)) <= 1e-10 * u.squaredNorm());
  }

  drs->reset_counters();
  drs->apply(rng.normal_vector(drs->dim()));
  CHECK(drs->evaluations() == 1);
  CHECK(drs->cost() == 1);
  CHECK(drs->cost_counter() == "linear_solves");

  ProblemInstance cp = build_cone_program(20, 10, 1.0, 10.0, 3);
  REQUIRE(!cp.known_fixed_points.empty());
  CHECK(cp.op->residual(cp.known_fixed_points.front()).norm() <= 1e-10);
}

TEST_CASE("forward-backward lasso") {
  Lasso one{Matrix::Identity(1, 1), vec({5}), 1.0};
  auto fbs = make_fbs(one, 1.0 / lasso_lipschitz(one.A));
  CHECK(fbs->lipschitz() == doctest::Approx(kNormInflation));
  auto fbs1 = std::make_shared<ForwardBackwardLasso>(one, 1.0, 1.0);
  CHECK(fbs1->apply(vec({5}))(0) == 4.0);
  CHECK(fbs1->residual(vec({5}))(0) == 1.0);
  CHECK(soft_threshold(3, 1) == 2.0);
  CHECK(soft_threshold(-0.5, 1) == 0.0);
  CHECK_THROWS_AS(make_fbs(one, 3.0), UsageError);
  CHECK_THROWS_AS(make_fbs(one, 0.0), UsageError);

  Lasso zero_b{Matrix::Identity(3, 3), Vector::Zero(3), 0.1};
  CHECK(make_fbs(zero_b, 1.0 / lasso_lipschitz(zero_b.A))->apply(Vector::Zero(3)) ==
        Vector::Zero(3));

  ProblemInstance lasso = build_lasso(30, 60, 0.05, 9);
  auto &op = dynamic_cast<ForwardBackwardLasso &>(*lasso.op);
  CHECK(op.alpha() == doctest::Approx(compose_averagedness(op.gamma() * op.lipschitz() / 2, 0.5)));
  Rng rng(47);
  check_averaged(op, rng, 300, 1.0);
  op.reset_counters();
  op.apply(Vector::Zero(60));
  CHECK(op.evaluations() == 1);
  CHECK(op.cost() == 2); // one product with A and one with A^T
}

TEST_CASE("Vu-Condat: stepsizes, metric and averagedness") {
  ProblemInstance masses = build_oscillating_masses(2, 5, 3);
  auto &vc = dynamic_cast<VuCondat &>(*masses.op);
  const auto &st = vc.steps();
  CHECK(st.tau == doctest::Approx(1.0 / st.grad_lipschitz));
  CHECK(st.sigma < (1.0 / st.tau - st.grad_lipschitz / 2.0) / st.L_norm_sq);
  CHECK(vc.alpha() == doctest::Approx(VuCondat::averagedness(st)));
  CHECK(vc.alpha() < 1.0);

  const OptimalControl &prob = vc.problem();
  CHECK_THROWS_AS(make_vu_condat(prob, 2.5 / st.grad_lipschitz, st.sigma), UsageError);
  CHECK_THROWS_AS(make_vu_condat(prob, st.tau, 10.0 * st.sigma / 0.9), UsageError);

  Rng rng(53);
  const auto &metric = vc.metric();
  REQUIRE(metric.kind() == Metric::Kind::OperatorInduced);
  for (int t = 0; t < 1000; ++t) {
    const Vector z = rng.normal_vector(vc.dim());
    CHECK(metric.squared_norm(z) > 0.0);
  }
  for (int t = 0; t < 100; ++t) {
    const Vector u = rng.normal_vector(vc.dim()), w = rng.normal_vector(vc.dim());
    CHECK(std::abs(metric.inner(u, w) - metric.inner(w, u)) <=
          1e-12 * metric.norm(u) * metric.norm(w));
  }
  // averagedness in the P metric with the default constant
  check_averaged(vc, rng, 300, 5.0);

  vc.reset_counters();
  vc.apply(Vector::Zero(vc.dim()));
  CHECK(vc.evaluations() == 1);
  CHECK(vc.cost_counter() == "L_calls");
  CHECK(vc.cost() > 0);
}

TEST_CASE("Vu-Condat with zero initial state has the origin as a fixed point") {
  MassesOptions o;
  o.K = 1;
  o.N = 4;
  o.initial_state = Vector::Zero(4);
  ProblemInstance inst = build_oscillating_masses(o);
  CHECK(inst.op->residual(Vector::Zero(inst.op->dim())).norm() == 0.0);
}

TEST_CASE("Vu-Condat fixed point solves a one-state problem (brute-force oracle)") {
  struct Case {
    double x0, q, ulo, uhi, xlo, xhi;
  };
  const Case cases[] = {
      {3.0, 1.0, -5.0, 5.0, -1.0, 1.0}, // state bound active: u* = -2
      {1.0, 2.0, -5.0, 5.0, -4.0, 4.0}, // interior optimum u* = -x0 q/(1+q)
      {4.0, 1.0, -0.5, 5.0, -9.0, 9.0}, // input bound active
  };
  for (const auto &c : cases) {
    const OptimalControl p = single_integrator(c.x0, c.q, c.ulo, c.uhi, c.xlo, c.xhi);
    // oracle: minimize 1/2 q (x0+u)^2 + 1/2 u^2 over the feasible u-interval
    const double lo = std::max(c.ulo, c.xlo - c.x0), hi = std::min(c.uhi, c.xhi - c.x0);
    double a = lo, b = hi;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      (c.q * (c.x0 + mid) + mid > 0 ? b : a) = mid;
    }
    const double u_star = 0.5 * (a + b);

    auto op = make_vu_condat(p);
    SolverConfig cfg;
    cfg.tol_rel = 0.0;
    cfg.tol_abs = 1e-13;
    cfg.max_iters = 200000;
    const SolveResult r = km_solve(*op, Vector::Zero(2), constant_lambda(1.0), cfg);
    CHECK(r.summary.status == Status::Converged);
    CHECK(std::abs(r.x(0) - u_star) <= 1e-6);
  }
}

TEST_CASE("counters are thread-safe") {
  auto id = identity_op(3);
#pragma omp parallel for
  for (int i = 0; i < 1000; ++i)
    id->apply(Vector::Ones(3));
  CHECK(id->evaluations() == 1000);
}
