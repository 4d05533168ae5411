#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "supermann/directions.hpp"
#include "supermann/errors.hpp"
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

Vector unit(Index n, Index i) { return Vector::Unit(n, i); }

/// Direct (non-inverse) form of the modified update:
/// B+ = B + (y~ - B s) s^T / ||s||^2.
Matrix broyden_B_update(const Matrix &B, const Vector &s, const Vector &y, double theta_bar) {
  const double gamma = B.partialPivLu().solve(y).dot(s) / s.squaredNorm();
  const double theta = powell_theta(gamma, theta_bar);
  const Vector y_t = (1 - theta) * (B * s) + theta * y;
  return B + (y_t - B * s) * s.transpose() / s.squaredNorm();
}
} // namespace

TEST_CASE("Powell's theta") {
  CHECK(powell_theta(0.5, 0.2) == 1.0);
  CHECK(powell_theta(0.0, 0.2) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(powell_theta(-0.1, 0.2) == doctest::Approx(1.2 / 1.1).epsilon(1e-15));
  CHECK(powell_theta(1.0, 0.2) == 1.0);
  Rng rng(73);
  for (int t = 0; t < 10000; ++t) {
    const double gamma = rng.uniform(-3.0, 3.0), tb = rng.uniform(0.01, 0.99);
    const double th = powell_theta(gamma, tb);
    CHECK(std::abs(1 - th + th * gamma) >= tb - 1e-12);
  }
  CHECK_THROWS_AS(powell_theta(0.5, 0.0), UsageError);
  CHECK_THROWS_AS(powell_theta(0.5, 1.0), UsageError);
}

TEST_CASE("full Broyden update by hand") {
  auto st = BroydenFullState::identity(3);
  CHECK(broyden_full_update(st, unit(3, 0), unit(3, 0)) == UpdateStatus::Applied);
  CHECK(st.H == Matrix::Identity(3, 3));

  st = BroydenFullState::identity(3);
  broyden_full_update(st, unit(3, 0), 2.0 * unit(3, 0));
  Matrix expected = Matrix::Identity(3, 3);
  expected(0, 0) = 0.5;
  CHECK((st.H - expected).norm() <= 1e-15);
  CHECK((st.H * unit(3, 0) - 0.5 * unit(3, 0)).norm() <= 1e-15);

  const Matrix before = st.H;
  CHECK(broyden_full_update(st, Vector::Zero(3), unit(3, 1)) == UpdateStatus::SkippedDegenerate);
  CHECK(st.H == before);
}

TEST_CASE("full Broyden direction") {
  BroydenFullState st = BroydenFullState::identity(2);
  CHECK(broyden_full_direction(st, vec({1, -2})) == vec({-1, 2}));
  CHECK(broyden_full_direction(st, Vector::Zero(2)) == Vector::Zero(2));
  st.H = vec({2, 1}).asDiagonal();
  CHECK(broyden_full_direction(st, vec({1, 1})) == vec({-2, -1}));
}

TEST_CASE("inverse update matches the explicit inverse of the direct update") {
  Rng rng(79);
  for (Index n : {5, 8}) {
    for (int trial = 0; trial < 100; ++trial) {
      const Matrix B0 = Matrix::Identity(n, n) + 0.3 * rng.normal_matrix(n, n);
      BroydenFullState st{B0.inverse(), 0.2};
      Matrix B = B0;
      for (int u = 0; u < 3; ++u) {
        const Vector s = rng.normal_vector(n), y = rng.normal_vector(n);
        // y~ computed from the state before the update, for the secant check
        const double gamma = (st.H * y).dot(s) / s.squaredNorm();
        const double theta = powell_theta(gamma, st.theta_bar);
        const Vector y_t = (1 - theta) * (B * s) + theta * y;
        broyden_full_update(st, s, y);
        B = broyden_B_update(B, s, y, 0.2);
        CHECK((st.H * B - Matrix::Identity(n, n)).norm() <= 1e-10 * std::max(1.0, B.norm()));
        CHECK((st.H * y_t - s).norm() <= 1e-10 * s.norm());
      }
    }
  }
}

TEST_CASE("restarted Broyden: first pair with s = y") {
  BroydenRestartedState st;
  const Vector s = vec({1, 2, 3}), Rx = vec({0.5, -1, 2});
  const auto r = rbroyden_direction(st, s, s, Rx);
  CHECK(r.status == UpdateStatus::Applied);
  CHECK(r.d == -Rx);
  REQUIRE(st.S.size() == 1);
  REQUIRE(st.S_tilde.size() == 1);
  CHECK(st.S[0] == s);
  CHECK(st.S_tilde[0].norm() == 0.0);
}

TEST_CASE("restarted Broyden: buffers reset when full, stay equal in length") {
  Rng rng(83);
  BroydenRestartedState st;
  st.memory = 3;
  for (int call = 1; call <= 9; ++call) {
    const bool full = static_cast<int>(st.S.size()) == st.memory;
    rbroyden_direction(st, rng.normal_vector(4), rng.normal_vector(4), rng.normal_vector(4));
    CHECK(st.S.size() == st.S_tilde.size());
    CHECK(static_cast<int>(st.S.size()) <= st.memory);
    if (full)
      CHECK(st.S.empty());
  }
  // degenerate pair: no change, direction from the buffers alone
  const auto before = st.S.size();
  const Vector Rx = rng.normal_vector(4);
  const auto r = rbroyden_direction(st, Vector::Zero(4), rng.normal_vector(4), Rx);
  CHECK(r.status == UpdateStatus::SkippedDegenerate);
  CHECK(st.S.size() == before);
  CHECK(r.d == rbroyden_apply(st, Rx));
}

TEST_CASE("restarted and full Broyden agree within one restart window") {
  Rng rng(89);
  const Index n = 20;
  const Matrix M = Matrix::Identity(n, n) + 0.2 * rng.normal_matrix(n, n);
  const Vector c = rng.normal_vector(n);
  auto R = [&](const Vector &x) { return Vector(M * x + c); };

  BroydenFullState full = BroydenFullState::identity(n);
  BroydenRestartedState rest;
  rest.memory = 10;
  Vector x = rng.normal_vector(n), Rx = R(x);
  Vector d = broyden_full_direction(full, Rx);
  for (int k = 0; k < 10; ++k) {
    const Vector w = x + d, Rw = R(w);
    const Vector s = w - x, y = Rw - Rx;
    broyden_full_update(full, s, y);
    const Vector d_full = broyden_full_direction(full, Rw);
    const Vector d_rest = rbroyden_direction(rest, s, y, Rw).d;
    CHECK((d_full - d_rest).norm() <= 1e-8 * d_full.norm());
    x = w;
    Rx = Rw;
    d = d_full;
  }
}

TEST_CASE("truncation") {
  const Metric e = Metric::euclidean(2);
  const Vector d = vec({0.6, 0.8});
  CHECK(truncate(d, 2.0, 1.0, e) == d);
  CHECK((truncate(vec({3, 4}), 1.0, 1.0, e) - vec({0.6, 0.8})).norm() <= 1e-15);
  CHECK(truncate(vec({3, 4}), 0.0, 1e4, e) == Vector::Zero(2));
  CHECK_THROWS_AS(truncate(d, 1.0, 0.0, e), UsageError);
  Rng rng(97);
  for (int t = 0; t < 1000; ++t) {
    const Vector v = rng.normal_vector(3) * rng.uniform(0.0, 100.0);
    const double nr = rng.uniform(0.0, 2.0), D = rng.uniform(0.1, 10.0);
    CHECK(truncate(v, nr, D, Metric::euclidean(3)).norm() <= D * nr + 1e-12);
  }
}

TEST_CASE("zero direction and degenerate steps") {
  CHECK(zero_direction(vec({1, 2})) == Vector::Zero(2));
  CHECK(degenerate_step(vec({1e-15, 0})));
  CHECK_FALSE(degenerate_step(vec({1e-13, 0})));
  CHECK(degenerate_step(vec({1e-10, 0}), 1e5));
}

TEST_CASE("providers") {
  CHECK(direction_kind_from_name("zero") == DirectionKind::Zero);
  CHECK(direction_kind_name(DirectionKind::RestartedBroyden) == "rbroyden");
  CHECK_THROWS_AS(direction_kind_from_name("lbfgs"), UsageError);

  auto zero = make_direction_provider(DirectionKind::Zero, 3);
  CHECK(zero->direction(vec({1, 2, 3})) == Vector::Zero(3));

  auto full = make_direction_provider(DirectionKind::Broyden, 2);
  CHECK(full->name() == "broyden");
  CHECK(full->direction(vec({1, 1})) == vec({-1, -1}));
  full->observe(vec({1, 0}), vec({2, 0}));
  CHECK(full->direction(vec({1, 1})) == vec({-0.5, -1}));
  full->observe(vec({0, 0}), vec({1, 0}));
  CHECK(full->skipped_updates() == 1);
  full->reset();
  CHECK(full->direction(vec({1, 1})) == vec({-1, -1}));

  auto rb = make_direction_provider(DirectionKind::RestartedBroyden, 2, 5);
  CHECK(rb->direction(vec({1, 1})) == vec({-1, -1}));
  rb->observe(vec({1, 0}), vec({2, 0}));
  CHECK((rb->direction(vec({1, 1})) - vec({-0.5, -1})).norm() <= 1e-15);
  CHECK_THROWS_AS(RestartedBroyden(0), UsageError);
}
