#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "supermann/errors.hpp"
#include "supermann/rng.hpp"
#include "supermann/sets.hpp"

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

// Independent oracle: the nearest cone point lies on the ray through the
// z-part of x (or is x itself, or 0), so a 1-D search over the boundary
// radius is enough.
Vector soc_oracle(const Vector &x, double scale) {
  const Index n = x.size() - 1;
  const Vector z = x.head(n);
  const double t = x(n);
  if (scale * z.norm() <= t)
    return x;
  const Vector dir = z.norm() > 0 ? Vector(z / z.norm()) : Vector(Vector::Zero(n));
  auto point = [&](double r) {
    Vector y(n + 1);
    y.head(n) = r * dir;
    y(n) = scale * r;
    return y;
  };
  // bisection on the sign of the derivative of ||point(r) - x||^2
  Vector tangent(n + 1);
  tangent.head(n) = dir;
  tangent(n) = scale;
  auto slope = [&](double r) { return (point(r) - x).dot(tangent); };
  double a = 0.0, b = 10.0 * (x.norm() + 1.0);
  for (int it = 0; it < 200; ++it) {
    const double c = 0.5 * (a + b);
    (slope(c) > 0 ? b : a) = c;
  }
  return point(0.5 * (a + b));
}

// Independent oracle for an intersection of halfspaces: Dykstra's algorithm.
Vector dykstra(const std::vector<sets::Halfspace> &faces, const Vector &x, int iters = 20000) {
  Vector y = x;
  std::vector<Vector> inc(faces.size(), Vector::Zero(x.size()));
  for (int it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < faces.size(); ++i) {
      const Vector before = y + inc[i];
      y = project_halfspace(faces[i].normal, faces[i].offset, before);
      inc[i] = before - y;
    }
  }
  return y;
}

std::vector<ConvexSet> random_sets(Rng &rng, Index n) {
  const Vector lo = rng.uniform_vector(n, -1.0, 0.0);
  const Vector hi = lo + rng.uniform_vector(n, 0.0, 2.0);
  std::vector<ConvexSet> out{
      ConvexSet::box(lo, hi),
      ConvexSet::ball(rng.normal_vector(n), rng.uniform(0.5, 2.0)),
      ConvexSet::halfspace(rng.normal_vector(n), rng.normal()),
      ConvexSet::hyperplane(rng.normal_vector(n), rng.normal()),
      ConvexSet::nonneg_orthant(n),
      ConvexSet::second_order_cone(n, rng.uniform(0.2, 3.0)),
      ConvexSet::zero_cone(n),
      ConvexSet::free_cone(n),
  };
  if (n >= 3)
    out.push_back(ConvexSet::product(
        {ConvexSet::nonneg_orthant(1), ConvexSet::second_order_cone(n - 1)}));
  std::vector<sets::Halfspace> faces;
  for (int i = 0; i < 3; ++i)
    faces.push_back({rng.normal_vector(n), rng.uniform(0.1, 1.0)}); // contains 0
  out.push_back(ConvexSet::polyhedron(faces));
  return out;
}
} // namespace

TEST_CASE("projection examples") {
  const auto h = ConvexSet::halfspace(vec({1, 0}), 0.0);
  CHECK(h.project(vec({2, 3})) == vec({0, 3}));
  CHECK(h.project(vec({-1, 3})) == vec({-1, 3}));

  const auto soc = ConvexSet::second_order_cone(3);
  const Vector p = soc.project(vec({3, 4, 0}));
  CHECK((p - vec({1.5, 2.0, 2.5})).norm() <= 1e-14);
  CHECK((p - soc_oracle(vec({3, 4, 0}), 1.0)).norm() <= 1e-9);
}

TEST_CASE("second-order cone projection: three cases and oracle") {
  const auto soc = ConvexSet::second_order_cone(3);
  CHECK(soc.project(vec({1, 0, 2})) == vec({1, 0, 2}));  // inside
  CHECK(soc.project(vec({1, 0, -2})) == vec({0, 0, 0})); // polar cone
  Rng rng(17);
  for (int t = 0; t < 200; ++t) {
    const double scale = rng.uniform(0.05, 4.0);
    const Vector x = rng.normal_vector(4) * 3.0;
    const Vector got = project_soc(x, scale);
    CHECK((got - soc_oracle(x, scale)).norm() <= 1e-8 * (1 + x.norm()));
    CHECK(ConvexSet::second_order_cone(4, scale).contains(got, 1e-12));
  }
}

TEST_CASE("polyhedron projection matches Dykstra") {
  Rng rng(23);
  for (int t = 0; t < 50; ++t) {
    std::vector<sets::Halfspace> faces;
    for (int i = 0; i < 4; ++i)
      faces.push_back({rng.normal_vector(3), rng.uniform(0.0, 1.0)});
    const auto poly = ConvexSet::polyhedron(faces);
    const Vector x = 3.0 * rng.normal_vector(3);
    CHECK((poly.project(x) - dykstra(faces, x)).norm() <= 1e-8);
  }
}

TEST_CASE("box, ball, hyperplane and cones by hand") {
  CHECK(ConvexSet::box(vec({0, 0}), vec({1, 1})).project(vec({2, -1})) == vec({1, 0}));
  CHECK((ConvexSet::ball(vec({0, 0}), 1.0).project(vec({3, 4})) - vec({0.6, 0.8})).norm() <=
        1e-15);
  CHECK(ConvexSet::hyperplane(vec({1, 0}), 1.0).project(vec({0, 0})) == vec({1, 0}));
  CHECK(ConvexSet::nonneg_orthant(2).project(vec({-1, 2})) == vec({0, 2}));
  CHECK(ConvexSet::zero_cone(2).project(vec({-1, 2})) == vec({0, 0}));
  CHECK(ConvexSet::free_cone(2).project(vec({-1, 2})) == vec({-1, 2}));
}

TEST_CASE("invalid sets and dimensions") {
  CHECK_THROWS_AS(ConvexSet::box(vec({1}), vec({0})), UsageError);
  CHECK_THROWS_AS(ConvexSet::ball(vec({0}), 0.0), UsageError);
  CHECK_THROWS_AS(ConvexSet::halfspace(vec({0, 0}), 1.0), UsageError);
  CHECK_THROWS_AS(ConvexSet::second_order_cone(1), UsageError);
  CHECK_THROWS_AS(ConvexSet::nonneg_orthant(2).project(vec({1, 2, 3})), UsageError);
}

TEST_CASE("idempotence, firm nonexpansiveness, membership") {
  Rng rng(29);
  for (Index n : {2, 3, 7}) {
    for (const auto &set : random_sets(rng, n)) {
      INFO(set.kind_name());
      for (int t = 0; t < 200; ++t) {
        const Vector x = 3.0 * rng.normal_vector(n), y = 3.0 * rng.normal_vector(n);
        const Vector px = set.project(x), py = set.project(y);
        CHECK((set.project(px) - px).norm() <= 1e-12 * (1 + px.norm()));
        CHECK((px - py).squaredNorm() <= (px - py).dot(x - y) + 1e-10);
        CHECK(set.contains(px, 1e-9));
      }
    }
  }
}

TEST_CASE("Moreau decomposition for self-dual cones") {
  Rng rng(31);
  const ConvexSet cones[] = {ConvexSet::nonneg_orthant(5), ConvexSet::second_order_cone(5),
                             ConvexSet::product({ConvexSet::nonneg_orthant(2),
                                                 ConvexSet::second_order_cone(3)})};
  for (const auto &K : cones) {
    for (int t = 0; t < 500; ++t) {
      const Vector x = 2.0 * rng.normal_vector(5);
      const Vector pos = K.project(x), neg = -K.project(-x);
      CHECK((pos + neg - x).norm() <= 1e-12 * (1 + x.norm()));
      CHECK(std::abs(pos.dot(neg)) <= 1e-12 * (1 + x.squaredNorm()));
    }
  }
}

TEST_CASE("halfspace formula") {
  const Vector v = vec({1, 2}), x = vec({3, 3});
  const Vector p = project_halfspace(v, 1.0, x);
  const Vector expected = x - (v.dot(x) - 1.0) / v.squaredNorm() * v;
  CHECK((p - expected).norm() <= 1e-15);
}
