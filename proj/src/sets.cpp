#include "supermann/sets.hpp"

#include "supermann/errors.hpp"
#include "supermann/kernels.hpp"

#include <cmath>
#include <limits>

namespace supermann {

namespace {

template <class... Ts> struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string &what) {
  if (!ok)
    throw UsageError(what);
}

void require_dim(const ConvexSet &set, const Vector &x) {
  if (x.size() != set.dim())
    throw UsageError("dimension mismatch: set " + set.kind_name() + " has dimension " +
                     std::to_string(set.dim()) + ", point has " + std::to_string(x.size()));
}

Vector project_polyhedron(const sets::Polyhedron &p, const Vector &x) {
  const std::size_t faces = p.faces.size();
  if (faces > sets::Polyhedron::kMaxFaces)
    throw UsageError("polyhedron projection supports at most " +
                     std::to_string(sets::Polyhedron::kMaxFaces) + " faces");
  const double feas_tol = 1e-12 * (1.0 + x.lpNorm<Eigen::Infinity>());
  auto feasible = [&](const Vector &y) {
    for (const auto &f : p.faces)
      if (f.normal.dot(y) - f.offset > feas_tol * (1.0 + f.normal.norm()))
        return false;
    return true;
  };
  if (feasible(x))
    return x;
  // KKT enumeration over active sets in order of increasing size. The first
  // subset with nonnegative multipliers and a feasible point is the projection.
  const Index n = x.size();
  Vector best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t mask = 1; mask < (std::size_t{1} << faces); ++mask) {
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < faces; ++i)
      if (mask & (std::size_t{1} << i))
        active.push_back(i);
    if (static_cast<Index>(active.size()) > n)
      continue;
    const Index k = static_cast<Index>(active.size());
    Matrix V(k, n);
    Vector rhs(k);
    for (Index r = 0; r < k; ++r) {
      V.row(r) = p.faces[active[r]].normal.transpose();
      rhs[r] = p.faces[active[r]].normal.dot(x) - p.faces[active[r]].offset;
    }
    const Matrix gram = V * V.transpose();
    Eigen::FullPivLU<Matrix> lu(gram);
    if (lu.rank() < k)
      continue;
    const Vector mu = lu.solve(rhs);
    if ((mu.array() < -1e-14).any())
      continue;
    const Vector y = x - V.transpose() * mu;
    if (!feasible(y))
      continue;
    const double dist = (y - x).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = y;
    }
  }
  if (best.size() == 0)
    throw ConstructionError("polyhedron projection failed: set may be empty");
  return best;
}

} // namespace

Vector project_halfspace(const Vector &normal, double offset, const Vector &x) {
  const double violation = kernels::dot(normal, x) - offset;
  if (violation <= 0.0)
    return x;
  return x - (violation / kernels::squared_norm(normal)) * normal;
}

Vector project_soc(const Vector &x, double scale) {
  // Cone {(z,t): ||z|| <= c t} with c = 1/scale. Three cases: inside, inside
  // the polar cone, or projected onto the boundary ray through z.
  const Index n = x.size();
  const double c = 1.0 / scale;
  const auto z = x.head(n - 1);
  const double t = x[n - 1];
  const double nz = z.norm();
  if (nz <= c * t)
    return x;
  if (c * nz <= -t)
    return Vector::Zero(n);
  const double coef = (c * nz + t) / (1.0 + c * c);
  Vector out(n);
  out.head(n - 1) = (coef * c / nz) * z;
  out[n - 1] = coef;
  return out;
}

ConvexSet ConvexSet::box(Vector lo, Vector hi) {
  require(lo.size() == hi.size(), "box bounds must have equal length");
  require((lo.array() <= hi.array()).all(), "box requires lo <= hi");
  return ConvexSet(sets::Box{std::move(lo), std::move(hi)});
}

ConvexSet ConvexSet::ball(Vector center, double radius) {
  require(radius > 0.0, "ball radius must be positive");
  return ConvexSet(sets::Ball{std::move(center), radius});
}

ConvexSet ConvexSet::halfspace(Vector normal, double offset) {
  require(normal.size() > 0 && normal.norm() > 0.0, "halfspace normal must be nonzero");
  return ConvexSet(sets::Halfspace{std::move(normal), offset});
}

ConvexSet ConvexSet::hyperplane(Vector normal, double offset) {
  require(normal.size() > 0 && normal.norm() > 0.0, "hyperplane normal must be nonzero");
  return ConvexSet(sets::Hyperplane{std::move(normal), offset});
}

ConvexSet ConvexSet::nonneg_orthant(Index dim) {
  require(dim > 0, "orthant dimension must be positive");
  return ConvexSet(sets::NonnegOrthant{dim});
}

ConvexSet ConvexSet::second_order_cone(Index dim, double scale) {
  require(dim >= 2, "second-order cone needs dimension >= 2");
  require(scale > 0.0, "second-order cone scale must be positive");
  return ConvexSet(sets::SecondOrderCone{dim, scale});
}

ConvexSet ConvexSet::zero_cone(Index dim) {
  require(dim > 0, "zero cone dimension must be positive");
  return ConvexSet(sets::ZeroCone{dim});
}

ConvexSet ConvexSet::free_cone(Index dim) {
  require(dim > 0, "free cone dimension must be positive");
  return ConvexSet(sets::FreeCone{dim});
}

ConvexSet ConvexSet::polyhedron(std::vector<sets::Halfspace> faces) {
  require(!faces.empty(), "polyhedron needs at least one face");
  const Index n = faces.front().normal.size();
  for (const auto &f : faces)
    require(f.normal.size() == n && f.normal.norm() > 0.0,
            "polyhedron faces need nonzero normals of equal dimension");
  return ConvexSet(sets::Polyhedron{std::move(faces)});
}

ConvexSet ConvexSet::product(std::vector<ConvexSet> parts) {
  require(!parts.empty(), "product needs at least one factor");
  return ConvexSet(sets::Product{std::move(parts)});
}

Index ConvexSet::dim() const {
  return std::visit(
      overloaded{[](const sets::Box &s) { return s.lo.size(); },
                 [](const sets::Ball &s) { return s.center.size(); },
                 [](const sets::Halfspace &s) { return s.normal.size(); },
                 [](const sets::Hyperplane &s) { return s.normal.size(); },
                 [](const sets::NonnegOrthant &s) { return s.dim; },
                 [](const sets::SecondOrderCone &s) { return s.dim; },
                 [](const sets::ZeroCone &s) { return s.dim; },
                 [](const sets::FreeCone &s) { return s.dim; },
                 [](const sets::Polyhedron &s) { return s.faces.front().normal.size(); },
                 [](const sets::Product &s) {
                   Index d = 0;
                   for (const auto &p : s.parts)
                     d += p.dim();
                   return d;
                 }},
      value_);
}

std::string ConvexSet::kind_name() const {
  return std::visit(overloaded{[](const sets::Box &) { return "box"; },
                               [](const sets::Ball &) { return "ball"; },
                               [](const sets::Halfspace &) { return "halfspace"; },
                               [](const sets::Hyperplane &) { return "hyperplane"; },
                               [](const sets::NonnegOrthant &) { return "orthant"; },
                               [](const sets::SecondOrderCone &) { return "soc"; },
                               [](const sets::ZeroCone &) { return "zero"; },
                               [](const sets::FreeCone &) { return "free"; },
                               [](const sets::Polyhedron &) { return "polyhedron"; },
                               [](const sets::Product &) { return "product"; }},
                    value_);
}

Vector ConvexSet::project(const Vector &x) const {
  require_dim(*this, x);
  return std::visit(
      overloaded{
          [&](const sets::Box &s) { return kernels::clamp(x, s.lo, s.hi); },
          [&](const sets::Ball &s) -> Vector {
            const Vector diff = x - s.center;
            const double dist = diff.norm();
            if (dist <= s.radius)
              return x;
            return s.center + (s.radius / dist) * diff;
          },
          [&](const sets::Halfspace &s) { return project_halfspace(s.normal, s.offset, x); },
          [&](const sets::Hyperplane &s) -> Vector {
            const double gap = kernels::dot(s.normal, x) - s.offset;
            return x - (gap / kernels::squared_norm(s.normal)) * s.normal;
          },
          [&](const sets::NonnegOrthant &) -> Vector { return x.cwiseMax(0.0); },
          [&](const sets::SecondOrderCone &s) { return project_soc(x, s.scale); },
          [&](const sets::ZeroCone &s) -> Vector { return Vector::Zero(s.dim); },
          [&](const sets::FreeCone &) -> Vector { return x; },
          [&](const sets::Polyhedron &s) { return project_polyhedron(s, x); },
          [&](const sets::Product &s) -> Vector {
            Vector out(x.size());
            Index offset = 0;
            for (const auto &part : s.parts) {
              const Index d = part.dim();
              out.segment(offset, d) = part.project(x.segment(offset, d));
              offset += d;
            }
            return out;
          }},
      value_);
}

bool ConvexSet::contains(const Vector &x, double tol) const {
  require_dim(*this, x);
  return std::visit(
      overloaded{
          [&](const sets::Box &s) {
            return ((x - s.lo).array() >= -tol).all() && ((s.hi - x).array() >= -tol).all();
          },
          [&](const sets::Ball &s) { return (x - s.center).norm() <= s.radius + tol; },
          [&](const sets::Halfspace &s) { return s.normal.dot(x) <= s.offset + tol; },
          [&](const sets::Hyperplane &s) { return std::abs(s.normal.dot(x) - s.offset) <= tol; },
          [&](const sets::NonnegOrthant &) { return (x.array() >= -tol).all(); },
          [&](const sets::SecondOrderCone &s) {
            return s.scale * x.head(x.size() - 1).norm() <= x[x.size() - 1] + tol;
          },
          [&](const sets::ZeroCone &) { return x.lpNorm<Eigen::Infinity>() <= tol; },
          [&](const sets::FreeCone &) { return true; },
          [&](const sets::Polyhedron &s) {
            for (const auto &f : s.faces)
              if (f.normal.dot(x) > f.offset + tol)
                return false;
            return true;
          },
          [&](const sets::Product &s) {
            Index offset = 0;
            for (const auto &part : s.parts) {
              const Index d = part.dim();
              if (!part.contains(x.segment(offset, d), tol))
                return false;
              offset += d;
            }
            return true;
          }},
      value_);
}

} // namespace supermann
