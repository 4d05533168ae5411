#pragma once

#include "supermann/space.hpp"

#include <string>
#include <variant>
#include <vector>

namespace supermann {

class ConvexSet;

namespace sets {

/// {x : lo <= x <= hi} componentwise.
struct Box {
  Vector lo, hi;
};
/// {x : ||x - center|| <= radius}.
struct Ball {
  Vector center;
  double radius;
};
/// {x : <normal, x> <= offset}.
struct Halfspace {
  Vector normal;
  double offset;
};
/// {x : <normal, x> = offset}.
struct Hyperplane {
  Vector normal;
  double offset;
};
struct NonnegOrthant {
  Index dim;
};
/// {(z, t) : scale * ||z|| <= t}, with t the last coordinate.
struct SecondOrderCone {
  Index dim;
  double scale = 1.0;
};
/// {0}.
struct ZeroCone {
  Index dim;
};
/// The whole space.
struct FreeCone {
  Index dim;
};
/// Intersection of a few halfspaces, projected exactly by active-set
/// enumeration (supports at most kMaxFaces faces).
struct Polyhedron {
  static constexpr std::size_t kMaxFaces = 10;
  std::vector<Halfspace> faces;
};
/// Cartesian product; blocks are laid out consecutively.
struct Product {
  std::vector<ConvexSet> parts;
};

} // namespace sets

/// Nonempty closed convex set with a Euclidean projection.
class ConvexSet {
public:
  using Variant = std::variant<sets::Box, sets::Ball, sets::Halfspace, sets::Hyperplane,
                               sets::NonnegOrthant, sets::SecondOrderCone, sets::ZeroCone,
                               sets::FreeCone, sets::Polyhedron, sets::Product>;

  static ConvexSet box(Vector lo, Vector hi);
  static ConvexSet ball(Vector center, double radius);
  static ConvexSet halfspace(Vector normal, double offset);
  static ConvexSet hyperplane(Vector normal, double offset);
  static ConvexSet nonneg_orthant(Index dim);
  static ConvexSet second_order_cone(Index dim, double scale = 1.0);
  static ConvexSet zero_cone(Index dim);
  static ConvexSet free_cone(Index dim);
  static ConvexSet polyhedron(std::vector<sets::Halfspace> faces);
  static ConvexSet product(std::vector<ConvexSet> parts);

  Index dim() const;
  const Variant &variant() const { return value_; }
  std::string kind_name() const;

  /// Euclidean projection.
  Vector project(const Vector &x) const;
  /// Membership with absolute tolerance `tol`.
  bool contains(const Vector &x, double tol = 1e-12) const;

private:
  explicit ConvexSet(Variant v) : value_(std::move(v)) {}
  Variant value_;
};

inline Vector project(const ConvexSet &set, const Vector &x) { return set.project(x); }

/// Projection onto {x : <v, x> <= beta}: x - [<v,x> - beta]_+ / ||v||^2 v.
Vector project_halfspace(const Vector &normal, double offset, const Vector &x);
/// Projection onto {(z,t) : scale ||z|| <= t}.
Vector project_soc(const Vector &x, double scale = 1.0);

} // namespace supermann
