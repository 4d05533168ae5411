#pragma once

#include "supermann/sets.hpp"
#include "supermann/space.hpp"

#include <string>
#include <vector>

namespace supermann {

/// One primitive cone in a product cone layout.
struct ConeBlock {
  enum class Kind { Zero, Free, Orthant, SecondOrder };
  Kind kind;
  Index dim;
};

std::string cone_kind_name(ConeBlock::Kind kind);
ConeBlock::Kind cone_kind_from_name(const std::string &name);

/// minimize <c, x>  s.t.  A x + s = b,  s in K.
struct ConeProgram {
  Matrix A;
  Vector b;
  Vector c;
  std::vector<ConeBlock> cone;

  Index n() const { return A.cols(); }
  Index m() const { return A.rows(); }
  /// Dimension of the homogeneous self-dual embedding, n + m + 1.
  Index embedding_dim() const { return n() + m() + 1; }

  ConvexSet primal_cone() const;
  ConvexSet dual_cone() const;
  /// R^n x K* x R_+.
  ConvexSet embedding_cone() const;
  /// Q = [[0, A^T, c], [-A, 0, b], [-c^T, -b^T, 0]].
  Matrix embedding_matrix() const;
  void validate() const;
};

/// minimize 1/2 ||A x - b||^2 + nu ||x||_1.
struct Lasso {
  Matrix A;
  Vector b;
  double nu;

  void validate() const;
};

/// Finite-horizon linear optimal control with box constraints:
///   x_{t+1} = A x_t + B u_t,  t = 0..N-1
///   cost    = sum_{t=1..N} 1/2 x_t^T diag(q) x_t + sum_{t=0..N-1} 1/2 ||u_t||^2
///   u_t in [u_lo, u_hi],  x_t in [x_lo, x_hi] for t = 1..N.
/// Trajectories are stacked: states (x_1..x_N), inputs (u_0..u_{N-1}).
struct OptimalControl {
  Matrix A;
  Matrix B;
  int horizon;
  Vector x0;
  Vector q_diag;
  Vector u_lo, u_hi;
  Vector x_lo, x_hi;

  Index nx() const { return A.rows(); }
  Index nu() const { return B.cols(); }
  Index input_dim() const { return horizon * nu(); }
  Index state_dim() const { return horizon * nx(); }

  /// Zero-initial-state response to inputs u (the map L).
  Vector apply_L(const Vector &u) const;
  /// Adjoint of L, a backward recursion.
  Vector apply_Lt(const Vector &v) const;
  /// Free response from x0 with zero inputs (the offset b in x = L u + b).
  Vector free_response() const;
  /// Step-by-step simulation from x0; independent of apply_L.
  Vector simulate(const Vector &u) const;
  double cost(const Vector &u) const;
  void validate() const;
};

} // namespace supermann
