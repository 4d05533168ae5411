#pragma once

#include "supermann/operators.hpp"
#include "supermann/problem_data.hpp"

#include <cstdint>
#include <functional>
#include <json.hpp>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace supermann {

/// An operator together with its starting point, known solutions and
/// problem-specific diagnostics.
struct ProblemInstance {
  std::string name;
  std::shared_ptr<AveragedOperator> op;
  Vector x0;
  /// Analytically known fixed points (may be empty).
  std::vector<Vector> known_fixed_points;
  /// Problem-specific termination test, if any.
  std::function<bool(const Vector &)> extra_stop;
  /// Problem-specific report at an iterate.
  std::function<nlohmann::json(const Vector &)> report;
  /// Preferred relative tolerance when the problem has its own stopping test.
  std::optional<double> preferred_tol_rel;
  std::uint64_t seed = 0;
  nlohmann::json metadata;
  std::variant<std::monostate, Lasso, ConeProgram, OptimalControl> data;
};

/// Alternating projections between the planar cones
/// {0.1 x1 <= x2 <= 0.2 x1} and {0.3 x1 <= x2 <= 0.35 x1}; fix T = {0}.
ProblemInstance build_cones_example(std::optional<Vector> x0 = std::nullopt);

/// Unit disc and the tangent line {x1 = 1}. The only common point is (1, 0),
/// where the residual is not metrically subregular. Default start
/// (cos 1, sin 1).
ProblemInstance build_ball_line_example(std::optional<Vector> x0 = std::nullopt);

/// Cone {x3 >= 0.1 ||(x1, x2)||} and its tangent plane {x3 = 0.1 x2}; the
/// fixed points form the ray {(0, t, 0.1 t) : t >= 0}.
ProblemInstance build_soc_example(std::optional<Vector> x0 = std::nullopt);
/// Points sampled on the SOC example's ray of fixed points.
std::vector<Vector> soc_example_ray(int samples = 8, double t_max = 4.0);

/// A = randn(m, n) / sqrt(m), b = A x_true + 0.01 randn(m) with x_true having
/// max(1, n/20) standard normal nonzeros. FBS with gamma = 1/L, start x = 0.
ProblemInstance build_lasso(int m, int n, double nu, std::uint64_t seed);
ProblemInstance lasso_instance(Lasso prob, std::uint64_t seed = 0);
/// ||A^T (A x - b)||_inf; the lasso optimality condition needs it <= nu.
double lasso_gradient_inf_norm(const Lasso &prob, const Vector &x);
double lasso_objective(const Lasso &prob, const Vector &x);

struct ConeResiduals {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double scale = 0.0;   ///< embedding scale component tau
  bool degenerate = false; ///< tau <= 1e-12, residuals not meaningful
  bool below(double tol) const { return !degenerate && primal <= tol && dual <= tol && gap <= tol; }
};

/// Primal/dual/gap residuals of the solution recovered from a DRS iterate u:
///   v = (I+Q)^{-1} u,  w = proj_C(2v - u),  (x, y, tau) = w,
///   s = (w - 2v + u) restricted to the y block, all divided by tau.
/// Does not touch the operator's counters.
ConeResiduals cone_residuals(const DouglasRachfordCone &op, const Vector &u);
/// Same, factorizing I + Q afresh.
ConeResiduals cone_residuals(const ConeProgram &prob, const Vector &u);
/// Same, given v and w directly (shared by both overloads).
ConeResiduals cone_residuals_from(const ConeProgram &prob, const Vector &u, const Vector &v,
                                  const Vector &w);

/// Default cone layout for m rows: second-order blocks of size 5 covering
/// about half of the rows, the rest nonnegative orthant.
std::vector<ConeBlock> default_cone_layout(int m);

struct ConeProgramOptions {
  int m = 50;
  int n = 30;
  double density = 1.0;
  double cond = 100.0;
  double sigma_max = 0.0;      ///< largest singular value before masking; 0: sqrt(m)
  std::uint64_t seed = 1;
  std::vector<ConeBlock> cone; ///< empty: default_cone_layout(m)
  double tol = 1e-6;           ///< residual tolerance of the extra stopping test
};

/// Random cone program with a planted primal-dual solution. A = U S V^T with
/// log-spaced singular values in [1/cond, 1], then masked to the requested
/// density (the achieved condition number is recorded in the metadata).
/// Throws ConstructionError when the masked matrix loses full column rank.
ProblemInstance build_cone_program(const ConeProgramOptions &opts);
ProblemInstance build_cone_program(int m, int n, double density, double cond, std::uint64_t seed);
ProblemInstance cone_program_instance(ConeProgram prob, std::uint64_t seed = 0,
                                      double tol = 1e-6,
                                      std::optional<Vector> planted = std::nullopt);

/// Continuous-time chain of 2K unit masses between two walls, 2K+1 unit
/// springs, viscous friction 0.1; actuator i pushes mass 2i-1 by +u_i and
/// mass 2i by -u_i (1-based). Returns (A_c, B_c) for the state [p; v].
std::pair<Matrix, Matrix> masses_continuous(int K);
/// Zero-order-hold discretization through the matrix exponential of
/// [[A_c, B_c], [0, 0]] * Ts.
std::pair<Matrix, Matrix> zero_order_hold(const Matrix &Ac, const Matrix &Bc, double Ts);

struct MassesOptions {
  int K = 2;
  int N = 10;
  std::uint64_t seed = 1;
  double Ts = 0.1;
  double q_lo = 0.1, q_hi = 1.0; ///< state weights uniform in [q_lo, q_hi]
  /// Default: uniform over the state box, rejected until feasible.
  std::optional<Vector> initial_state;
  int max_attempts = 1000;
};

/// Searches for inputs u in U whose trajectory stays in X by projected
/// gradient on 1/2 dist(L u + b, X_shrunk)^2, X_shrunk being X pulled in by
/// `margin` on every side. Returns u only if simulate(u) lies in X exactly.
std::optional<Vector> find_feasible_input(const OptimalControl &prob, double margin = 0.05,
                                          int max_iter = 2000);

/// Oscillating masses MPC problem solved by Vu-Condat. State weights are
/// uniform in [0.1, 1]; inputs in [-2, 2], states in [-5, 5]. The random
/// initial state is drawn uniformly from the state box until
/// find_feasible_input certifies it.
ProblemInstance build_oscillating_masses(const MassesOptions &opts);
ProblemInstance build_oscillating_masses(int K, int N, std::uint64_t seed);
/// Vu-Condat instance for any box-constrained problem, start z = 0.
ProblemInstance optimal_control_instance(OptimalControl prob, std::string name,
                                         std::uint64_t seed = 0);

/// Names accepted by the problem factories.
const std::vector<std::string> &problem_names();

} // namespace supermann
