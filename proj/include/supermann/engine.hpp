#pragma once

#include "supermann/directions.hpp"
#include "supermann/operators.hpp"
#include "supermann/space.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace supermann {

/// Tuning scalars and budgets for SuperMann (and the stopping part for KM).
struct SolverConfig {
  double c0 = 0.99;   ///< blind-step threshold on ||Rx_k|| / eta_k
  double c1 = 0.99;   ///< educated-step residual decrease factor
  double q = 0.99;    ///< summable increment for r_safe
  double beta = 0.5;  ///< backtracking factor
  double sigma = 0.1; ///< safeguard acceptance margin
  double lambda = 1.0;
  double D = kDefaultTruncation;
  int memory = kDefaultMemory;
  double theta_bar = kDefaultThetaBar;
  int max_backtracks = 8;
  double tol_abs = 0.0;
  double tol_rel = 1e-4;
  long max_iters = 100000;
  long max_T_evals = 10000000;
  bool scale_qk_by_r0 = true;
  double time_limit_s = 300.0;

  /// c0 = c1 = q = 0.99, sigma = 0.1, lambda = 1, beta = 1/2, 8 backtracks.
  static SolverConfig mpc();
  /// Blind steps off (c0 = 0), sigma = 1e-3, c1 = q = 1 - sigma.
  static SolverConfig scs();
  static SolverConfig preset(const std::string &name);

  /// Throws UsageError on out-of-range values.
  void validate() const;
  /// Sets a field by name (c0, c1, q, beta, sigma, lambda, D, memory,
  /// theta_bar, max_backtracks, tol_abs, tol_rel, max_iters, max_T_evals,
  /// scale_qk_by_r0, time_limit_s). Throws UsageError for unknown keys.
  void set(const std::string &key, double value);
  static const std::vector<std::string> &keys();
};

enum class StepKind { Blind, Educated, Safeguard, NominalFallback, Terminated };

/// K0, K1, K2, NOM, END.
std::string step_kind_code(StepKind kind);
StepKind step_kind_from_code(const std::string &code);

struct StepRecord {
  long k = 0;
  StepKind kind = StepKind::Terminated;
  double tau = 0.0;
  int backtracks = 0;
  std::optional<double> rho;
  double norm_Rx = 0.0; ///< residual at the base point x_k
  double norm_d = 0.0;
  double eta = 0.0;     ///< eta_{k+1}
  double r_safe = 0.0;  ///< r_safe after the step
  std::uint64_t T_evals = 0;
};

struct IterateState {
  Vector x;
  Vector Rx;
  double norm_Rx = 0.0;
  double norm_Rx0 = 0.0;
  double eta = 0.0;
  double r_safe = 0.0;
  long k = 0;
  std::uint64_t T_evals = 0;
};

/// Evaluates R x0 and sets eta_0 = r_safe = ||R x0||.
IterateState initial_state(const AveragedOperator &op, const Vector &x0);

/// Extra information about a step, handed to observers.
struct StepAux {
  Vector x_prev;
  double norm_Rw_sq = 0.0; ///< ||Rw||^2 of the last trial point
  double lambda = 0.0;
  bool numerical_failure = false;
};

/// One SuperMann iteration. Exactly one of K0/K1/K2/NOM is taken, or END when
/// Rx_k = 0. The direction provider receives the secant pair of the last
/// trial point afterwards.
StepRecord supermann_step(IterateState &state, const AveragedOperator &op,
                          DirectionProvider &dirs, const SolverConfig &cfg,
                          StepAux *aux = nullptr);

enum class Status { Converged, NotConverged, NumericalFailure };
std::string status_name(Status s);
Status status_from_name(const std::string &name);

struct Summary {
  Status status = Status::NotConverged;
  std::string reason; ///< empty, max_iters, max_T_evals, timeout, non_finite
  long iterations = 0;
  std::uint64_t T_evals = 0;
  double final_residual = 0.0;
  long k0_steps = 0;
  long k1_steps = 0;
  long k2_steps = 0;
  long fallback_steps = 0;
  double wall_time_s = 0.0;
  std::vector<std::string> warnings;
};

struct SolveResult {
  Vector x;
  std::vector<StepRecord> trace;
  Summary summary;
};

using StepObserver =
    std::function<void(const StepRecord &, const IterateState &after, const StepAux &)>;

struct SolveOptions {
  StepObserver observer;
  /// Problem-specific termination test evaluated at each iterate.
  std::function<bool(const Vector &)> extra_stop;
  bool record_trace = true;
};

/// Budgets and tolerances shared by both solvers: stops once
/// ||Rx_k|| <= tol_abs + tol_rel ||Rx_0|| (metric norm).
SolveResult supermann_solve(const AveragedOperator &op, const Vector &x0, DirectionProvider &dirs,
                            const SolverConfig &cfg, const SolveOptions &options = {});

using LambdaSchedule = std::function<double(long k)>;
LambdaSchedule constant_lambda(double lambda);

/// Classical KM: x_{k+1} = (1 - lambda_k) x_k + lambda_k T x_k. Uses only the
/// stopping fields of cfg. Steps are traced as NOM records.
SolveResult km_solve(const AveragedOperator &op, const Vector &x0, const LambdaSchedule &lambdas,
                     const SolverConfig &cfg, const SolveOptions &options = {});

} // namespace supermann
