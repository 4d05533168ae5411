#pragma once

#include "supermann/problem_data.hpp"
#include "supermann/sets.hpp"
#include "supermann/space.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace supermann {

using CounterList = std::vector<std::pair<std::string, std::uint64_t>>;

/// An alpha-averaged operator T on a finite-dimensional space with a given
/// metric. Counts every application of T; subclasses may keep extra counters
/// for their own expensive primitives.
class AveragedOperator {
public:
  AveragedOperator(Index dim, double alpha, Metric metric);
  virtual ~AveragedOperator() = default;
  AveragedOperator(const AveragedOperator &) = delete;
  AveragedOperator &operator=(const AveragedOperator &) = delete;

  Index dim() const { return dim_; }
  double alpha() const { return alpha_; }
  void set_alpha(double alpha);
  const Metric &metric() const { return metric_; }
  virtual std::string name() const = 0;

  /// T x.
  Vector apply(const Vector &x) const;
  /// R x = x - T x.
  Vector residual(const Vector &x) const;
  /// (1 - lambda) x + lambda Tx, lambda in [0, 1/alpha].
  Vector relax(const Vector &x, const Vector &Tx, double lambda) const;

  std::uint64_t evaluations() const { return evals_.load(); }
  /// Problem-specific counters (linear solves, matvecs, ...).
  virtual CounterList counters() const { return {}; }
  /// Name of the counter measuring the dominant cost; "T_evals" by default.
  virtual std::string cost_counter() const { return "T_evals"; }
  std::uint64_t cost() const;
  virtual void reset_counters() { evals_.store(0); }

protected:
  virtual void do_apply(const Vector &x, Vector &out) const = 0;

private:
  Index dim_;
  double alpha_;
  Metric metric_;
  mutable std::atomic<std::uint64_t> evals_{0};
};

inline Vector residual(const AveragedOperator &op, const Vector &x) { return op.residual(x); }

/// Averagedness constant of the composition of an a1- and an a2-averaged map.
double compose_averagedness(double a1, double a2);

/// Largest eigenvalue of a symmetric PSD operator by power iteration
/// (max_iter iterations or relative change below rtol). Not inflated.
double power_iteration(const std::function<Vector(const Vector &)> &gram, Index dim,
                       int max_iter = 200, double rtol = 1e-10);

/// Safety inflation applied to power-iteration estimates used in stepsizes.
inline constexpr double kNormInflation = 1.01;

/// Wraps an arbitrary map; the caller vouches for its averagedness.
class FunctionOperator final : public AveragedOperator {
public:
  using Map = std::function<Vector(const Vector &)>;
  FunctionOperator(Index dim, double alpha, Metric metric, Map map, std::string name = "function");
  std::string name() const override { return name_; }

protected:
  void do_apply(const Vector &x, Vector &out) const override { out = map_(x); }

private:
  Map map_;
  std::string name_;
};

/// T = proj_{C2} o proj_{C1}, alpha = 2/3, Euclidean.
class AlternatingProjections final : public AveragedOperator {
public:
  AlternatingProjections(ConvexSet first, ConvexSet second);
  std::string name() const override { return "alternating-projections"; }
  const ConvexSet &first() const { return first_; }
  const ConvexSet &second() const { return second_; }

protected:
  void do_apply(const Vector &x, Vector &out) const override;

private:
  ConvexSet first_, second_;
};

/// Douglas-Rachford on Q + N_C for the self-dual embedding of a cone program:
///   v = (I + Q)^{-1} u,  w = proj_C(2v - u),  T u = u + w - v.
/// Firmly nonexpansive; (I + Q) is factorized once.
class DouglasRachfordCone final : public AveragedOperator {
public:
  explicit DouglasRachfordCone(ConeProgram prob);
  std::string name() const override { return "drs-cone"; }

  const ConeProgram &program() const { return prob_; }
  const Matrix &embedding_matrix() const { return Q_; }
  const ConvexSet &embedding_cone() const { return cone_; }

  /// (I + Q)^{-1} u, not counted as a linear solve (diagnostics only).
  Vector resolvent(const Vector &u) const;

  CounterList counters() const override;
  std::string cost_counter() const override { return "linear_solves"; }
  void reset_counters() override;

protected:
  void do_apply(const Vector &x, Vector &out) const override;

private:
  ConeProgram prob_;
  Matrix Q_;
  ConvexSet cone_;
  Eigen::PartialPivLU<Matrix> lu_;
  mutable std::atomic<std::uint64_t> linear_solves_{0};
};

/// Forward-backward (proximal gradient) step for the lasso:
///   T x = soft(x - gamma A^T (A x - b), gamma nu).
class ForwardBackwardLasso final : public AveragedOperator {
public:
  /// gamma must satisfy 0 < gamma < 2 / lipschitz.
  ForwardBackwardLasso(Lasso prob, double gamma, double lipschitz);
  std::string name() const override { return "fbs-lasso"; }

  const Lasso &problem() const { return prob_; }
  double gamma() const { return gamma_; }
  double lipschitz() const { return lipschitz_; }
  /// A^T (A x - b), not counted.
  Vector gradient(const Vector &x) const;

  CounterList counters() const override;
  std::string cost_counter() const override { return "matvecs"; }
  void reset_counters() override;

protected:
  void do_apply(const Vector &x, Vector &out) const override;

private:
  Lasso prob_;
  double gamma_;
  double lipschitz_;
  mutable std::atomic<std::uint64_t> matvecs_{0};
};

/// Shared call counter for the abstract operators L and L^T.
struct LinearMapCounter {
  std::atomic<std::uint64_t> calls{0};
};

/// Vu-Condat primal-dual step for the box-constrained optimal control problem,
/// acting on z = (u, y):
///   u+ = proj_U(u - tau (grad f(u) + L^T y))
///   y+ = prox_{sigma h*}(y + sigma L (2u+ - u))
/// with f(u) = cost(u), h = indicator of X shifted by the free response.
/// Averaged in the metric P = [[I/tau, -L^T], [-L, I/sigma]].
class VuCondat final : public AveragedOperator {
public:
  struct Steps {
    double tau;
    double sigma;
    double grad_lipschitz; ///< L_f (inflated)
    double L_norm_sq;      ///< ||L||^2 (inflated)
  };

  VuCondat(std::shared_ptr<const OptimalControl> prob, Steps steps,
           std::shared_ptr<LinearMapCounter> counter, double alpha);
  std::string name() const override { return "vu-condat"; }

  const OptimalControl &problem() const { return *prob_; }
  const Steps &steps() const { return steps_; }
  Index primal_dim() const { return prob_->input_dim(); }
  Index dual_dim() const { return prob_->state_dim(); }

  /// Averagedness constant 1 / (2 - delta), delta = (L_f / 2) / (1/tau - sigma ||L||^2).
  static double averagedness(const Steps &steps);

  CounterList counters() const override;
  std::string cost_counter() const override { return "L_calls"; }
  void reset_counters() override;

protected:
  void do_apply(const Vector &x, Vector &out) const override;

private:
  Vector L(const Vector &u) const;
  Vector Lt(const Vector &v) const;

  std::shared_ptr<const OptimalControl> prob_;
  Steps steps_;
  Vector free_response_;
  Vector q_stacked_;
  std::shared_ptr<LinearMapCounter> counter_;
};

/// The metric P of VuCondat, applied through counted L and L^T calls.
class VuCondatMetric final : public MetricOperator {
public:
  VuCondatMetric(std::shared_ptr<const OptimalControl> prob, double tau, double sigma,
                 std::shared_ptr<LinearMapCounter> counter);
  Index dim() const override;
  void apply(const Vector &in, Vector &out) const override;
  double inner(const Vector &u, const Vector &v) const override;
  double quadratic(const Vector &u) const override;

private:
  Vector L(const Vector &u) const;
  std::shared_ptr<const OptimalControl> prob_;
  double tau_, sigma_;
  std::shared_ptr<LinearMapCounter> counter_;
};

std::shared_ptr<AlternatingProjections> make_alternating_projections(ConvexSet c1, ConvexSet c2);
std::shared_ptr<DouglasRachfordCone> make_drs(ConeProgram prob);
/// Lipschitz constant ||A^T A|| of the lasso gradient (power iteration, inflated).
double lasso_lipschitz(const Matrix &A);
std::shared_ptr<ForwardBackwardLasso> make_fbs(Lasso prob, double gamma);
/// Builds the Vu-Condat operator with explicit stepsizes; throws UsageError if
/// they violate 0 < tau < 2/L_f, 0 < sigma < (1/tau - L_f/2)/||L||^2.
/// alpha_override > 0 replaces the default averagedness constant.
std::shared_ptr<VuCondat> make_vu_condat(OptimalControl prob, double tau, double sigma,
                                         double alpha_override = 0.0);
/// Default stepsizes: tau = 1/L_f, sigma = 0.9 (1/tau - L_f/2)/||L||^2.
std::shared_ptr<VuCondat> make_vu_condat(OptimalControl prob);
/// Estimated (inflated) L_f and ||L||^2 for the optimal control problem.
std::pair<double, double> vu_condat_constants(const OptimalControl &prob);

/// Shrinkage: sign(v) max(|v| - t, 0).
double soft_threshold(double v, double t);

} // namespace supermann
