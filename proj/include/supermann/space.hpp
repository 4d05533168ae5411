#pragma once

#include <Eigen/Dense>
#include <memory>

namespace supermann {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// A symmetric positive-definite operator P inducing <u, v>_P = <u, P v>.
/// Applied on demand; never materialized.
class MetricOperator {
public:
  virtual ~MetricOperator() = default;
  virtual Index dim() const = 0;
  virtual void apply(const Vector &in, Vector &out) const = 0;
  /// <u, P v>. Implementations may override with a cheaper route.
  virtual double inner(const Vector &u, const Vector &v) const;
  /// <u, P u>.
  virtual double quadratic(const Vector &u) const { return inner(u, u); }
};

/// P = diag(weights), weights > 0.
class DiagonalMetricOperator final : public MetricOperator {
public:
  explicit DiagonalMetricOperator(Vector weights);
  Index dim() const override { return weights_.size(); }
  void apply(const Vector &in, Vector &out) const override;

private:
  Vector weights_;
};

/// Finite-dimensional inner product: Euclidean or induced by a MetricOperator.
/// Read-only after construction and cheap to copy.
class Metric {
public:
  enum class Kind { Euclidean, OperatorInduced };

  static Metric euclidean(Index dim);
  static Metric induced(std::shared_ptr<const MetricOperator> op);

  Kind kind() const { return op_ ? Kind::OperatorInduced : Kind::Euclidean; }
  Index dim() const { return dim_; }
  const MetricOperator *op() const { return op_.get(); }

  double inner(const Vector &u, const Vector &v) const;
  double squared_norm(const Vector &u) const;
  double norm(const Vector &u) const;

private:
  Metric(Index dim, std::shared_ptr<const MetricOperator> op)
      : dim_(dim), op_(std::move(op)) {}
  void check_dim(const Vector &u, const char *what) const;

  Index dim_;
  std::shared_ptr<const MetricOperator> op_;
};

double inner(const Vector &u, const Vector &v, const Metric &m);
double norm(const Vector &u, const Metric &m);

namespace debug {
/// Turns the NaN/Inf checks in check_finite on or off (off by default).
void set_finite_checks(bool enabled);
bool finite_checks_enabled();
} // namespace debug

/// Throws NumericalError if checks are enabled and v has a non-finite entry.
void check_finite(const Vector &v, const char *what);

} // namespace supermann
