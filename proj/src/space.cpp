#include "supermann/space.hpp"

#include "supermann/errors.hpp"
#include "supermann/kernels.hpp"

#include <atomic>
#include <cmath>
#include <string>

namespace supermann {

double MetricOperator::inner(const Vector &u, const Vector &v) const {
  Vector pv(v.size());
  apply(v, pv);
  return kernels::dot(u, pv);
}

DiagonalMetricOperator::DiagonalMetricOperator(Vector weights) : weights_(std::move(weights)) {
  if (weights_.size() == 0 || (weights_.array() <= 0.0).any())
    throw UsageError("diagonal metric weights must be positive");
}

void DiagonalMetricOperator::apply(const Vector &in, Vector &out) const {
  out = weights_.cwiseProduct(in);
}

Metric Metric::euclidean(Index dim) {
  if (dim < 0)
    throw UsageError("metric dimension must be nonnegative");
  return Metric(dim, nullptr);
}

Metric Metric::induced(std::shared_ptr<const MetricOperator> op) {
  if (!op)
    throw UsageError("induced metric requires an operator");
  const Index dim = op->dim();
  return Metric(dim, std::move(op));
}

void Metric::check_dim(const Vector &u, const char *what) const {
  if (u.size() != dim_)
    throw UsageError(std::string("dimension mismatch in ") + what + ": got " +
                     std::to_string(u.size()) + ", metric has " + std::to_string(dim_));
}

double Metric::inner(const Vector &u, const Vector &v) const {
  check_dim(u, "inner");
  check_dim(v, "inner");
  check_finite(u, "inner");
  check_finite(v, "inner");
  return op_ ? op_->inner(u, v) : kernels::dot(u, v);
}

double Metric::squared_norm(const Vector &u) const {
  check_dim(u, "norm");
  check_finite(u, "norm");
  // Clamp tiny negative round-off from indefinite-looking evaluations of <u,Pu>.
  return op_ ? std::max(0.0, op_->quadratic(u)) : kernels::squared_norm(u);
}

double Metric::norm(const Vector &u) const { return std::sqrt(squared_norm(u)); }

double inner(const Vector &u, const Vector &v, const Metric &m) { return m.inner(u, v); }
double norm(const Vector &u, const Metric &m) { return m.norm(u); }

namespace debug {
namespace {
std::atomic<bool> g_finite_checks{false};
}
void set_finite_checks(bool enabled) { g_finite_checks.store(enabled); }
bool finite_checks_enabled() { return g_finite_checks.load(std::memory_order_relaxed); }
} // namespace debug

void check_finite(const Vector &v, const char *what) {
  if (debug::finite_checks_enabled() && !v.allFinite())
    throw NumericalError(std::string("non-finite entry in ") + what);
}

} // namespace supermann
