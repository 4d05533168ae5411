#include "supermann/operators.hpp"

#include "supermann/errors.hpp"
#include "supermann/kernels.hpp"
#include "supermann/rng.hpp"

#include <cassert>
#include <cmath>

namespace supermann {

AveragedOperator::AveragedOperator(Index dim, double alpha, Metric metric)
    : dim_(dim), alpha_(alpha), metric_(std::move(metric)) {
  if (dim <= 0)
    throw UsageError("operator dimension must be positive");
  if (metric_.dim() != dim)
    throw UsageError("operator and metric dimensions differ");
  set_alpha(alpha);
}

void AveragedOperator::set_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw UsageError("averagedness constant must lie in (0, 1]");
  alpha_ = alpha;
}

Vector AveragedOperator::apply(const Vector &x) const {
  if (x.size() != dim_)
    throw UsageError("operator applied to a vector of dimension " + std::to_string(x.size()) +
                     ", expected " + std::to_string(dim_));
  check_finite(x, "operator input");
  Vector out(dim_);
  do_apply(x, out);
  evals_.fetch_add(1, std::memory_order_relaxed);
  check_finite(out, "operator output");
  return out;
}

Vector AveragedOperator::residual(const Vector &x) const { return x - apply(x); }

Vector AveragedOperator::relax(const Vector &x, const Vector &Tx, double lambda) const {
  if (!(lambda >= 0.0 && lambda <= 1.0 / alpha_))
    throw UsageError("relaxation parameter must lie in [0, 1/alpha]");
  if (x.size() != dim_ || Tx.size() != dim_)
    throw UsageError("relax: dimension mismatch");
  return (1.0 - lambda) * x + lambda * Tx;
}

std::uint64_t AveragedOperator::cost() const {
  const std::string key = cost_counter();
  if (key == "T_evals")
    return evaluations();
  for (const auto &[name, value] : counters())
    if (name == key)
      return value;
  return evaluations();
}

double compose_averagedness(double a1, double a2) {
  if (!(a1 > 0.0 && a1 <= 1.0 && a2 > 0.0 && a2 <= 1.0))
    throw UsageError("averagedness constants must lie in (0, 1]");
  if (a1 * a2 >= 1.0)
    return 1.0;
  return (a1 + a2 - 2.0 * a1 * a2) / (1.0 - a1 * a2);
}

double power_iteration(const std::function<Vector(const Vector &)> &gram, Index dim,
                       int max_iter, double rtol) {
  Rng rng(0x9d2c5680u);
  Vector v = rng.normal_vector(dim);
  v /= v.norm();
  double estimate = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Vector w = gram(v);
    const double next = v.dot(w);
    const double wn = w.norm();
    if (wn == 0.0)
      return 0.0;
    v = w / wn;
    if (it > 0 && std::abs(next - estimate) <= rtol * std::abs(next)) {
      estimate = next;
      break;
    }
    estimate = next;
  }
  return estimate;
}

double soft_threshold(double v, double t) {
  if (v > t)
    return v - t;
  if (v < -t)
    return v + t;
  return 0.0;
}

// ---------------------------------------------------------------------------

FunctionOperator::FunctionOperator(Index dim, double alpha, Metric metric, Map map,
                                   std::string name)
    : AveragedOperator(dim, alpha, std::move(metric)), map_(std::move(map)),
      name_(std::move(name)) {}

// ---------------------------------------------------------------------------

AlternatingProjections::AlternatingProjections(ConvexSet first, ConvexSet second)
    : AveragedOperator(first.dim(), compose_averagedness(0.5, 0.5), Metric::euclidean(first.dim())),
      first_(std::move(first)), second_(std::move(second)) {
  if (first_.dim() != second_.dim())
    throw UsageError("alternating projections: sets have different dimensions");
}

void AlternatingProjections::do_apply(const Vector &x, Vector &out) const {
  out = second_.project(first_.project(x));
}

// ---------------------------------------------------------------------------

DouglasRachfordCone::DouglasRachfordCone(ConeProgram prob)
    : AveragedOperator(prob.embedding_dim(), 0.5, Metric::euclidean(prob.embedding_dim())),
      prob_(std::move(prob)), Q_(prob_.embedding_matrix()), cone_(prob_.embedding_cone()) {
  prob_.validate();
  const Index k = prob_.embedding_dim();
  // I + Q is nonsingular for skew-symmetric Q: <v, (I+Q) v> = ||v||^2.
  lu_.compute(Matrix::Identity(k, k) + Q_);
}

Vector DouglasRachfordCone::resolvent(const Vector &u) const { return lu_.solve(u); }

void DouglasRachfordCone::do_apply(const Vector &u, Vector &out) const {
  const Vector v = lu_.solve(u);
  linear_solves_.fetch_add(1, std::memory_order_relaxed);
  const Vector w = cone_.project(2.0 * v - u);
  out = u + w - v;
}

CounterList DouglasRachfordCone::counters() const {
  return {{"linear_solves", linear_solves_.load()}};
}

void DouglasRachfordCone::reset_counters() {
  AveragedOperator::reset_counters();
  linear_solves_.store(0);
}

// ---------------------------------------------------------------------------

ForwardBackwardLasso::ForwardBackwardLasso(Lasso prob, double gamma, double lipschitz)
    : AveragedOperator(prob.A.cols(), 1.0, Metric::euclidean(prob.A.cols())),
      prob_(std::move(prob)), gamma_(gamma), lipschitz_(lipschitz) {
  prob_.validate();
  if (!(lipschitz_ > 0.0))
    throw UsageError("lasso: Lipschitz constant must be positive");
  if (!(gamma_ > 0.0 && gamma_ < 2.0 / lipschitz_))
    throw UsageError("lasso: stepsize gamma must satisfy 0 < gamma < 2/L");
  // gradient step is (gamma L / 2)-averaged, the prox is firmly nonexpansive
  set_alpha(compose_averagedness(gamma_ * lipschitz_ / 2.0, 0.5));
}

Vector ForwardBackwardLasso::gradient(const Vector &x) const {
  Vector r = kernels::gemv(prob_.A, x);
  r -= prob_.b;
  return kernels::gemv_transposed(prob_.A, r);
}

void ForwardBackwardLasso::do_apply(const Vector &x, Vector &out) const {
  Vector step = x;
  kernels::parallel::axpy(-gamma_, kernels::view(gradient(x)), kernels::view(step));
  matvecs_.fetch_add(2, std::memory_order_relaxed);
  out = kernels::soft_threshold(step, gamma_ * prob_.nu);
}

CounterList ForwardBackwardLasso::counters() const { return {{"matvecs", matvecs_.load()}}; }

void ForwardBackwardLasso::reset_counters() {
  AveragedOperator::reset_counters();
  matvecs_.store(0);
}

double lasso_lipschitz(const Matrix &A) {
  const double top = power_iteration(
      [&](const Vector &v) { return kernels::gemv_transposed(A, kernels::gemv(A, v)); }, A.cols());
  return kNormInflation * top;
}

// ---------------------------------------------------------------------------

namespace {

Vector stack(const Vector &block, int times) {
  Vector out(block.size() * times);
  for (int t = 0; t < times; ++t)
    out.segment(t * block.size(), block.size()) = block;
  return out;
}

} // namespace

VuCondat::VuCondat(std::shared_ptr<const OptimalControl> prob, Steps steps,
                   std::shared_ptr<LinearMapCounter> counter, double alpha)
    : AveragedOperator(prob->input_dim() + prob->state_dim(), alpha,
                       Metric::induced(std::make_shared<VuCondatMetric>(prob, steps.tau,
                                                                        steps.sigma, counter))),
      prob_(std::move(prob)), steps_(steps), counter_(std::move(counter)) {
  free_response_ = prob_->free_response();
  q_stacked_ = stack(prob_->q_diag, prob_->horizon);
}

double VuCondat::averagedness(const Steps &s) {
  const double delta = (s.grad_lipschitz / 2.0) / (1.0 / s.tau - s.sigma * s.L_norm_sq);
  return 1.0 / (2.0 - delta);
}

Vector VuCondat::L(const Vector &u) const {
  counter_->calls.fetch_add(1, std::memory_order_relaxed);
  return prob_->apply_L(u);
}

Vector VuCondat::Lt(const Vector &v) const {
  counter_->calls.fetch_add(1, std::memory_order_relaxed);
  return prob_->apply_Lt(v);
}

void VuCondat::do_apply(const Vector &z, Vector &out) const {
  const Index nu = primal_dim(), ny = dual_dim();
  const Vector u = z.head(nu);
  const Vector y = z.tail(ny);
  const double tau = steps_.tau, sigma = steps_.sigma;
  const OptimalControl &p = *prob_;

  // grad f(u) + L^T y = u + L^T (q .* (L u + b) + y), one call to each of L, L^T
  const Vector states = L(u) + free_response_;
  const Vector adj = Lt(q_stacked_.cwiseProduct(states) + y);
  Vector u_plus = u - tau * (u + adj);
  for (int t = 0; t < p.horizon; ++t)
    u_plus.segment(t * p.nu(), p.nu()) =
        kernels::clamp(u_plus.segment(t * p.nu(), p.nu()), p.u_lo, p.u_hi);

  // prox of sigma h*, h = indicator of X shifted by b (Moreau identity)
  const Vector v = y + sigma * L(2.0 * u_plus - u);
  Vector shifted = v / sigma + free_response_;
  for (int t = 0; t < p.horizon; ++t)
    shifted.segment(t * p.nx(), p.nx()) =
        kernels::clamp(shifted.segment(t * p.nx(), p.nx()), p.x_lo, p.x_hi);
  out.head(nu) = u_plus;
  out.tail(ny) = v - sigma * shifted + sigma * free_response_;
}

CounterList VuCondat::counters() const { return {{"L_calls", counter_->calls.load()}}; }

void VuCondat::reset_counters() {
  AveragedOperator::reset_counters();
  counter_->calls.store(0);
}

VuCondatMetric::VuCondatMetric(std::shared_ptr<const OptimalControl> prob, double tau,
                               double sigma, std::shared_ptr<LinearMapCounter> counter)
    : prob_(std::move(prob)), tau_(tau), sigma_(sigma), counter_(std::move(counter)) {}

Index VuCondatMetric::dim() const { return prob_->input_dim() + prob_->state_dim(); }

Vector VuCondatMetric::L(const Vector &u) const {
  counter_->calls.fetch_add(1, std::memory_order_relaxed);
  return prob_->apply_L(u);
}

void VuCondatMetric::apply(const Vector &in, Vector &out) const {
  const Index nu = prob_->input_dim(), ny = prob_->state_dim();
  counter_->calls.fetch_add(1, std::memory_order_relaxed);
  const Vector lt = prob_->apply_Lt(in.tail(ny));
  const Vector l = L(in.head(nu));
  out.resize(nu + ny);
  out.head(nu) = in.head(nu) / tau_ - lt;
  out.tail(ny) = in.tail(ny) / sigma_ - l;
}

double VuCondatMetric::inner(const Vector &a, const Vector &b) const {
  const Index nu = prob_->input_dim(), ny = prob_->state_dim();
  const Vector au = a.head(nu), bu = b.head(nu), ay = a.tail(ny), by = b.tail(ny);
  return kernels::dot(au, bu) / tau_ + kernels::dot(ay, by) / sigma_ -
         kernels::dot(L(au), by) - kernels::dot(ay, L(bu));
}

double VuCondatMetric::quadratic(const Vector &a) const {
  const Index nu = prob_->input_dim(), ny = prob_->state_dim();
  const Vector au = a.head(nu), ay = a.tail(ny);
  return kernels::squared_norm(au) / tau_ + kernels::squared_norm(ay) / sigma_ -
         2.0 * kernels::dot(ay, L(au));
}

// ---------------------------------------------------------------------------

std::shared_ptr<AlternatingProjections> make_alternating_projections(ConvexSet c1, ConvexSet c2) {
  return std::make_shared<AlternatingProjections>(std::move(c1), std::move(c2));
}

std::shared_ptr<DouglasRachfordCone> make_drs(ConeProgram prob) {
  return std::make_shared<DouglasRachfordCone>(std::move(prob));
}

std::shared_ptr<ForwardBackwardLasso> make_fbs(Lasso prob, double gamma) {
  prob.validate();
  const double lip = lasso_lipschitz(prob.A);
  return std::make_shared<ForwardBackwardLasso>(std::move(prob), gamma, lip);
}

std::pair<double, double> vu_condat_constants(const OptimalControl &prob) {
  prob.validate();
  const Vector q = stack(prob.q_diag, prob.horizon);
  const double grad_lip = power_iteration(
      [&](const Vector &u) -> Vector { return u + prob.apply_Lt(q.cwiseProduct(prob.apply_L(u))); },
      prob.input_dim());
  const double l_sq = power_iteration(
      [&](const Vector &u) -> Vector { return prob.apply_Lt(prob.apply_L(u)); }, prob.input_dim());
  return {kNormInflation * grad_lip, kNormInflation * l_sq};
}

std::shared_ptr<VuCondat> make_vu_condat(OptimalControl prob, double tau, double sigma,
                                         double alpha_override) {
  const auto [grad_lip, l_sq] = vu_condat_constants(prob);
  if (!(tau > 0.0 && tau < 2.0 / grad_lip))
    throw UsageError("Vu-Condat: tau must satisfy 0 < tau < 2/L_f");
  const double sigma_max = (1.0 / tau - grad_lip / 2.0) / l_sq;
  if (!(sigma > 0.0 && sigma < sigma_max))
    throw UsageError("Vu-Condat: sigma must satisfy 0 < sigma < (1/tau - L_f/2)/||L||^2");
  const VuCondat::Steps steps{tau, sigma, grad_lip, l_sq};
  const double alpha = alpha_override > 0.0 ? alpha_override : VuCondat::averagedness(steps);
  auto shared = std::make_shared<const OptimalControl>(std::move(prob));
  return std::make_shared<VuCondat>(shared, steps, std::make_shared<LinearMapCounter>(), alpha);
}

std::shared_ptr<VuCondat> make_vu_condat(OptimalControl prob) {
  const auto [grad_lip, l_sq] = vu_condat_constants(prob);
  const double tau = 1.0 / grad_lip;
  const double sigma = 0.9 * (1.0 / tau - grad_lip / 2.0) / l_sq;
  return make_vu_condat(std::move(prob), tau, sigma);
}

} // namespace supermann
