#include "supermann/directions.hpp"

#include "supermann/errors.hpp"
#include "supermann/kernels.hpp"

#include <cmath>

namespace supermann {

double powell_theta(double gamma, double theta_bar) {
  if (!(theta_bar > 0.0 && theta_bar < 1.0))
    throw UsageError("theta_bar must lie in (0, 1)");
  if (std::abs(gamma) >= theta_bar)
    return 1.0;
  const double sign = gamma >= 0.0 ? 1.0 : -1.0;
  return (1.0 - sign * theta_bar) / (1.0 - gamma);
}

bool degenerate_step(const Vector &s, double scale) {
  return s.norm() <= 1e-14 * std::max(1.0, scale);
}

BroydenFullState BroydenFullState::identity(Index n, double theta_bar) {
  return {Matrix::Identity(n, n), theta_bar};
}

UpdateStatus broyden_full_update(BroydenFullState &state, const Vector &s, const Vector &y) {
  if (s.size() != state.H.rows() || y.size() != s.size())
    throw UsageError("broyden_full_update: dimension mismatch");
  if (degenerate_step(s))
    return UpdateStatus::SkippedDegenerate;
  const double ss = kernels::squared_norm(s);
  const Vector Hy = state.H * y;
  const double gamma = kernels::dot(Hy, s) / ss;
  const double theta = powell_theta(gamma, state.theta_bar);
  // H y~ = (1 - theta) s + theta H y, since H B s = s
  const Vector Hyt = (1.0 - theta) * s + theta * Hy;
  const double denom = kernels::dot(Hyt, s);
  const Eigen::RowVectorXd sH = s.transpose() * state.H;
  state.H.noalias() += ((s - Hyt) / denom) * sH;
  return UpdateStatus::Applied;
}

Vector broyden_full_direction(const BroydenFullState &state, const Vector &Rx) {
  if (Rx.size() != state.H.cols())
    throw UsageError("broyden_full_direction: dimension mismatch");
  return -(state.H * Rx);
}

namespace {

// d <- (I + s~_i s_i^T) ... (I + s~_1 s_1^T) d, oldest pair first.
void apply_buffers(const BroydenRestartedState &state, Vector &v) {
  for (std::size_t i = 0; i < state.S.size(); ++i)
    kernels::parallel::axpy(kernels::dot(state.S[i], v), kernels::view(state.S_tilde[i]),
                            kernels::view(v));
}

} // namespace

Vector rbroyden_apply(const BroydenRestartedState &state, const Vector &Rx) {
  Vector d = -Rx;
  apply_buffers(state, d);
  return d;
}

RestartedResult rbroyden_direction(BroydenRestartedState &state, const Vector &s, const Vector &y,
                                   const Vector &Rx) {
  if (state.memory <= 0)
    throw UsageError("restarted Broyden memory must be positive");
  if (s.size() != Rx.size() || y.size() != Rx.size())
    throw UsageError("rbroyden_direction: dimension mismatch");
  if (degenerate_step(s))
    return {rbroyden_apply(state, Rx), UpdateStatus::SkippedDegenerate};

  Vector d = -Rx;
  Vector s_tilde = y;
  for (std::size_t i = 0; i < state.S.size(); ++i) {
    kernels::parallel::axpy(kernels::dot(state.S[i], s_tilde), kernels::view(state.S_tilde[i]),
                            kernels::view(s_tilde));
    kernels::parallel::axpy(kernels::dot(state.S[i], d), kernels::view(state.S_tilde[i]),
                            kernels::view(d));
  }
  const double ss = kernels::squared_norm(s);
  const double gamma = kernels::dot(s_tilde, s) / ss;
  const double theta = powell_theta(gamma, state.theta_bar);
  s_tilde = (theta / ((1.0 - theta + theta * gamma) * ss)) * (s - s_tilde);
  kernels::parallel::axpy(kernels::dot(s, d), kernels::view(s_tilde), kernels::view(d));

  if (static_cast<int>(state.S.size()) == state.memory) {
    state.S.clear();
    state.S_tilde.clear();
  } else {
    state.S.push_back(s);
    state.S_tilde.push_back(std::move(s_tilde));
  }
  return {std::move(d), UpdateStatus::Applied};
}

Vector truncate(const Vector &d, double norm_Rx, double D, const Metric &m) {
  if (!(D > 0.0))
    throw UsageError("truncation constant D must be positive");
  const double bound = D * norm_Rx;
  if (bound == 0.0)
    return Vector::Zero(d.size());
  const double nd = m.norm(d);
  if (nd <= bound)
    return d;
  return (bound / nd) * d;
}

// ---------------------------------------------------------------------------

FullBroyden::FullBroyden(Index dim, double theta_bar)
    : state_(BroydenFullState::identity(dim, theta_bar)) {
  powell_theta(1.0, theta_bar); // validates theta_bar
}

Vector FullBroyden::direction(const Vector &Rx) { return broyden_full_direction(state_, Rx); }

void FullBroyden::observe(const Vector &s, const Vector &y) {
  if (broyden_full_update(state_, s, y) == UpdateStatus::SkippedDegenerate)
    ++skipped_;
}

void FullBroyden::reset() {
  state_ = BroydenFullState::identity(state_.H.rows(), state_.theta_bar);
  skipped_ = 0;
}

RestartedBroyden::RestartedBroyden(int memory, double theta_bar) {
  if (memory <= 0)
    throw UsageError("restarted Broyden memory must be positive");
  powell_theta(1.0, theta_bar);
  state_.memory = memory;
  state_.theta_bar = theta_bar;
}

Vector RestartedBroyden::direction(const Vector &Rx) {
  if (!has_pending_)
    return rbroyden_apply(state_, Rx);
  has_pending_ = false;
  auto result = rbroyden_direction(state_, pending_s_, pending_y_, Rx);
  if (result.status == UpdateStatus::SkippedDegenerate)
    ++skipped_;
  return std::move(result.d);
}

void RestartedBroyden::observe(const Vector &s, const Vector &y) {
  pending_s_ = s;
  pending_y_ = y;
  has_pending_ = true;
}

void RestartedBroyden::reset() {
  state_.S.clear();
  state_.S_tilde.clear();
  has_pending_ = false;
  skipped_ = 0;
}

DirectionKind direction_kind_from_name(const std::string &name) {
  if (name == "zero")
    return DirectionKind::Zero;
  if (name == "broyden")
    return DirectionKind::Broyden;
  if (name == "rbroyden")
    return DirectionKind::RestartedBroyden;
  throw UsageError("unknown direction '" + name + "' (expected zero, broyden, rbroyden)");
}

std::string direction_kind_name(DirectionKind kind) {
  switch (kind) {
  case DirectionKind::Zero:
    return "zero";
  case DirectionKind::Broyden:
    return "broyden";
  case DirectionKind::RestartedBroyden:
    return "rbroyden";
  }
  return "unknown";
}

std::unique_ptr<DirectionProvider> make_direction_provider(DirectionKind kind, Index dim,
                                                           int memory, double theta_bar) {
  switch (kind) {
  case DirectionKind::Zero:
    return std::make_unique<ZeroDirections>();
  case DirectionKind::Broyden:
    return std::make_unique<FullBroyden>(dim, theta_bar);
  case DirectionKind::RestartedBroyden:
    return std::make_unique<RestartedBroyden>(memory, theta_bar);
  }
  throw UsageError("unknown direction kind");
}

} // namespace supermann
