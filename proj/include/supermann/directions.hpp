#pragma once

// Update directions for the SuperMann iteration.
//
// All Broyden inner products and norms are Euclidean, regardless of the metric
// the operator is averaged in.

#include "supermann/space.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace supermann {

/// Default Broyden parameters.
inline constexpr double kDefaultThetaBar = 0.2;
inline constexpr int kDefaultMemory = 20;
inline constexpr double kDefaultTruncation = 1e4;

/// Powell's safeguard: 1 if |gamma| >= theta_bar, otherwise
/// (1 - sign(gamma) theta_bar) / (1 - gamma), with sign(0) = 1.
double powell_theta(double gamma, double theta_bar);

/// Whether a secant pair is too short to use: ||s|| <= 1e-14 max(1, ||x||).
bool degenerate_step(const Vector &s, double scale = 1.0);

/// Full-memory modified Broyden state; H approximates the inverse Jacobian.
struct BroydenFullState {
  Matrix H;
  double theta_bar = kDefaultThetaBar;

  static BroydenFullState identity(Index n, double theta_bar = kDefaultThetaBar);
};

/// Outcome of a secant update.
enum class UpdateStatus { Applied, SkippedDegenerate };

/// H+ = H + (s - H y~)(s^T H) / <H y~, s> with Powell's y~.
UpdateStatus broyden_full_update(BroydenFullState &state, const Vector &s, const Vector &y);
/// d = -H Rx.
Vector broyden_full_direction(const BroydenFullState &state, const Vector &Rx);

/// Restarted Broyden buffers: S holds s_i, S_tilde holds the auxiliary vectors.
struct BroydenRestartedState {
  std::vector<Vector> S;
  std::vector<Vector> S_tilde;
  int memory = kDefaultMemory;
  double theta_bar = kDefaultThetaBar;
};

struct RestartedResult {
  Vector d;
  UpdateStatus status;
};

/// One pass of the restarted scheme: folds the new pair (s, y) into the
/// direction for Rx, then appends the pair or, when the buffers already hold
/// `memory` pairs, empties them. A degenerate s is skipped and d is computed
/// from the existing buffers alone.
RestartedResult rbroyden_direction(BroydenRestartedState &state, const Vector &s, const Vector &y,
                                   const Vector &Rx);
/// Direction from the existing buffers without a new pair.
Vector rbroyden_apply(const BroydenRestartedState &state, const Vector &Rx);

/// Rescale d so that ||d|| <= D ||Rx|| (in the metric m).
Vector truncate(const Vector &d, double norm_Rx, double D, const Metric &m);

inline Vector zero_direction(const Vector &Rx) { return Vector::Zero(Rx.size()); }

/// Stateful producer of directions. The solver calls `direction` at the start
/// of an iteration and `observe` with the secant pair of that iteration.
class DirectionProvider {
public:
  virtual ~DirectionProvider() = default;
  virtual std::string name() const = 0;
  virtual Vector direction(const Vector &Rx) = 0;
  virtual void observe(const Vector &s, const Vector &y) = 0;
  virtual void reset() = 0;
  std::uint64_t skipped_updates() const { return skipped_; }

protected:
  std::uint64_t skipped_ = 0;
};

class ZeroDirections final : public DirectionProvider {
public:
  std::string name() const override { return "zero"; }
  Vector direction(const Vector &Rx) override { return zero_direction(Rx); }
  void observe(const Vector &, const Vector &) override {}
  void reset() override {}
};

class FullBroyden final : public DirectionProvider {
public:
  FullBroyden(Index dim, double theta_bar = kDefaultThetaBar);
  std::string name() const override { return "broyden"; }
  Vector direction(const Vector &Rx) override;
  void observe(const Vector &s, const Vector &y) override;
  void reset() override;
  const BroydenFullState &state() const { return state_; }

private:
  BroydenFullState state_;
};

class RestartedBroyden final : public DirectionProvider {
public:
  explicit RestartedBroyden(int memory = kDefaultMemory, double theta_bar = kDefaultThetaBar);
  std::string name() const override { return "rbroyden"; }
  Vector direction(const Vector &Rx) override;
  void observe(const Vector &s, const Vector &y) override;
  void reset() override;
  const BroydenRestartedState &state() const { return state_; }

private:
  BroydenRestartedState state_;
  Vector pending_s_, pending_y_;
  bool has_pending_ = false;
};

enum class DirectionKind { Zero, Broyden, RestartedBroyden };

DirectionKind direction_kind_from_name(const std::string &name);
std::string direction_kind_name(DirectionKind kind);
std::unique_ptr<DirectionProvider> make_direction_provider(DirectionKind kind, Index dim,
                                                           int memory = kDefaultMemory,
                                                           double theta_bar = kDefaultThetaBar);

} // namespace supermann
