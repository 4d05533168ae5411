#include "supermann/engine.hpp"

#include "supermann/errors.hpp"
#include "supermann/gkm.hpp"
#include "supermann/kernels.hpp"

#include <chrono>
#include <cmath>

namespace supermann {

SolverConfig SolverConfig::mpc() { return SolverConfig{}; }

SolverConfig SolverConfig::scs() {
  SolverConfig cfg;
  cfg.c0 = 0.0;
  cfg.sigma = 1e-3;
  cfg.c1 = 1.0 - cfg.sigma;
  cfg.q = 1.0 - cfg.sigma;
  return cfg;
}

SolverConfig SolverConfig::preset(const std::string &name) {
  if (name == "mpc" || name == "custom")
    return mpc();
  if (name == "scs")
    return scs();
  throw UsageError("unknown preset '" + name + "' (expected mpc, scs, custom)");
}

void SolverConfig::validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v < 1.0; };
  auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!in_unit(c0) || !in_unit(c1) || !in_unit(q))
    throw UsageError("c0, c1 and q must lie in [0, 1)");
  if (!open_unit(beta) || !open_unit(sigma))
    throw UsageError("beta and sigma must lie in (0, 1)");
  if (!(lambda > 0.0))
    throw UsageError("lambda must be positive");
  if (!(D > 0.0))
    throw UsageError("D must be positive");
  if (memory < 1)
    throw UsageError("memory must be a positive integer");
  if (!open_unit(theta_bar))
    throw UsageError("theta_bar must lie in (0, 1)");
  if (max_backtracks < 1)
    throw UsageError("max_backtracks must be a positive integer");
  if (!(tol_abs >= 0.0) || !(tol_rel >= 0.0))
    throw UsageError("tolerances must be nonnegative");
  if (max_iters < 1 || max_T_evals < 1)
    throw UsageError("iteration and evaluation budgets must be positive");
  if (!(time_limit_s > 0.0))
    throw UsageError("time limit must be positive");
}

const std::vector<std::string> &SolverConfig::keys() {
  static const std::vector<std::string> k{
      "c0",      "c1",        "q",              "beta",    "sigma",     "lambda",
      "D",       "memory",    "theta_bar",      "max_backtracks",       "tol_abs",
      "tol_rel", "max_iters", "max_T_evals",    "scale_qk_by_r0",       "time_limit_s"};
  return k;
}

void SolverConfig::set(const std::string &key, double value) {
  auto as_int = [&](const char *name) {
    if (value != std::floor(value))
      throw UsageError(std::string(name) + " must be an integer");
    return value;
  };
  if (key == "c0")
    c0 = value;
  else if (key == "c1")
    c1 = value;
  else if (key == "q")
    q = value;
  else if (key == "beta")
    beta = value;
  else if (key == "sigma")
    sigma = value;
  else if (key == "lambda")
    lambda = value;
  else if (key == "D")
    D = value;
  else if (key == "memory")
    memory = static_cast<int>(as_int("memory"));
  else if (key == "theta_bar")
    theta_bar = value;
  else if (key == "max_backtracks")
    max_backtracks = static_cast<int>(as_int("max_backtracks"));
  else if (key == "tol_abs")
    tol_abs = value;
  else if (key == "tol_rel")
    tol_rel = value;
  else if (key == "max_iters")
    max_iters = static_cast<long>(as_int("max_iters"));
  else if (key == "max_T_evals")
    max_T_evals = static_cast<long>(as_int("max_T_evals"));
  else if (key == "scale_qk_by_r0")
    scale_qk_by_r0 = value != 0.0;
  else if (key == "time_limit_s")
    time_limit_s = value;
  else
    throw UsageError("unknown solver parameter '" + key + "'");
}

std::string step_kind_code(StepKind kind) {
  switch (kind) {
  case StepKind::Blind:
    return "K0";
  case StepKind::Educated:
    return "K1";
  case StepKind::Safeguard:
    return "K2";
  case StepKind::NominalFallback:
    return "NOM";
  case StepKind::Terminated:
    return "END";
  }
  return "?";
}

StepKind step_kind_from_code(const std::string &code) {
  if (code == "K0")
    return StepKind::Blind;
  if (code == "K1")
    return StepKind::Educated;
  if (code == "K2")
    return StepKind::Safeguard;
  if (code == "NOM")
    return StepKind::NominalFallback;
  if (code == "END")
    return StepKind::Terminated;
  throw UsageError("unknown step kind '" + code + "'");
}

std::string status_name(Status s) {
  switch (s) {
  case Status::Converged:
    return "Converged";
  case Status::NotConverged:
    return "NotConverged";
  case Status::NumericalFailure:
    return "NumericalFailure";
  }
  return "?";
}

Status status_from_name(const std::string &name) {
  if (name == "Converged")
    return Status::Converged;
  if (name == "NotConverged")
    return Status::NotConverged;
  if (name == "NumericalFailure")
    return Status::NumericalFailure;
  throw UsageError("unknown status '" + name + "'");
}

IterateState initial_state(const AveragedOperator &op, const Vector &x0) {
  if (x0.size() != op.dim())
    throw UsageError("initial point has dimension " + std::to_string(x0.size()) +
                     ", operator expects " + std::to_string(op.dim()));
  IterateState s;
  s.x = x0;
  s.Rx = op.residual(x0);
  s.T_evals = 1;
  s.norm_Rx = op.metric().norm(s.Rx);
  s.norm_Rx0 = s.norm_Rx;
  s.eta = s.norm_Rx;
  s.r_safe = s.norm_Rx;
  return s;
}

namespace {

bool all_zero(const Vector &v) { return (v.array() == 0.0).all(); }

// Moves the state to x_next, evaluating its residual.
void move_to(IterateState &state, const AveragedOperator &op, Vector x_next) {
  state.x = std::move(x_next);
  state.Rx = op.residual(state.x);
  ++state.T_evals;
  state.norm_Rx = op.metric().norm(state.Rx);
}

} // namespace

StepRecord supermann_step(IterateState &state, const AveragedOperator &op,
                          DirectionProvider &dirs, const SolverConfig &cfg, StepAux *aux) {
  const Metric &metric = op.metric();
  const double alpha = op.alpha();
  const double lambda = cfg.lambda;

  StepRecord rec;
  rec.k = state.k;
  rec.norm_Rx = state.norm_Rx;
  if (aux) {
    aux->x_prev = state.x;
    aux->lambda = lambda;
    aux->numerical_failure = false;
  }

  auto finish = [&](StepRecord &r) {
    r.eta = state.eta;
    r.r_safe = state.r_safe;
    r.T_evals = state.T_evals;
    return r;
  };
  auto fail = [&](StepRecord &r) {
    if (aux)
      aux->numerical_failure = true;
    r.kind = StepKind::Terminated;
    return finish(r);
  };

  if (state.norm_Rx == 0.0) {
    rec.kind = StepKind::Terminated;
    return finish(rec);
  }

  Vector d = dirs.direction(state.Rx);
  if (!d.allFinite())
    return fail(rec);
  d = truncate(d, state.norm_Rx, cfg.D, metric);
  const bool null_direction = all_zero(d);
  rec.norm_d = null_direction ? 0.0 : metric.norm(d);

  const Vector x = state.x;
  const Vector Rx = state.Rx;
  const double norm_Rx = state.norm_Rx;
  const double qk_scale = cfg.scale_qk_by_r0 ? state.norm_Rx0 : 1.0;

  // K0: blind update. A null direction would leave x unchanged, so it goes
  // straight to the line search where it reproduces the KM step.
  if (!null_direction && norm_Rx <= cfg.c0 * state.eta) {
    state.eta = norm_Rx;
    Vector w = x + d;
    state.Rx = op.residual(w);
    ++state.T_evals;
    if (!state.Rx.allFinite())
      return fail(rec);
    state.norm_Rx = metric.norm(state.Rx);
    state.x = std::move(w);
    if (aux)
      aux->norm_Rw_sq = state.norm_Rx * state.norm_Rx;
    dirs.observe(d, state.Rx - Rx);
    rec.kind = StepKind::Blind;
    rec.tau = 1.0;
    ++state.k;
    return finish(rec);
  }

  Vector Pd; // P d, computed on first use by the separation test
  double tau = 1.0;
  Vector w, Rw;
  for (int backtracks = 0;; ++backtracks) {
    rec.tau = tau;
    rec.backtracks = backtracks;
    if (null_direction) {
      w = x;
      Rw = Rx;
    } else {
      w = x + tau * d;
      Rw = op.residual(w);
      ++state.T_evals;
      if (!Rw.allFinite())
        return fail(rec);
    }
    const double rw_sq = null_direction ? metric.squared_norm(Rx) : metric.squared_norm(Rw);
    const double norm_Rw = std::sqrt(rw_sq);
    if (aux)
      aux->norm_Rw_sq = rw_sq;

    // w is numerically a fixed point: take it.
    if (norm_Rw < 1e-14 * std::max(1.0, norm_Rx)) {
      state.x = w;
      state.Rx = Rw;
      state.norm_Rx = norm_Rw;
      state.r_safe = norm_Rw + std::pow(cfg.q, static_cast<double>(state.k)) * qk_scale;
      rec.kind = StepKind::Educated;
      break;
    }

    // K1: educated update
    if (norm_Rx <= state.r_safe && norm_Rw <= cfg.c1 * norm_Rx) {
      state.x = w;
      state.Rx = Rw;
      state.norm_Rx = norm_Rw;
      state.r_safe = norm_Rw + std::pow(cfg.q, static_cast<double>(state.k)) * qk_scale;
      rec.kind = StepKind::Educated;
      break;
    }

    // K2: safeguard (GKM) update. <Rw, w - x>_P = tau <Rw, P d>.
    double rho;
    if (null_direction) {
      rho = rw_sq;
    } else {
      if (Pd.size() == 0) {
        if (metric.op()) {
          Pd.resize(d.size());
          metric.op()->apply(d, Pd);
        } else {
          Pd = d;
        }
      }
      rho = rw_sq - 2.0 * alpha * tau * kernels::dot(Rw, Pd);
    }
    if (accepts(rho, norm_Rw, norm_Rx, cfg.sigma)) {
      rec.rho = rho;
      rec.kind = StepKind::Safeguard;
      move_to(state, op, x - (lambda * rho / rw_sq) * Rw);
      break;
    }

    if (backtracks == cfg.max_backtracks) {
      rec.kind = StepKind::NominalFallback;
      move_to(state, op, x - lambda * Rx);
      break;
    }
    tau *= cfg.beta;
  }

  if (!state.Rx.allFinite())
    return fail(rec);
  if (!null_direction && !degenerate_step(w - x, x.norm()))
    dirs.observe(w - x, Rw - Rx);
  ++state.k;
  return finish(rec);
}

LambdaSchedule constant_lambda(double lambda) {
  return [lambda](long) { return lambda; };
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void count_kind(Summary &s, StepKind kind) {
  switch (kind) {
  case StepKind::Blind:
    ++s.k0_steps;
    break;
  case StepKind::Educated:
    ++s.k1_steps;
    break;
  case StepKind::Safeguard:
    ++s.k2_steps;
    break;
  case StepKind::NominalFallback:
    ++s.fallback_steps;
    break;
  case StepKind::Terminated:
    break;
  }
}

// Returns true and fills the summary if the loop should stop before iterating.
bool should_stop(const IterateState &state, const SolverConfig &cfg, const SolveOptions &options,
                 double threshold, Clock::time_point start, Summary &summary) {
  if (state.norm_Rx <= threshold || (options.extra_stop && options.extra_stop(state.x))) {
    summary.status = Status::Converged;
    return true;
  }
  if (state.k >= cfg.max_iters) {
    summary.reason = "max_iters";
    return true;
  }
  if (state.T_evals >= static_cast<std::uint64_t>(cfg.max_T_evals)) {
    summary.reason = "max_T_evals";
    return true;
  }
  if (seconds_since(start) > cfg.time_limit_s) {
    summary.reason = "timeout";
    return true;
  }
  return false;
}

StepRecord end_record(const IterateState &state) {
  StepRecord r;
  r.k = state.k;
  r.kind = StepKind::Terminated;
  r.norm_Rx = state.norm_Rx;
  r.eta = state.eta;
  r.r_safe = state.r_safe;
  r.T_evals = state.T_evals;
  return r;
}

void finalize(SolveResult &result, IterateState &state, Clock::time_point start,
              const SolveOptions &options) {
  if (options.record_trace)
    result.trace.push_back(end_record(state));
  result.summary.iterations = state.k;
  result.summary.T_evals = state.T_evals;
  result.summary.final_residual = state.norm_Rx;
  result.summary.wall_time_s = seconds_since(start);
  result.x = std::move(state.x);
}

} // namespace

SolveResult supermann_solve(const AveragedOperator &op, const Vector &x0, DirectionProvider &dirs,
                            const SolverConfig &cfg_in, const SolveOptions &options) {
  cfg_in.validate();
  SolverConfig cfg = cfg_in;
  SolveResult result;
  const auto start = Clock::now();
  if (!(cfg.lambda < 1.0 / op.alpha())) {
    cfg.lambda = 0.5 / op.alpha();
    result.summary.warnings.push_back("lambda must be below 1/alpha; clamped to " +
                                      std::to_string(cfg.lambda));
  }

  IterateState state = initial_state(op, x0);
  const double threshold = cfg.tol_abs + cfg.tol_rel * state.norm_Rx0;
  StepAux aux;
  while (!should_stop(state, cfg, options, threshold, start, result.summary)) {
    const StepRecord rec = supermann_step(state, op, dirs, cfg, &aux);
    if (aux.numerical_failure) {
      result.summary.status = Status::NumericalFailure;
      result.summary.reason = "non_finite";
      break;
    }
    if (rec.kind == StepKind::Terminated)
      continue; // Rx = 0 exactly; the stopping test fires next
    count_kind(result.summary, rec.kind);
    if (options.record_trace)
      result.trace.push_back(rec);
    if (options.observer)
      options.observer(rec, state, aux);
  }
  finalize(result, state, start, options);
  return result;
}

SolveResult km_solve(const AveragedOperator &op, const Vector &x0, const LambdaSchedule &lambdas,
                     const SolverConfig &cfg, const SolveOptions &options) {
  cfg.validate();
  SolveResult result;
  const auto start = Clock::now();
  IterateState state = initial_state(op, x0);
  const double threshold = cfg.tol_abs + cfg.tol_rel * state.norm_Rx0;
  StepAux aux;
  while (!should_stop(state, cfg, options, threshold, start, result.summary)) {
    const double lambda = lambdas(state.k);
    StepRecord rec;
    rec.k = state.k;
    rec.kind = StepKind::NominalFallback;
    rec.tau = 1.0;
    rec.norm_Rx = state.norm_Rx;
    aux.x_prev = state.x;
    aux.lambda = lambda;
    aux.norm_Rw_sq = state.norm_Rx * state.norm_Rx;
    const Vector Tx = state.x - state.Rx;
    move_to(state, op, op.relax(state.x, Tx, lambda));
    if (!state.Rx.allFinite()) {
      result.summary.status = Status::NumericalFailure;
      result.summary.reason = "non_finite";
      break;
    }
    ++state.k;
    state.eta = state.norm_Rx;
    state.r_safe = state.norm_Rx;
    rec.eta = state.eta;
    rec.r_safe = state.r_safe;
    rec.T_evals = state.T_evals;
    count_kind(result.summary, rec.kind);
    if (options.record_trace)
      result.trace.push_back(rec);
    if (options.observer)
      options.observer(rec, state, aux);
  }
  finalize(result, state, start, options);
  return result;
}

} // namespace supermann
