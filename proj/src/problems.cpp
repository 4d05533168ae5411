#include "supermann/problems.hpp"

#include "supermann/errors.hpp"
#include "supermann/rng.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <unsupported/Eigen/MatrixFunctions>

namespace supermann {

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values)
    v(i++) = x;
  return v;
}

void check_start(const std::optional<Vector> &x0, Index dim, const char *name) {
  if (x0 && x0->size() != dim)
    throw UsageError(std::string(name) + ": starting point must have dimension " +
                     std::to_string(dim));
}

nlohmann::json set_report(const AlternatingProjections &op, const Vector &x) {
  const Vector p1 = op.first().project(x);
  return {{"dist_first", (x - p1).norm()}, {"dist_second", (x - op.second().project(x)).norm()}};
}

ProblemInstance projections_instance(std::string name, ConvexSet c1, ConvexSet c2, Vector x0,
                                     std::vector<Vector> fixed) {
  ProblemInstance inst;
  auto op = make_alternating_projections(std::move(c1), std::move(c2));
  inst.name = std::move(name);
  inst.x0 = std::move(x0);
  inst.known_fixed_points = std::move(fixed);
  inst.report = [op](const Vector &x) { return set_report(*op, x); };
  inst.metadata = {{"problem", inst.name}, {"dim", op->dim()}, {"alpha", op->alpha()}};
  inst.op = std::move(op);
  return inst;
}

} // namespace

// --- planar and 3-D alternating projections ---------------------------------

ProblemInstance build_cones_example(std::optional<Vector> x0) {
  check_start(x0, 2, "cones");
  // 0.1 x1 <= x2 <= 0.2 x1 and 0.3 x1 <= x2 <= 0.35 x1 as halfspace pairs
  auto wedge = [](double lo, double hi) {
    return ConvexSet::polyhedron({sets::Halfspace{vec({lo, -1.0}), 0.0},
                                  sets::Halfspace{vec({-hi, 1.0}), 0.0}});
  };
  return projections_instance("cones", wedge(0.1, 0.2), wedge(0.3, 0.35),
                              x0.value_or(vec({1.0, 0.15})), {Vector::Zero(2)});
}

ProblemInstance build_ball_line_example(std::optional<Vector> x0) {
  check_start(x0, 2, "ball-line");
  return projections_instance("ball-line", ConvexSet::ball(Vector::Zero(2), 1.0),
                              ConvexSet::hyperplane(vec({1.0, 0.0}), 1.0),
                              x0.value_or(vec({std::cos(1.0), std::sin(1.0)})),
                              {vec({1.0, 0.0})});
}

std::vector<Vector> soc_example_ray(int samples, double t_max) {
  std::vector<Vector> ray;
  for (int i = 0; i < samples; ++i) {
    const double t = samples > 1 ? t_max * i / (samples - 1) : 0.0;
    ray.push_back(vec({0.0, t, 0.1 * t}));
  }
  return ray;
}

ProblemInstance build_soc_example(std::optional<Vector> x0) {
  check_start(x0, 3, "soc");
  return projections_instance("soc", ConvexSet::second_order_cone(3, 0.1),
                              ConvexSet::hyperplane(vec({0.0, -0.1, 1.0}), 0.0),
                              x0.value_or(vec({1.0, 1.0, 1.0})), soc_example_ray());
}

// --- lasso -----------------------------------------------------------------

double lasso_gradient_inf_norm(const Lasso &prob, const Vector &x) {
  return (prob.A.transpose() * (prob.A * x - prob.b)).lpNorm<Eigen::Infinity>();
}

double lasso_objective(const Lasso &prob, const Vector &x) {
  return 0.5 * (prob.A * x - prob.b).squaredNorm() + prob.nu * x.lpNorm<1>();
}

ProblemInstance lasso_instance(Lasso prob, std::uint64_t seed) {
  prob.validate();
  const double lip = lasso_lipschitz(prob.A);
  auto op = make_fbs(prob, 1.0 / lip);
  ProblemInstance inst;
  inst.name = "lasso";
  inst.seed = seed;
  inst.x0 = Vector::Zero(prob.A.cols());
  if (prob.nu >= (prob.A.transpose() * prob.b).lpNorm<Eigen::Infinity>())
    inst.known_fixed_points.push_back(Vector::Zero(prob.A.cols()));
  inst.report = [p = prob](const Vector &x) {
    return nlohmann::json{{"objective", lasso_objective(p, x)},
                          {"grad_inf_norm", lasso_gradient_inf_norm(p, x)},
                          {"nu", p.nu},
                          {"nonzeros", (x.array() != 0.0).count()}};
  };
  inst.metadata = {{"problem", "lasso"}, {"m", prob.A.rows()},  {"n", prob.A.cols()},
                   {"nu", prob.nu},      {"gamma", op->gamma()}, {"lipschitz", lip},
                   {"alpha", op->alpha()}};
  inst.op = op;
  inst.data = std::move(prob);
  return inst;
}

ProblemInstance build_lasso(int m, int n, double nu, std::uint64_t seed) {
  if (m <= 0 || n <= 0)
    throw UsageError("lasso: m and n must be positive");
  if (!(nu > 0.0))
    throw UsageError("lasso: nu must be positive");
  Rng rng(seed);
  Lasso prob;
  prob.A = rng.normal_matrix(m, n) / std::sqrt(static_cast<double>(m));
  prob.nu = nu;

  // sparse ground truth: partial Fisher-Yates over the column indices
  const int nnz = std::max(1, n / 20);
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  Vector x_true = Vector::Zero(n);
  for (int i = 0; i < nnz; ++i) {
    const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    x_true(idx[static_cast<std::size_t>(i)]) = rng.normal();
  }
  prob.b = prob.A * x_true + 0.01 * rng.normal_vector(m);

  ProblemInstance inst = lasso_instance(std::move(prob), seed);
  inst.metadata["seed"] = seed;
  inst.metadata["generator"] = std::string(Rng::kName);
  inst.metadata["planted_nonzeros"] = nnz;
  return inst;
}

// --- cone programs -----------------------------------------------------------

std::vector<ConeBlock> default_cone_layout(int m) {
  if (m <= 0)
    throw UsageError("cone program: m must be positive");
  const int soc_blocks = (m / 2) / 5;
  std::vector<ConeBlock> layout;
  if (m - 5 * soc_blocks > 0)
    layout.push_back({ConeBlock::Kind::Orthant, m - 5 * soc_blocks});
  for (int i = 0; i < soc_blocks; ++i)
    layout.push_back({ConeBlock::Kind::SecondOrder, 5});
  return layout;
}

ConeResiduals cone_residuals_from(const ConeProgram &prob, const Vector &u, const Vector &v,
                                  const Vector &w) {
  const Index n = prob.n(), m = prob.m();
  ConeResiduals r;
  r.scale = w(n + m);
  if (r.scale <= 1e-12) {
    r.degenerate = true;
    r.primal = r.dual = r.gap = std::numeric_limits<double>::infinity();
    return r;
  }
  const Vector x = w.head(n) / r.scale;
  const Vector y = w.segment(n, m) / r.scale;
  const Vector s = (w - 2.0 * v + u).segment(n, m) / r.scale;
  r.primal = (prob.A * x + s - prob.b).norm() / (1.0 + prob.b.norm());
  r.dual = (prob.A.transpose() * y + prob.c).norm() / (1.0 + prob.c.norm());
  const double cx = prob.c.dot(x), by = prob.b.dot(y);
  r.gap = std::abs(cx + by) / (1.0 + std::abs(cx) + std::abs(by));
  return r;
}

ConeResiduals cone_residuals(const DouglasRachfordCone &op, const Vector &u) {
  const Vector v = op.resolvent(u);
  const Vector w = op.embedding_cone().project(2.0 * v - u);
  return cone_residuals_from(op.program(), u, v, w);
}

ConeResiduals cone_residuals(const ConeProgram &prob, const Vector &u) {
  const Index k = prob.embedding_dim();
  if (u.size() != k)
    throw UsageError("cone residuals: iterate has the wrong dimension");
  const Matrix Q = prob.embedding_matrix();
  const Vector v = (Matrix::Identity(k, k) + Q).partialPivLu().solve(u);
  const Vector w = prob.embedding_cone().project(2.0 * v - u);
  return cone_residuals_from(prob, u, v, w);
}

namespace {

nlohmann::json residuals_json(const ConeResiduals &r) {
  return {{"primal", r.primal},
          {"dual", r.dual},
          {"gap", r.gap},
          {"scale", r.scale},
          {"degenerate", r.degenerate}};
}

nlohmann::json layout_json(const std::vector<ConeBlock> &layout) {
  auto j = nlohmann::json::array();
  for (const auto &b : layout)
    j.push_back({{"kind", cone_kind_name(b.kind)}, {"dim", b.dim}});
  return j;
}

Matrix random_orthogonal(Rng &rng, Index dim) {
  Eigen::HouseholderQR<Matrix> qr(rng.normal_matrix(dim, dim));
  return qr.householderQ() * Matrix::Identity(dim, dim);
}

// Complementary pair (s, y) in K x K* for one block.
void plant_block(Rng &rng, const ConeBlock &blk, Eigen::Ref<Vector> s, Eigen::Ref<Vector> y) {
  switch (blk.kind) {
  case ConeBlock::Kind::Zero:
    s.setZero();
    y = rng.normal_vector(blk.dim);
    break;
  case ConeBlock::Kind::Free:
    s = rng.normal_vector(blk.dim);
    y.setZero();
    break;
  case ConeBlock::Kind::Orthant:
    for (Index i = 0; i < blk.dim; ++i) {
      const double mag = rng.uniform(0.5, 1.5);
      const bool slack_active = rng.uniform() < 0.5;
      s(i) = slack_active ? mag : 0.0;
      y(i) = slack_active ? 0.0 : mag;
    }
    break;
  case ConeBlock::Kind::SecondOrder: {
    Vector dir = rng.normal_vector(blk.dim - 1);
    dir /= dir.norm();
    const double a = rng.uniform(0.5, 1.5), b = rng.uniform(0.5, 1.5);
    s.head(blk.dim - 1) = a * dir;
    s(blk.dim - 1) = a;
    y.head(blk.dim - 1) = -b * dir;
    y(blk.dim - 1) = b;
    break;
  }
  }
}

} // namespace

ProblemInstance cone_program_instance(ConeProgram prob, std::uint64_t seed, double tol,
                                      std::optional<Vector> planted) {
  prob.validate();
  auto op = make_drs(prob);
  ProblemInstance inst;
  inst.name = "cone-program";
  inst.seed = seed;
  inst.x0 = Vector::Zero(prob.embedding_dim());
  inst.x0(prob.embedding_dim() - 1) = 1.0;
  if (planted)
    inst.known_fixed_points.push_back(*planted);
  inst.extra_stop = [op, tol](const Vector &u) { return cone_residuals(*op, u).below(tol); };
  inst.report = [op](const Vector &u) {
    return nlohmann::json{{"residuals", residuals_json(cone_residuals(*op, u))}};
  };
  inst.preferred_tol_rel = 0.0;
  inst.metadata = {{"problem", "cone-program"},
                   {"m", prob.m()},
                   {"n", prob.n()},
                   {"cone", layout_json(prob.cone)},
                   {"residual_tol", tol}};
  inst.op = op;
  inst.data = std::move(prob);
  return inst;
}

ProblemInstance build_cone_program(const ConeProgramOptions &opts) {
  if (opts.m <= 0 || opts.n <= 0)
    throw UsageError("cone program: m and n must be positive");
  if (opts.n > opts.m)
    throw UsageError("cone program: need n <= m for full column rank");
  if (!(opts.density > 0.0 && opts.density <= 1.0))
    throw UsageError("cone program: density must lie in (0, 1]");
  if (!(opts.sigma_max >= 0.0))
    throw UsageError("cone program: sigma_max must be nonnegative");
  if (!(opts.cond >= 1.0))
    throw UsageError("cone program: cond must be at least 1");
  const Index m = opts.m, n = opts.n;
  Rng rng(opts.seed);

  // A = U S V^T with log-spaced singular values, then masked to the density
  const Matrix U = random_orthogonal(rng, m);
  const Matrix V = random_orthogonal(rng, n);
  Vector sv(n);
  for (Index i = 0; i < n; ++i)
    sv(i) = n > 1 ? std::pow(opts.cond, -static_cast<double>(i) / static_cast<double>(n - 1)) : 1.0;
  sv *= opts.sigma_max > 0.0 ? opts.sigma_max : std::sqrt(static_cast<double>(m));
  Matrix A = U.leftCols(n) * sv.asDiagonal() * V.transpose();
  if (opts.density < 1.0) {
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < n; ++j)
        if (rng.uniform() >= opts.density)
          A(i, j) = 0.0;
  }
  const Eigen::JacobiSVD<Matrix> svd(A);
  const Vector achieved = svd.singularValues();
  const double smax = achieved(0), smin = achieved(n - 1);
  if (!(smin > 1e-10 * smax))
    throw ConstructionError("cone program: masked A is rank deficient (density " +
                            std::to_string(opts.density) + " too low for " +
                            std::to_string(m) + "x" + std::to_string(n) + ")");

  ConeProgram prob;
  prob.A = std::move(A);
  prob.cone = opts.cone.empty() ? default_cone_layout(opts.m) : opts.cone;
  const Vector x_star = rng.normal_vector(n);
  Vector s_star(m), y_star(m);
  Index offset = 0;
  for (const auto &blk : prob.cone) {
    if (offset + blk.dim > m)
      throw UsageError("cone program: cone layout exceeds m rows");
    plant_block(rng, blk, s_star.segment(offset, blk.dim), y_star.segment(offset, blk.dim));
    offset += blk.dim;
  }
  prob.b = prob.A * x_star + s_star;
  prob.c = -(prob.A.transpose() * y_star);

  // fixed point u* = z + Q z for z = (x*, y*, 1): (x*, y* + s*, 1)
  Vector u_star(prob.embedding_dim());
  u_star << x_star, y_star + s_star, 1.0;

  ProblemInstance inst = cone_program_instance(std::move(prob), opts.seed, opts.tol, u_star);
  inst.metadata["seed"] = opts.seed;
  inst.metadata["generator"] = std::string(Rng::kName);
  inst.metadata["density"] = opts.density;
  inst.metadata["target_cond"] = opts.cond;
  inst.metadata["achieved_cond"] = smax / smin;
  return inst;
}

ProblemInstance build_cone_program(int m, int n, double density, double cond,
                                   std::uint64_t seed) {
  ConeProgramOptions opts;
  opts.m = m;
  opts.n = n;
  opts.density = density;
  opts.cond = cond;
  opts.seed = seed;
  return build_cone_program(opts);
}

// --- oscillating masses ----------------------------------------------------

std::pair<Matrix, Matrix> masses_continuous(int K) {
  if (K <= 0)
    throw UsageError("masses: K must be positive");
  const Index nm = 2 * K;
  Matrix stiffness = Matrix::Zero(nm, nm);
  for (Index i = 0; i < nm; ++i) {
    stiffness(i, i) = 2.0;
    if (i > 0)
      stiffness(i, i - 1) = -1.0;
    if (i + 1 < nm)
      stiffness(i, i + 1) = -1.0;
  }
  Matrix Ac = Matrix::Zero(2 * nm, 2 * nm);
  Ac.topRightCorner(nm, nm) = Matrix::Identity(nm, nm);
  Ac.bottomLeftCorner(nm, nm) = -stiffness;
  Ac.bottomRightCorner(nm, nm) = -0.1 * Matrix::Identity(nm, nm);
  Matrix Bc = Matrix::Zero(2 * nm, K);
  for (Index i = 0; i < K; ++i) {
    Bc(nm + 2 * i, i) = 1.0;
    Bc(nm + 2 * i + 1, i) = -1.0;
  }
  return {Ac, Bc};
}

std::pair<Matrix, Matrix> zero_order_hold(const Matrix &Ac, const Matrix &Bc, double Ts) {
  if (!(Ts > 0.0))
    throw UsageError("zero-order hold: sampling time must be positive");
  const Index nx = Ac.rows(), nu = Bc.cols();
  Matrix aug = Matrix::Zero(nx + nu, nx + nu);
  aug.topLeftCorner(nx, nx) = Ac * Ts;
  aug.topRightCorner(nx, nu) = Bc * Ts;
  const Matrix e = aug.exp();
  return {e.topLeftCorner(nx, nx), e.topRightCorner(nx, nu)};
}

ProblemInstance optimal_control_instance(OptimalControl prob, std::string name,
                                         std::uint64_t seed) {
  prob.validate();
  auto op = make_vu_condat(prob);
  ProblemInstance inst;
  inst.name = std::move(name);
  inst.seed = seed;
  inst.x0 = Vector::Zero(op->dim());
  const auto shared = std::make_shared<const OptimalControl>(prob);
  inst.report = [shared, nu = op->primal_dim()](const Vector &z) {
    const Vector u = z.head(nu);
    const Vector x = shared->simulate(u);
    double viol = 0.0;
    for (int t = 0; t < shared->horizon; ++t) {
      const auto xt = x.segment(t * shared->nx(), shared->nx());
      viol = std::max(viol, (xt - shared->x_hi).maxCoeff());
      viol = std::max(viol, (shared->x_lo - xt).maxCoeff());
    }
    return nlohmann::json{{"cost", shared->cost(u)}, {"state_violation", std::max(0.0, viol)}};
  };
  if ((prob.x0.array() == 0.0).all())
    inst.known_fixed_points.push_back(Vector::Zero(op->dim()));
  const auto &st = op->steps();
  inst.metadata = {{"problem", inst.name},
                   {"nx", prob.nx()},
                   {"nu", prob.nu()},
                   {"horizon", prob.horizon},
                   {"tau", st.tau},
                   {"sigma", st.sigma},
                   {"grad_lipschitz", st.grad_lipschitz},
                   {"L_norm_sq", st.L_norm_sq},
                   {"alpha", op->alpha()}};
  inst.op = op;
  inst.data = std::move(prob);
  return inst;
}

std::optional<Vector> find_feasible_input(const OptimalControl &prob, double margin,
                                          int max_iter) {
  prob.validate();
  const Vector lo = prob.x_lo.array() + margin, hi = prob.x_hi.array() - margin;
  if ((lo.array() > hi.array()).any())
    throw UsageError("feasibility search: margin exceeds the state box");
  const Index nx = prob.nx(), nu = prob.nu();
  const int N = prob.horizon;
  auto inside = [&](const Vector &x, const Vector &a, const Vector &b) {
    for (int t = 0; t < N; ++t) {
      const auto xt = x.segment(t * nx, nx);
      if ((xt.array() < a.array()).any() || (xt.array() > b.array()).any())
        return false;
    }
    return true;
  };
  auto clamp_inputs = [&](Vector &u) {
    for (int t = 0; t < N; ++t)
      u.segment(t * nu, nu) = u.segment(t * nu, nu).cwiseMax(prob.u_lo).cwiseMin(prob.u_hi);
  };
  const double step =
      1.0 / (kNormInflation *
             power_iteration([&](const Vector &v) -> Vector { return prob.apply_Lt(prob.apply_L(v)); },
                             prob.input_dim()));
  const Vector b = prob.free_response();
  Vector u = Vector::Zero(prob.input_dim());
  clamp_inputs(u);
  for (int it = 0; it <= max_iter; ++it) {
    const Vector x = prob.apply_L(u) + b;
    if (inside(prob.simulate(u), prob.x_lo, prob.x_hi))
      return u;
    Vector excess = x;
    for (int t = 0; t < N; ++t)
      excess.segment(t * nx, nx) -= x.segment(t * nx, nx).cwiseMax(lo).cwiseMin(hi);
    u -= step * prob.apply_Lt(excess);
    clamp_inputs(u);
  }
  return std::nullopt;
}

ProblemInstance build_oscillating_masses(const MassesOptions &opts) {
  if (opts.K <= 0 || opts.N <= 0)
    throw UsageError("masses: K and N must be positive");
  const auto [Ac, Bc] = masses_continuous(opts.K);
  auto [Ad, Bd] = zero_order_hold(Ac, Bc, opts.Ts);
  const Index nx = 4 * opts.K, nu = opts.K;
  Rng rng(opts.seed);
  OptimalControl prob;
  prob.A = std::move(Ad);
  prob.B = std::move(Bd);
  prob.horizon = opts.N;
  prob.q_diag = rng.uniform_vector(nx, opts.q_lo, opts.q_hi);
  prob.u_lo = Vector::Constant(nu, -2.0);
  prob.u_hi = Vector::Constant(nu, 2.0);
  prob.x_lo = Vector::Constant(nx, -5.0);
  prob.x_hi = Vector::Constant(nx, 5.0);
  int attempts = 0;
  if (opts.initial_state) {
    if (opts.initial_state->size() != nx)
      throw UsageError("masses: initial state must have 4K entries");
    prob.x0 = *opts.initial_state;
  } else {
    for (;;) {
      if (++attempts > opts.max_attempts)
        throw ConstructionError("masses: no feasible initial state found in " +
                                std::to_string(opts.max_attempts) + " draws");
      prob.x0 = rng.uniform_vector(nx, -5.0, 5.0);
      if (find_feasible_input(prob))
        break;
    }
  }

  ProblemInstance inst = optimal_control_instance(std::move(prob), "masses", opts.seed);
  inst.metadata["K"] = opts.K;
  inst.metadata["N"] = opts.N;
  inst.metadata["Ts"] = opts.Ts;
  inst.metadata["x0_draws"] = attempts;
  inst.metadata["seed"] = opts.seed;
  inst.metadata["generator"] = std::string(Rng::kName);
  return inst;
}

ProblemInstance build_oscillating_masses(int K, int N, std::uint64_t seed) {
  MassesOptions opts;
  opts.K = K;
  opts.N = N;
  opts.seed = seed;
  return build_oscillating_masses(opts);
}

const std::vector<std::string> &problem_names() {
  static const std::vector<std::string> names{"cones", "ball-line", "soc",
                                              "lasso", "cone-program", "masses"};
  return names;
}

} // namespace supermann
