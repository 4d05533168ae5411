#include "supermann/problem_data.hpp"

#include "supermann/errors.hpp"

namespace supermann {

std::string cone_kind_name(ConeBlock::Kind kind) {
  switch (kind) {
  case ConeBlock::Kind::Zero:
    return "zero";
  case ConeBlock::Kind::Free:
    return "free";
  case ConeBlock::Kind::Orthant:
    return "orthant";
  case ConeBlock::Kind::SecondOrder:
    return "soc";
  }
  return "unknown";
}

ConeBlock::Kind cone_kind_from_name(const std::string &name) {
  if (name == "zero")
    return ConeBlock::Kind::Zero;
  if (name == "free")
    return ConeBlock::Kind::Free;
  if (name == "orthant")
    return ConeBlock::Kind::Orthant;
  if (name == "soc")
    return ConeBlock::Kind::SecondOrder;
  throw UsageError("unknown cone kind '" + name + "' (expected zero, free, orthant, soc)");
}

namespace {

ConvexSet block_set(const ConeBlock &block, bool dual) {
  switch (block.kind) {
  case ConeBlock::Kind::Zero:
    return dual ? ConvexSet::free_cone(block.dim) : ConvexSet::zero_cone(block.dim);
  case ConeBlock::Kind::Free:
    return dual ? ConvexSet::zero_cone(block.dim) : ConvexSet::free_cone(block.dim);
  case ConeBlock::Kind::Orthant:
    return ConvexSet::nonneg_orthant(block.dim);
  case ConeBlock::Kind::SecondOrder:
    return ConvexSet::second_order_cone(block.dim);
  }
  throw UsageError("unsupported cone block");
}

ConvexSet cone_product(const std::vector<ConeBlock> &blocks, bool dual) {
  std::vector<ConvexSet> parts;
  parts.reserve(blocks.size());
  for (const auto &b : blocks)
    parts.push_back(block_set(b, dual));
  return ConvexSet::product(std::move(parts));
}

} // namespace

ConvexSet ConeProgram::primal_cone() const { return cone_product(cone, false); }
ConvexSet ConeProgram::dual_cone() const { return cone_product(cone, true); }

ConvexSet ConeProgram::embedding_cone() const {
  std::vector<ConvexSet> parts;
  parts.push_back(ConvexSet::free_cone(n()));
  for (const auto &b : cone)
    parts.push_back(block_set(b, true));
  parts.push_back(ConvexSet::nonneg_orthant(1));
  return ConvexSet::product(std::move(parts));
}

Matrix ConeProgram::embedding_matrix() const {
  const Index nn = n(), mm = m(), k = embedding_dim();
  Matrix Q = Matrix::Zero(k, k);
  Q.block(0, nn, nn, mm) = A.transpose();
  Q.block(0, nn + mm, nn, 1) = c;
  Q.block(nn, 0, mm, nn) = -A;
  Q.block(nn, nn + mm, mm, 1) = b;
  Q.block(nn + mm, 0, 1, nn) = -c.transpose();
  Q.block(nn + mm, nn, 1, mm) = -b.transpose();
  return Q;
}

void ConeProgram::validate() const {
  if (A.rows() == 0 || A.cols() == 0)
    throw UsageError("cone program: A must be nonempty");
  if (b.size() != A.rows() || c.size() != A.cols())
    throw UsageError("cone program: b and c must match the shape of A");
  Index total = 0;
  for (const auto &blk : cone) {
    if (blk.dim <= 0)
      throw UsageError("cone program: cone blocks need positive dimension");
    if (blk.kind == ConeBlock::Kind::SecondOrder && blk.dim < 2)
      throw UsageError("cone program: second-order blocks need dimension >= 2");
    total += blk.dim;
  }
  if (total != A.rows())
    throw UsageError("cone program: cone dimensions must add up to the rows of A");
}

void Lasso::validate() const {
  if (A.rows() == 0 || A.cols() == 0)
    throw UsageError("lasso: A must be nonempty");
  if (b.size() != A.rows())
    throw UsageError("lasso: b must have one entry per row of A");
  if (!(nu > 0.0))
    throw UsageError("lasso: nu must be positive");
}

Vector OptimalControl::apply_L(const Vector &u) const {
  const Index n_x = nx(), n_u = nu();
  Vector out(state_dim());
  Vector x = Vector::Zero(n_x);
  for (int t = 0; t < horizon; ++t) {
    x = A * x + B * u.segment(t * n_u, n_u);
    out.segment(t * n_x, n_x) = x;
  }
  return out;
}

Vector OptimalControl::apply_Lt(const Vector &v) const {
  const Index n_x = nx(), n_u = nu();
  Vector out(input_dim());
  Vector mu = Vector::Zero(n_x);
  for (int t = horizon - 1; t >= 0; --t) {
    mu = v.segment(t * n_x, n_x) + A.transpose() * mu;
    out.segment(t * n_u, n_u) = B.transpose() * mu;
  }
  return out;
}

Vector OptimalControl::free_response() const {
  const Index n_x = nx();
  Vector out(state_dim());
  Vector x = x0;
  for (int t = 0; t < horizon; ++t) {
    x = A * x;
    out.segment(t * n_x, n_x) = x;
  }
  return out;
}

Vector OptimalControl::simulate(const Vector &u) const {
  const Index n_x = nx(), n_u = nu();
  Vector out(state_dim());
  Vector x = x0;
  for (int t = 0; t < horizon; ++t) {
    Vector next = A * x;
    next.noalias() += B * u.segment(t * n_u, n_u);
    x = next;
    out.segment(t * n_x, n_x) = x;
  }
  return out;
}

double OptimalControl::cost(const Vector &u) const {
  const Vector x = simulate(u);
  double total = 0.5 * u.squaredNorm();
  for (int t = 0; t < horizon; ++t)
    total += 0.5 * x.segment(t * nx(), nx()).cwiseAbs2().dot(q_diag);
  return total;
}

void OptimalControl::validate() const {
  if (A.rows() == 0 || A.rows() != A.cols())
    throw UsageError("optimal control: A must be square and nonempty");
  if (B.rows() != A.rows() || B.cols() == 0)
    throw UsageError("optimal control: B must have nx rows and at least one column");
  if (horizon <= 0)
    throw UsageError("optimal control: horizon must be positive");
  if (x0.size() != nx() || q_diag.size() != nx() || x_lo.size() != nx() || x_hi.size() != nx())
    throw UsageError("optimal control: state-sized vectors must have nx entries");
  if (u_lo.size() != nu() || u_hi.size() != nu())
    throw UsageError("optimal control: input bounds must have nu entries");
  if ((q_diag.array() < 0.0).any())
    throw UsageError("optimal control: state weights must be nonnegative");
  if ((u_lo.array() > u_hi.array()).any() || (x_lo.array() > x_hi.array()).any())
    throw UsageError("optimal control: bounds require lo <= hi");
}

} // namespace supermann
