#include "supermann/kernels.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <vector>

namespace supermann::kernels {

namespace {

double shrink(double v, double t) {
  if (v > t)
    return v - t;
  if (v < -t)
    return v + t;
  return 0.0;
}

double chunk_dot(const double *a, const double *b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    s += a[i] * b[i];
  return s;
}

} // namespace

namespace serial {

double dot(ConstSpan a, ConstSpan b) {
  assert(a.size() == b.size());
  const std::size_t n = a.size();
  double total = 0.0;
  for (std::size_t start = 0; start < n; start += kReductionChunk)
    total += chunk_dot(a.data() + start, b.data() + start,
                       std::min(kReductionChunk, n - start));
  return total;
}

void axpy(double a, ConstSpan x, MutSpan y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] += a * x[i];
}

void soft_threshold(ConstSpan in, double threshold, MutSpan out) {
  assert(in.size() == out.size());
  for (std::size_t i = 0; i < in.size(); ++i)
    out[i] = shrink(in[i], threshold);
}

void clamp(ConstSpan in, ConstSpan lo, ConstSpan hi, MutSpan out) {
  assert(in.size() == lo.size() && in.size() == hi.size() && in.size() == out.size());
  for (std::size_t i = 0; i < in.size(); ++i)
    out[i] = std::min(std::max(in[i], lo[i]), hi[i]);
}

void gemv(const Eigen::MatrixXd &A, ConstSpan x, MutSpan y) {
  const auto rows = static_cast<std::size_t>(A.rows());
  const auto cols = static_cast<std::size_t>(A.cols());
  assert(x.size() == cols && y.size() == rows);
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t j = 0; j < cols; ++j) {
    const double *col = A.data() + j * rows;
    const double xj = x[j];
    for (std::size_t i = 0; i < rows; ++i)
      y[i] += col[i] * xj;
  }
}

void gemv_transposed(const Eigen::MatrixXd &A, ConstSpan x, MutSpan y) {
  const auto rows = static_cast<std::size_t>(A.rows());
  const auto cols = static_cast<std::size_t>(A.cols());
  assert(x.size() == rows && y.size() == cols);
  for (std::size_t j = 0; j < cols; ++j)
    y[j] = chunk_dot(A.data() + j * rows, x.data(), rows);
}

} // namespace serial

namespace parallel {

double dot(ConstSpan a, ConstSpan b) {
  assert(a.size() == b.size());
  const std::size_t n = a.size();
  if (n < kParallelThreshold)
    return serial::dot(a, b);
  const std::size_t chunks = (n + kReductionChunk - 1) / kReductionChunk;
  std::vector<double> partial(chunks);
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t start = c * kReductionChunk;
    partial[c] = chunk_dot(a.data() + start, b.data() + start,
                           std::min(kReductionChunk, n - start));
  }
  double total = 0.0;
  for (double p : partial)
    total += p;
  return total;
}

void axpy(double a, ConstSpan x, MutSpan y) {
  assert(x.size() == y.size());
  const std::size_t n = x.size();
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::size_t i = 0; i < n; ++i)
    y[i] += a * x[i];
}

void soft_threshold(ConstSpan in, double threshold, MutSpan out) {
  assert(in.size() == out.size());
  const std::size_t n = in.size();
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::size_t i = 0; i < n; ++i)
    out[i] = shrink(in[i], threshold);
}

void clamp(ConstSpan in, ConstSpan lo, ConstSpan hi, MutSpan out) {
  assert(in.size() == lo.size() && in.size() == hi.size() && in.size() == out.size());
  const std::size_t n = in.size();
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::min(std::max(in[i], lo[i]), hi[i]);
}

void gemv(const Eigen::MatrixXd &A, ConstSpan x, MutSpan y) {
  const auto rows = static_cast<std::size_t>(A.rows());
  const auto cols = static_cast<std::size_t>(A.cols());
  assert(x.size() == cols && y.size() == rows);
  // Row blocks are independent; within a block the column order matches serial.
  constexpr std::size_t block = 256;
  const std::size_t blocks = (rows + block - 1) / block;
#pragma omp parallel for schedule(static) if (rows * cols >= kParallelThreshold * 16)
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t begin = b * block;
    const std::size_t end = std::min(rows, begin + block);
    for (std::size_t i = begin; i < end; ++i)
      y[i] = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      const double *col = A.data() + j * rows;
      const double xj = x[j];
      for (std::size_t i = begin; i < end; ++i)
        y[i] += col[i] * xj;
    }
  }
}

void gemv_transposed(const Eigen::MatrixXd &A, ConstSpan x, MutSpan y) {
  const auto rows = static_cast<std::size_t>(A.rows());
  const auto cols = static_cast<std::size_t>(A.cols());
  assert(x.size() == rows && y.size() == cols);
#pragma omp parallel for schedule(static) if (rows * cols >= kParallelThreshold * 16)
  for (std::size_t j = 0; j < cols; ++j)
    y[j] = chunk_dot(A.data() + j * rows, x.data(), rows);
}

} // namespace parallel

double dot(const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
  return parallel::dot(view(a), view(b));
}

double squared_norm(const Eigen::VectorXd &a) { return parallel::dot(view(a), view(a)); }

Eigen::VectorXd soft_threshold(const Eigen::VectorXd &in, double threshold) {
  Eigen::VectorXd out(in.size());
  parallel::soft_threshold(view(in), threshold, view(out));
  return out;
}

Eigen::VectorXd clamp(const Eigen::VectorXd &in, const Eigen::VectorXd &lo,
                      const Eigen::VectorXd &hi) {
  Eigen::VectorXd out(in.size());
  parallel::clamp(view(in), view(lo), view(hi), view(out));
  return out;
}

Eigen::VectorXd gemv(const Eigen::MatrixXd &A, const Eigen::VectorXd &x) {
  Eigen::VectorXd y(A.rows());
  parallel::gemv(A, view(x), view(y));
  return y;
}

Eigen::VectorXd gemv_transposed(const Eigen::MatrixXd &A, const Eigen::VectorXd &x) {
  Eigen::VectorXd y(A.cols());
  parallel::gemv_transposed(A, view(x), view(y));
  return y;
}

} // namespace supermann::kernels
