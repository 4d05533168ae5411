#pragma once

// Dense vector and matrix kernels used on the hot path of every operator.
//
// Two implementations are kept side by side. `serial` is the reference used
// by the tests; `parallel` spreads the loops over OpenMP threads. Reductions
// in `parallel` are evaluated over fixed-size chunks whose partial sums are
// combined in chunk order, so the result does not depend on the number of
// threads. The unqualified functions dispatch to `parallel`.

#include <Eigen/Dense>
#include <cstddef>
#include <span>

namespace supermann::kernels {

using ConstSpan = std::span<const double>;
using MutSpan = std::span<double>;

/// Chunk length used by chunked reductions (both implementations agree on it).
inline constexpr std::size_t kReductionChunk = 1024;
/// Below this length the parallel kernels run on the calling thread only.
inline constexpr std::size_t kParallelThreshold = 4096;

namespace serial {
double dot(ConstSpan a, ConstSpan b);
void axpy(double a, ConstSpan x, MutSpan y);
void soft_threshold(ConstSpan in, double threshold, MutSpan out);
void clamp(ConstSpan in, ConstSpan lo, ConstSpan hi, MutSpan out);
void gemv(const Eigen::MatrixXd &A, ConstSpan x, MutSpan y);
void gemv_transposed(const Eigen::MatrixXd &A, ConstSpan x, MutSpan y);
} // namespace serial

namespace parallel {
double dot(ConstSpan a, ConstSpan b);
void axpy(double a, ConstSpan x, MutSpan y);
void soft_threshold(ConstSpan in, double threshold, MutSpan out);
void clamp(ConstSpan in, ConstSpan lo, ConstSpan hi, MutSpan out);
void gemv(const Eigen::MatrixXd &A, ConstSpan x, MutSpan y);
void gemv_transposed(const Eigen::MatrixXd &A, ConstSpan x, MutSpan y);
} // namespace parallel

inline ConstSpan view(const Eigen::VectorXd &v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}
inline MutSpan view(Eigen::VectorXd &v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

double dot(const Eigen::VectorXd &a, const Eigen::VectorXd &b);
double squared_norm(const Eigen::VectorXd &a);
Eigen::VectorXd soft_threshold(const Eigen::VectorXd &in, double threshold);
Eigen::VectorXd clamp(const Eigen::VectorXd &in, const Eigen::VectorXd &lo,
                      const Eigen::VectorXd &hi);
/// y = A x
Eigen::VectorXd gemv(const Eigen::MatrixXd &A, const Eigen::VectorXd &x);
/// y = A^T x
Eigen::VectorXd gemv_transposed(const Eigen::MatrixXd &A, const Eigen::VectorXd &x);

} // namespace supermann::kernels
