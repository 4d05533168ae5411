// Times the serial and OpenMP kernels on a few sizes and checks they agree.
// Usage: bench_kernels [repeats]

#include "supermann/kernels.hpp"
#include "supermann/rng.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <omp.h>

using namespace supermann;
namespace k = supermann::kernels;

namespace {

double seconds(const std::function<void()> &f, int repeats) {
  f(); // warm-up
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < repeats; ++r)
    f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / repeats;
}

void row(const char *name, std::size_t n, double ts, double tp, double diff) {
  std::printf("%-16s %10zu %12.3e %12.3e %8.2fx %10.2e\n", name, n, ts, tp, ts / tp, diff);
}

Eigen::VectorXd random_vector(Rng &rng, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = rng.normal();
  return v;
}

} // namespace

int main(int argc, char **argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 20;
  Rng rng(7);
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-16s %10s %12s %12s %9s %10s\n", "kernel", "size", "serial_s", "parallel_s",
              "speedup", "max_diff");

  for (Eigen::Index n : {Eigen::Index(10000), Eigen::Index(1000000), Eigen::Index(8000000)}) {
    const Eigen::VectorXd a = random_vector(rng, n), b = random_vector(rng, n);
    const auto sz = static_cast<std::size_t>(n);
    double ds = 0, dp = 0;
    const double ts = seconds([&] { ds = k::serial::dot(k::view(a), k::view(b)); }, repeats);
    const double tp = seconds([&] { dp = k::parallel::dot(k::view(a), k::view(b)); }, repeats);
    row("dot", sz, ts, tp, std::abs(ds - dp));

    Eigen::VectorXd ys = b, yp = b;
    const double ta = seconds([&] { k::serial::axpy(1e-9, k::view(a), k::view(ys)); }, repeats);
    const double tb = seconds([&] { k::parallel::axpy(1e-9, k::view(a), k::view(yp)); }, repeats);
    row("axpy", sz, ta, tb, (ys - yp).cwiseAbs().maxCoeff());

    Eigen::VectorXd ss(n), sp(n);
    const double tc =
        seconds([&] { k::serial::soft_threshold(k::view(a), 0.5, k::view(ss)); }, repeats);
    const double td =
        seconds([&] { k::parallel::soft_threshold(k::view(a), 0.5, k::view(sp)); }, repeats);
    row("soft_threshold", sz, tc, td, (ss - sp).cwiseAbs().maxCoeff());
  }

  for (Eigen::Index n : {Eigen::Index(200), Eigen::Index(2000)}) {
    Eigen::MatrixXd A(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      A.col(j) = random_vector(rng, n);
    const Eigen::VectorXd x = random_vector(rng, n);
    Eigen::VectorXd ys(n), yp(n);
    const double ts = seconds([&] { k::serial::gemv(A, k::view(x), k::view(ys)); }, repeats);
    const double tp = seconds([&] { k::parallel::gemv(A, k::view(x), k::view(yp)); }, repeats);
    row("gemv", static_cast<std::size_t>(n * n), ts, tp, (ys - yp).cwiseAbs().maxCoeff());
    const double tt =
        seconds([&] { k::serial::gemv_transposed(A, k::view(x), k::view(ys)); }, repeats);
    const double tu =
        seconds([&] { k::parallel::gemv_transposed(A, k::view(x), k::view(yp)); }, repeats);
    row("gemv_transposed", static_cast<std::size_t>(n * n), tt, tu,
        (ys - yp).cwiseAbs().maxCoeff());
  }
  return 0;
}
