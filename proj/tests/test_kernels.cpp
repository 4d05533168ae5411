#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "supermann/kernels.hpp"
#include "supermann/rng.hpp"

#include <omp.h>

using namespace supermann;
namespace k = supermann::kernels;

TEST_CASE("serial kernels on small hand examples") {
  Eigen::VectorXd a(3), b(3);
  a << 1, 2, 3;
  b << 4, -5, 6;
  CHECK(k::serial::dot(k::view(a), k::view(b)) == 12.0);

  Eigen::VectorXd y = b;
  k::serial::axpy(2.0, k::view(a), k::view(y));
  CHECK(y(0) == 6.0);
  CHECK(y(1) == -1.0);
  CHECK(y(2) == 12.0);

  Eigen::VectorXd in(4), out(4);
  in << 3, -0.5, -4, 1;
  k::serial::soft_threshold(k::view(in), 1.0, k::view(out));
  CHECK(out(0) == 2.0);
  CHECK(out(1) == 0.0);
  CHECK(out(2) == -3.0);
  CHECK(out(3) == 0.0);

  Eigen::VectorXd lo = Eigen::VectorXd::Constant(4, -1), hi = Eigen::VectorXd::Constant(4, 2);
  k::serial::clamp(k::view(in), k::view(lo), k::view(hi), k::view(out));
  CHECK(out(0) == 2.0);
  CHECK(out(1) == -0.5);
  CHECK(out(2) == -1.0);
}

TEST_CASE("gemv kernels agree with Eigen") {
  Rng rng(3);
  const Eigen::MatrixXd A = rng.normal_matrix(37, 23);
  const Eigen::VectorXd x = rng.normal_vector(23), z = rng.normal_vector(37);
  CHECK((k::gemv(A, x) - A * x).norm() <= 1e-12 * (A * x).norm());
  CHECK((k::gemv_transposed(A, z) - A.transpose() * z).norm() <=
        1e-12 * (A.transpose() * z).norm());
}

TEST_CASE("parallel kernels are bitwise equal to serial ones for any thread count") {
  Rng rng(11);
  const Eigen::Index n = 50000; // above the parallel threshold
  const Eigen::VectorXd a = rng.normal_vector(n), b = rng.normal_vector(n);
  const double ref = k::serial::dot(k::view(a), k::view(b));
  const int saved = omp_get_max_threads();
  for (int threads : {1, 2, 3, 7}) {
    omp_set_num_threads(threads);
    CHECK(k::parallel::dot(k::view(a), k::view(b)) == ref);

    Eigen::VectorXd ys = b, yp = b;
    k::serial::axpy(0.3, k::view(a), k::view(ys));
    k::parallel::axpy(0.3, k::view(a), k::view(yp));
    CHECK(ys == yp);

    Eigen::VectorXd ss(n), sp(n);
    k::serial::soft_threshold(k::view(a), 0.7, k::view(ss));
    k::parallel::soft_threshold(k::view(a), 0.7, k::view(sp));
    CHECK(ss == sp);

    const Eigen::MatrixXd A = rng.normal_matrix(300, 200);
    const Eigen::VectorXd x = rng.normal_vector(200), w = rng.normal_vector(300);
    Eigen::VectorXd g1(300), g2(300), t1(200), t2(200);
    k::serial::gemv(A, k::view(x), k::view(g1));
    k::parallel::gemv(A, k::view(x), k::view(g2));
    CHECK(g1 == g2);
    k::serial::gemv_transposed(A, k::view(w), k::view(t1));
    k::parallel::gemv_transposed(A, k::view(w), k::view(t2));
    CHECK(t1 == t2);
  }
  omp_set_num_threads(saved);
}

TEST_CASE("dispatching wrappers") {
  Eigen::VectorXd a(2), lo(2), hi(2);
  a << 3, 4;
  lo << 0, 0;
  hi << 1, 10;
  CHECK(k::squared_norm(a) == 25.0);
  CHECK(k::dot(a, a) == 25.0);
  CHECK(k::soft_threshold(a, 1.0)(1) == 3.0);
  CHECK(k::clamp(a, lo, hi)(0) == 1.0);
  CHECK(k::clamp(a, lo, hi)(1) == 4.0);
}

TEST_CASE("empty and tiny inputs") {
  Eigen::VectorXd e(0);
  CHECK(k::parallel::dot(k::view(e), k::view(e)) == 0.0);
  Eigen::VectorXd one(1);
  one << -2;
  CHECK(k::squared_norm(one) == 4.0);
}
