#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string_view>

namespace supermann {

/// Seedable generator with platform-independent output.
///
/// Raw bits come from std::mt19937_64 (fully specified by the standard).
/// Uniforms take the top 53 bits; normals use the Box-Muller transform.
/// The standard library distributions are avoided on purpose since their
/// algorithms are implementation-defined.
class Rng {
public:
  static constexpr std::string_view kName = "mt19937_64/box-muller";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  Eigen::VectorXd normal_vector(Eigen::Index n);
  Eigen::VectorXd uniform_vector(Eigen::Index n, double lo, double hi);
  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Derives an independent stream seed from a base seed and a stream index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

} // namespace supermann
