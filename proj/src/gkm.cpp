#include "supermann/gkm.hpp"

#include "supermann/errors.hpp"

#include <cmath>

namespace supermann {

double separation_rho(const Vector &x, const Vector &w, const Vector &Rw, double alpha,
                      const Metric &m) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw UsageError("separation_rho: alpha must lie in (0, 1]");
  return m.squared_norm(Rw) - 2.0 * alpha * m.inner(Rw, w - x);
}

Vector gkm_update(const Vector &x, const Vector &w, const Vector &Rw, double rho, double lambda,
                  const Metric &m) {
  if (w.size() != x.size())
    throw UsageError("gkm_update: dimension mismatch");
  const double rw_sq = m.squared_norm(Rw);
  if (rw_sq == 0.0 || rho <= 0.0)
    return x;
  return x - (lambda * rho / rw_sq) * Rw;
}

GkmCandidate make_candidate(const Vector &x, const Vector &w, const Vector &Rw, double norm_Rx,
                            double alpha, const Metric &m) {
  GkmCandidate c{x, w, Rw, separation_rho(x, w, Rw, alpha, m), m.norm(Rw), norm_Rx};
  return c;
}

} // namespace supermann
