#pragma once

// Separating-halfspace machinery for generalized KM updates.
//
// For a trial point w with residual Rw, every fixed point z satisfies
//   ||Rw||^2 - 2 alpha <Rw, w - z> <= 0,
// so the halfspace C_w = {z : ||Rw||^2 - 2 alpha <Rw, w - z> <= 0} contains
// fix T. The scalar rho below measures how far the base point x lies on the
// wrong side of it; a relaxed projection of x onto C_w is the GKM update.

#include "supermann/space.hpp"

namespace supermann {

/// rho = ||Rw||^2 - 2 alpha <Rw, w - x>, in the metric m. rho > 0 iff x is not in C_w.
double separation_rho(const Vector &x, const Vector &w, const Vector &Rw, double alpha,
                      const Metric &m);

/// x+ = x - lambda [rho]_+ / ||Rw||^2 Rw; returns x when Rw = 0.
Vector gkm_update(const Vector &x, const Vector &w, const Vector &Rw, double rho,
                  double lambda, const Metric &m);

/// Line-search acceptance test rho >= sigma ||Rw|| ||Rx|| (no slack).
inline bool accepts(double rho, double norm_Rw, double norm_Rx, double sigma) {
  return rho >= sigma * norm_Rw * norm_Rx;
}

/// A candidate trial point together with the quantities the test needs.
struct GkmCandidate {
  Vector x;
  Vector w;
  Vector Rw;
  double rho;
  double norm_Rw;
  double norm_Rx;

  bool is_fixed_point() const { return norm_Rw == 0.0; }
};

GkmCandidate make_candidate(const Vector &x, const Vector &w, const Vector &Rw, double norm_Rx,
                            double alpha, const Metric &m);

} // namespace supermann
