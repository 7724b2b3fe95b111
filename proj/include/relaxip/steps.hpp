#pragma once

#include <string>

#include "relaxip/relaxation.hpp"

namespace relaxip {

/**
 * Result of the normal (feasibility) subproblem
 *
 *   min  qN(d; rho) = 1/2 rho d'Qd + ||C + JC' d||
 *   s.t. ||R d|| <= xi ||R^{-1} JC C||,
 *
 * solved on the ray d(a) = -a * R^{-2} JC C, a in [0, xi], which contains
 * the Cauchy point and therefore inherits its guaranteed decrease.
 */
struct NormalStepResult {
  Vec p;                          ///< step, length n + 2m
  double model_reduction = 0.0;   ///< ||C|| - qN(p; rho)
  double eta = 0.0;               ///< ||R^{-1}JC C||^2 / ||JC' R^{-2} JC C||^2
  double cauchy_reduction = 0.0;  ///< guaranteed lower bound at the Cauchy pt
  /// True when JC C (or its image under JC') vanishes while C != 0: the
  /// violation is stationary and no normal progress is possible.
  bool degenerate = false;
};

NormalStepResult normal_step(const Vec& C, const Mat& JC, const QOperator& Q,
                             const ScalingR& R, double rho, double xi);

/**
 * Result of the tangential equality-constrained QP
 *
 *   min  q(d) = gradF' d + 1/2 d'Qd
 *   s.t. JC'(d - p) = 0,
 *
 * solved by eliminating d_s and d_t through the diagonal (z-t) and (c+t)
 * constraint blocks and solving a reduced KKT system in d_x with the
 * equality Jacobian Jh.  Multipliers for all three blocks are recovered so
 * that gradF + Qd + JC u = 0 holds at the solution.
 */
struct TangentialStepResult {
  Vec d;            ///< step, length n + 2m
  Multipliers u;    ///< (lambda, beta, nu) satisfying full-space stationarity
  double q_value = 0.0;  ///< q(d)
  bool failed = false;   ///< reduced KKT unsolvable after regularization
  std::string diagnostic;
};

TangentialStepResult tangential_step(const ModelDerivs& md, const Vec& gradF,
                                     const RelaxPoint& rp,
                                     const BarrierParams& bp,
                                     const QOperator& Q, const Vec& p);

}  // namespace relaxip
