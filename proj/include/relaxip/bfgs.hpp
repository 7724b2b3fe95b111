#pragma once

#include "relaxip/types.hpp"

namespace relaxip {

/**
 * Positive-definite quasi-Newton approximation of the Lagrangian Hessian's
 * x-block, maintained with Powell's damped BFGS formula.  Damping bends the
 * gradient difference toward B*s just enough to keep the curvature update
 * positive, so B stays positive definite regardless of the sign of s'q.
 */
struct BfgsState {
  Mat B;
  double damping_threshold = 0.2;  ///< damping kicks in when s'q < 0.2 s'Bs
  double gamma = 1e-8;             ///< Rayleigh-quotient floor guarded in tests
  double cap = 1e8;                ///< spectral ceiling; breach resets B to I

  explicit BfgsState(int n) : B(Mat::Identity(n, n)) {}
};

/**
 * One damped update with s = x_next - x and q the Lagrangian-gradient
 * difference at fixed new multipliers.  Skipped entirely (B unchanged) when
 * ||s|| <= 1e-14 or s'Bs <= 1e-16.  The result is kept inside the bounded,
 * uniformly positive-definite regime the line-search model presumes:
 * eigenvalues below gamma are raised to gamma, and if the top eigenvalue
 * exceeds cap the approximation is discarded and restarted from the
 * identity.  Repeated damped updates against persistent negative curvature
 * can otherwise inflate the spectrum without bound, freezing later steps.
 */
void damped_bfgs_update(BfgsState& state, const Vec& step,
                        const Vec& grad_diff);

}  // namespace relaxip
