#pragma once

#include <stdexcept>

#include "relaxip/model.hpp"
#include "relaxip/types.hpp"

namespace relaxip {

/// Barrier parameter mu and scaling parameter tau; both must stay positive
/// whenever relaxation quantities are evaluated.
struct BarrierParams {
  double mu = 0.0;
  double tau = 0.0;

  bool valid() const { return mu > 0.0 && tau > 0.0; }
};

/**
 * Componentwise relaxation pair
 *
 *   z_j = (sqrt((tau*s_j - t_j)^2 + 4*tau*mu) - (tau*s_j - t_j)) / 2,
 *   y_j = (sqrt((tau*s_j - t_j)^2 + 4*tau*mu) + (tau*s_j - t_j)) / 2.
 *
 * Both are strictly positive for any finite (t, s) and satisfy
 * z_j*y_j = tau*mu and z_j - y_j = t_j - tau*s_j.  The smaller of the two
 * roots is recovered as tau*mu / larger-root, which avoids the cancellation
 * the explicit difference formula suffers when |tau*s - t| >> sqrt(tau*mu).
 */
void eval_zy(const Vec& t, const Vec& s, const BarrierParams& bp, Vec& z,
             Vec& y);

/// Diagonals of the partial derivatives of (z, y) with respect to (t, s),
/// expressed through (z, y) alone:
///   dz/dt =  z/(z+y),   dy/dt = -y/(z+y),
///   dz/ds = -tau*z/(z+y), dy/ds =  tau*y/(z+y).
struct ZyDerivs {
  Vec dz_dt;
  Vec dy_dt;
  Vec dz_ds;
  Vec dy_ds;
};

ZyDerivs eval_zy_derivatives(const Vec& z, const Vec& y,
                             const BarrierParams& bp);

/**
 * Extended iterate v = (x, t, s) with everything cached: model values
 * (f, h, c), the relaxation pair (z, y), the barrier objective
 * F = f - mu * sum_j ln z_j and the stacked constraint value
 * C = (h, c + t, z - t).
 *
 * Model values depend only on x; z, y, F, C also depend on (mu, tau), so a
 * point can be rebound to new barrier parameters without re-evaluating the
 * model (see rebind_point).
 */
struct RelaxPoint {
  Vec x, t, s;
  Vec z, y;
  double f = 0.0;
  Vec h, c;
  double F = 0.0;
  Vec C;
};

/// Multiplier estimate w = (lambda, beta, nu) for the three constraint
/// blocks h = 0, c + t = 0, z - t = 0 of the relaxation problem.
struct Multipliers {
  Vec lambda;
  Vec beta;
  Vec nu;
};

/// Evaluates the model at x and assembles a fully cached point.
RelaxPoint make_point(const ProblemModel& p, const Vec& x, const Vec& t,
                      const Vec& s, const BarrierParams& bp);

/// Recomputes z, y, F, C of an existing point under new barrier parameters,
/// reusing the cached model values (no model evaluations).
RelaxPoint rebind_point(const RelaxPoint& rp, const BarrierParams& bp);

/// Model derivatives at x: gradient of f and column-wise Jacobians of h, c.
struct ModelDerivs {
  Vec grad_f;
  Mat Jh;
  Mat Jc;
};

ModelDerivs eval_model_derivs(const ProblemModel& p, const Vec& x);

/// gradient of F:  (grad f, -mu/(z_j+y_j) per t_j, +tau*mu/(z_j+y_j) per s_j)
Vec assemble_gradF(const Vec& grad_f, const Vec& z, const Vec& y,
                   const BarrierParams& bp);

/// Jacobian of C, stored dense with rows (x, t, s) and columns
/// (h, c + t, z - t):
///
///   [ Jh   Jc          0           ]
///   [ 0    I   -(Z+Y)^{-1} Y       ]
///   [ 0    0   -tau (Z+Y)^{-1} Z   ]
Mat assemble_jacC(const Mat& Jh, const Mat& Jc, const Vec& z, const Vec& y,
                  const BarrierParams& bp);

/// Derivative bundle at a point: model derivatives plus the assembled
/// relaxation-problem gradient and Jacobian.
struct RelaxDerivs {
  ModelDerivs md;
  Vec gradF;  ///< size n + 2m
  Mat jacC;   ///< (n + 2m) x (m_e + 2m)
};

RelaxDerivs eval_derivatives(const ProblemModel& p, const RelaxPoint& rp,
                             const BarrierParams& bp);

/// Reassembles gradF / jacC for new barrier parameters from cached model
/// derivatives (no model evaluations).
RelaxDerivs rebind_derivatives(const ModelDerivs& md, const RelaxPoint& rp,
                               const BarrierParams& bp);

/**
 * The quadratic model operator
 *
 *   Q = [ B                                     ]
 *       [    D        -tau D   ]   with D = diag(mu / (z_j + y_j)^2),
 *       [   -tau D   tau^2 D   ]
 *
 * exposed as matrix-vector product and quadratic form; for a direction
 * d = (d_x, d_t, d_s),
 *
 *   d'Qd = d_x' B d_x + sum_j D_j (d_{t,j} - tau d_{s,j})^2,
 *
 * so Q is positive semi-definite whenever B is positive definite, with null
 * directions d_x = 0, d_t = tau d_s.
 */
class QOperator {
 public:
  /// Raw construction from the x-block and the (t,s)-coupling diagonal.
  QOperator(Mat B, Vec D, double tau);

  /// Builds D = mu/(z+y)^2 from a point's relaxation pair.
  static QOperator from_point(const Mat& B, const Vec& z, const Vec& y,
                              const BarrierParams& bp);

  Vec apply(const Vec& d) const;
  double quad(const Vec& d) const;

  /// Dense form, intended for small instances and cross-checks only.
  Mat materialize() const;

  int n() const { return static_cast<int>(B_.rows()); }
  int m() const { return static_cast<int>(D_.size()); }
  int size() const { return n() + 2 * m(); }
  const Mat& B() const { return B_; }
  const Vec& D() const { return D_; }
  double tau() const { return tau_; }

 private:
  Mat B_;
  Vec D_;
  double tau_;
};

/// Diagonal scaling R = diag(1, ..., 1, tau, ..., tau) with n + m ones
/// followed by m copies of tau.
class ScalingR {
 public:
  ScalingR(const BarrierParams& bp, int n, int m)
      : n_(n), m_(m), tau_(bp.tau) {}

  Vec apply(const Vec& v) const;
  Vec apply_inverse(const Vec& v) const;
  int size() const { return n_ + 2 * m_; }
  double tau() const { return tau_; }

 private:
  int n_, m_;
  double tau_;
};

}  // namespace relaxip
