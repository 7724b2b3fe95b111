#pragma once

#include <functional>

#include "relaxip/relaxation.hpp"

namespace relaxip {

/// Exact penalty merit  phi(v; rho) = rho * F(v) + ||C(v)||  (Euclidean).
double eval_merit(const RelaxPoint& rp, double rho);

/// Directional model decrease of the merit along d:
///   chi = ||C + jacC' d|| - ||C||,   pi = rho * gradF' d + chi.
/// pi bounds the one-sided directional derivative of phi from above.
struct PiChi {
  double pi = 0.0;
  double chi = 0.0;
};

PiChi eval_pi(const RelaxPoint& rp, const Vec& gradF, const Mat& jacC,
              double rho, const Vec& d);

/**
 * Penalty update: keep prev_rho if it already satisfies both acceptance
 * inequalities, otherwise halve until they hold.  The two conditions are
 *
 *   (a)  2 rho ||C|| (u'Qu) / ||R^{-1} jacC C||^2  <=  1
 *        with u = R^{-2} jacC C (vacuous when ||C|| = 0 or jacC C = 0),
 *   (b)  pi(d; rho) <= (1-delta)(qN(p; rho) - ||C||) - 1/2 rho d'Qd.
 *
 * Both sides of (b) are re-evaluated at each candidate rho.  The returned
 * rho is always prev_rho / 2^k for an integer k >= 0; `tiny` is set instead
 * of returning when rho would fall below 1e-16.
 */
struct PenaltyUpdate {
  double rho = 0.0;
  PiChi pi;      ///< model decrease at the accepted rho
  bool tiny = false;
};

PenaltyUpdate update_penalty(double prev_rho, const RelaxPoint& rp,
                             const Vec& gradF, const Mat& jacC,
                             const QOperator& Q, const ScalingR& R,
                             const Vec& p, const Vec& d, double delta);

/**
 * Backtracking line search on alpha in {1, delta, delta^2, ...}: accepts the
 * first alpha with  phi(v + alpha d; rho) - phi(v; rho) <= sigma alpha pi.
 * Trial points are produced by the caller-supplied factory (which is where
 * evaluation counting lives); a non-finite trial merit backtracks like a
 * failed decrease.  After max_backtracks rejections, `failed` is set.
 */
using TrialPointFn =
    std::function<RelaxPoint(const Vec& x, const Vec& t, const Vec& s)>;

/// Optional admissibility check on trial points; returning false rejects the
/// trial exactly like an insufficient merit decrease (the step backtracks).
/// A vanishing step must always be admissible or the search cannot finish.
using TrialFilter = std::function<bool(const RelaxPoint&)>;

struct LineSearchResult {
  double alpha = 0.0;
  RelaxPoint accepted;  ///< point at the accepted alpha (pre-safeguard)
  int backtracks = 0;
  bool failed = false;
};

LineSearchResult line_search(const RelaxPoint& rp, double rho, const Vec& d,
                             double pi, double sigma, double delta,
                             int max_backtracks, const TrialPointFn& trial_point,
                             const TrialFilter& admissible = nullptr);

/// Dual safeguard: componentwise s_j = s_hat_j if t_j <= 0, else
/// min(s_hat_j, mu / t_j).  Guarantees z(t,s) >= t for any tau > 0 and never
/// increases the merit.
Vec dual_safeguard(const Vec& t_next, const Vec& s_hat, double mu);

}  // namespace relaxip
