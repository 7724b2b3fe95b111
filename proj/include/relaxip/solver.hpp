#ifndef RELAXIP_SOLVER_HPP
#define RELAXIP_SOLVER_HPP

#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "relaxip/relaxation.hpp"

namespace relaxip {

/**
 * Per-inner-iteration observation handed to an optional instrumentation
 * callback: enough to re-check the acceptance rule, the penalty monotonicity
 * and the safeguarded bound from the outside.
 */
struct InnerObservation {
  int l = 0;              ///< outer round index (1-based; polish round included)
  int k = 0;              ///< inner iteration index within the round (0-based)
  double rho = 0.0;       ///< penalty parameter used for this acceptance test
  double alpha = 0.0;     ///< accepted step length
  double pi = 0.0;        ///< model slope used in the acceptance rule
  double merit_before = 0.0;  ///< merit at the incumbent, at this rho
  double merit_after = 0.0;   ///< merit at the accepted (safeguarded) point
  double min_z_minus_t = 0.0; ///< min_j (z_j - t_j) after the dual safeguard
  int backtracks = 0;
};

/** Tunable constants of the outer/inner iteration. */
struct SolverConfig {
  double mu0 = 0.1;
  double tau0 = 1.0;
  double delta = 0.5;             ///< backtracking factor and penalty margin
  double sigma = 1e-4;            ///< sufficient-decrease constant
  double eps = 1e-8;              ///< outer stopping tolerance on mu and tau
  double xi = 2.0;                ///< normal-step trust-region factor
  double mu_accept_factor = 10.0; ///< inner r-test threshold is factor * mu
  double mu_exponent = 1.8;       ///< mu update: min(mu_halve*mu, r1^exponent)
  double mu_halve = 0.5;
  double tau_factor = 0.6;        ///< tau update: tau_factor * tau
  double g_floor = 1e-14;         ///< skip the g-test when ||C|| drops below
  int max_total_iters = 1000;     ///< cumulative cap on tangential QP solves
  int max_backtracks = 60;

  /** Optional per-iteration instrumentation hook (may be empty). */
  std::function<void(const InnerObservation&)> observer;
};

enum class SolveStatus {
  ApproxKKT,
  SingularStationary,
  InfeasibleStationary,
  IterationLimit,
  StepFailure,
};

std::string_view to_string(SolveStatus status);

/**
 * One row of the iteration trace.  Row l = 0 is the initial point (k = -1);
 * rows l >= 1 report objective, infeasibility and residuals at the round's
 * exit point, evaluated with the round's active (mu, tau), while the mu/tau
 * fields hold the values selected for the NEXT round.  The last row is a
 * final round run at the terminal parameters, which are reported unchanged.
 */
struct IterationRecord {
  int l = 0;
  double f = 0.0;
  double infeasibility = 0.0;  ///< ||(h, max(0, c))||_2 at the exit point
  double r_inf = 0.0;          ///< ||r||_inf at the exit point
  double g_inf = std::numeric_limits<double>::quiet_NaN();  ///< NaN: skipped
  double mu = 0.0;
  double tau = 0.0;
  int k = -1;  ///< tangential QP solves in the round (-1 on the initial row)
};

struct SolveCounters {
  long long nf = 0;    ///< (f, h, c) evaluation triples
  long long ng = 0;    ///< (grad f, Jh, Jc) evaluation triples
  long long iters = 0; ///< tangential QP solves
};

struct SolveReport {
  SolveStatus status = SolveStatus::StepFailure;
  std::string message;  ///< diagnostics; empty only for clean KKT exits
  std::string problem;
  Vec x, t, s;
  Multipliers mult;
  double f = 0.0;
  double infeasibility = 0.0;
  double r_inf = 0.0;
  /** Stationarity measure ||Jh h + Jc max(0,c)||_inf of the residual
   *  optimality system; reported for the tau-exhausted outcomes. */
  double certificate = std::numeric_limits<double>::quiet_NaN();
  double final_mu = 0.0;
  double final_tau = 0.0;
  std::vector<IterationRecord> iterations;
  SolveCounters counters;
};

/**
 * Stacked residual r = (grad f + Jh lambda + Jc s, C): dual feasibility in
 * the original variables plus the relaxed constraint values.
 */
Vec residual_r(const ModelDerivs& md, const RelaxPoint& rp, const Vec& lambda);

/** Infinity norm of the dual-feasibility block of residual_r alone. */
double residual_r1_inf(const ModelDerivs& md, const RelaxPoint& rp,
                       const Vec& lambda);

/**
 * Scaled stationarity residual of the constraint-violation functional,
 *   g = (1/||C||) * stack(Jh h + Jc (z-t), c + t - (z-t), z .* (z-t)).
 * Caller must ensure ||C|| is comfortably nonzero (see SolverConfig.g_floor).
 */
Vec residual_g(const ModelDerivs& md, const RelaxPoint& rp);

/** Next barrier parameter after an r-test exit (floor included). */
double next_mu(double mu, double r1_inf, const SolverConfig& cfg);

/** Next scaling parameter after a g-test exit: fixed factor, floor included. */
double next_tau(double tau, const SolverConfig& cfg);

/** Solve from the model's standard start. */
SolveReport solve(const ProblemModel& model, const SolverConfig& cfg = {});

/** Solve from a caller-supplied start point. */
SolveReport solve(const ProblemModel& model, const Vec& x0,
                  const SolverConfig& cfg = {});

}  // namespace relaxip

#endif  // RELAXIP_SOLVER_HPP
