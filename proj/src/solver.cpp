#include "relaxip/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <utility>

#include <Eigen/Dense>

#include "relaxip/bfgs.hpp"
#include "relaxip/globalization.hpp"
#include "relaxip/steps.hpp"

namespace relaxip {
namespace {

constexpr double kMuFloor = 1e-9;   // lower clamp on the barrier parameter
constexpr int kMaxRounds = 1000;    // safety cap on outer transitions
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double inf_norm(const Vec& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

double infeasibility_of(const RelaxPoint& rp) {
  return std::sqrt(rp.h.squaredNorm() + rp.c.cwiseMax(0.0).squaredNorm());
}

struct InnerExit {
  enum Kind { RTest, GTest, Crossing, Budget, Failure } kind = Failure;
  int k = 0;             // tangential QP solves consumed by the round
  double r_inf = kNaN;   // residuals at the exit point, round-active (mu,tau)
  double r1_inf = kNaN;
  double g_inf = kNaN;   // NaN when the g-test was not applicable
  double v_cross = kNaN; // violation observed by the fold-crossing guard
  std::string diagnostic;
};

class Engine {
 public:
  Engine(const ProblemModel& model, const Vec& x0, const SolverConfig& cfg)
      : model_(model), cfg_(cfg), x0_(x0), bfgs_(model.n) {}

  SolveReport run();

 private:
  RelaxPoint count_point(const Vec& x, const Vec& t, const Vec& s) {
    ++report_.counters.nf;
    return make_point(model_, x, t, s, bp_);
  }
  ModelDerivs count_derivs(const Vec& x) {
    ++report_.counters.ng;
    return eval_model_derivs(model_, x);
  }

  bool initialize();
  InnerExit inner_round(int l);
  void recenter_slacks();
  void push_record(int l, const InnerExit& ex);
  void finalize(const InnerExit& ex, bool mu_crossed, bool regular_exit);

  const ProblemModel& model_;
  const SolverConfig& cfg_;
  Vec x0_;

  BarrierParams bp_{0.0, 0.0};
  RelaxPoint rp_;
  ModelDerivs md_;
  Multipliers mult_;
  BfgsState bfgs_;
  double rho_ = 1.0;
  SolveReport report_;
};

bool Engine::initialize() {
  bp_ = BarrierParams{cfg_.mu0, cfg_.tau0};
  report_.problem = model_.name;
  report_.x = x0_;

  ++report_.counters.nf;
  const double f0 = model_.eval_f(x0_);
  const Vec h0 = model_.m_e > 0 ? model_.eval_h(x0_) : Vec(0);
  const Vec c0 = model_.m > 0 ? model_.eval_c(x0_) : Vec(0);
  if (!std::isfinite(f0) || !h0.allFinite() || !c0.allFinite()) {
    report_.status = SolveStatus::StepFailure;
    report_.message = "initial point evaluation is not finite";
    report_.f = f0;
    return false;
  }

  const int m = model_.m;
  Vec t0 = -c0;
  Vec s0(m);
  for (int j = 0; j < m; ++j) {
    s0[j] = t0[j] > 0.0 ? std::min(1.0, 0.95 * bp_.mu / t0[j]) : 1.0;
  }

  // Assemble the start point from the values just computed (make_point would
  // evaluate the model a second time).
  RelaxPoint raw;
  raw.x = x0_;
  raw.t = t0;
  raw.s = s0;
  raw.f = f0;
  raw.h = h0;
  raw.c = c0;
  rp_ = rebind_point(raw, bp_);

  md_ = count_derivs(x0_);
  if (!md_.grad_f.allFinite() || !md_.Jh.allFinite() || !md_.Jc.allFinite()) {
    report_.status = SolveStatus::StepFailure;
    report_.message = "initial derivative evaluation is not finite";
    report_.f = f0;
    return false;
  }

  const double infeas0 =
      std::sqrt(c0.cwiseMax(0.0).squaredNorm() + h0.squaredNorm());
  rho_ = std::abs(f0) > 0.0
             ? std::min(100.0, std::max(1.0, infeas0 / std::abs(f0)))
             : 100.0;

  mult_.lambda = Vec::Zero(model_.m_e);
  mult_.beta = Vec::Zero(m);
  mult_.nu = Vec::Zero(m);

  IterationRecord row0;
  row0.l = 0;
  row0.k = -1;
  row0.f = rp_.f;
  row0.infeasibility = infeasibility_of(rp_);
  row0.r_inf = inf_norm(residual_r(md_, rp_, mult_.lambda));
  row0.g_inf = rp_.C.norm() >= cfg_.g_floor
                   ? inf_norm(residual_g(md_, rp_))
                   : kNaN;
  row0.mu = bp_.mu;
  row0.tau = bp_.tau;
  report_.iterations.push_back(row0);
  return true;
}

// A barrier decrease can strand a slack pair (t_j, s_j) on the far side of
// the centering manifold t*s = mu.  From there the dual safeguard crushes
// s_j to mu/t_j at the next accepted step, and the pair has to re-climb the
// manifold one damped step at a time: near-solution constraints (small t,
// order-one s) make that climb extremely slow because the manifold curves
// away from every tangent step.  Landing t_j back on the manifold (keeping
// x and the converged dual s_j) avoids the climb entirely; the removed z-t
// defect reappears as a c+t defect of comparable size, which the normal
// step handles well, so the move is only taken when that trade does not
// inflate the local violation.
void Engine::recenter_slacks() {
  rp_ = rebind_point(rp_, bp_);  // z, C at the new parameters
  bool changed = false;
  for (int j = 0; j < model_.m; ++j) {
    const double t = rp_.t[j];
    const double s = rp_.s[j];
    if (!(t > 0.0) || !(s > 0.0) || !(t * s > 1.1 * bp_.mu)) continue;
    const double t_new = bp_.mu / s;
    const double ct = rp_.c[j] + t;
    const double zt = rp_.z[j] - t;
    const double ct_new = rp_.c[j] + t_new;
    if (ct_new * ct_new <= 2.0 * (ct * ct + zt * zt)) {
      rp_.t[j] = t_new;
      changed = true;
    }
  }
  if (changed) rp_ = rebind_point(rp_, bp_);
}

InnerExit Engine::inner_round(int l) {
  InnerExit ex;
  // Round entry: z, y, F, C follow the round's (mu, tau).
  rp_ = rebind_point(rp_, bp_);

  const int n = model_.n;
  const int m = model_.m;

  // Fold-crossing guard.  A round that starts with the inequalities
  // satisfied can be pulled through a fold of the constraint boundary: past
  // the fold the objective keeps improving while the violation grows only
  // as a high power of the overshoot, so the merit function follows the
  // objective out and the round converges to an exterior stationary point,
  // dragging the whole run off the feasible set.  Crossing is detected
  // during the round (violation jump) and at its exits (inequalities held
  // violated from a satisfied entry); the response is to abandon the round,
  // restore the entry state, and tighten the relaxation before re-running.
  // Rounds that enter with violated inequalities (an infeasible problem
  // converging to its infeasibility minimizer) are never guarded.
  const double v_entry = model_.m > 0 ? rp_.c.cwiseMax(0.0).norm() : 0.0;
  const double feas_tol = std::sqrt(cfg_.eps);
  const bool guard_armed = model_.m > 0 && v_entry <= feas_tol;
  const double guard_level = 10.0 * std::max(v_entry, cfg_.eps);
  const RelaxPoint entry_rp = rp_;
  const ModelDerivs entry_md = md_;
  const Multipliers entry_mult = mult_;
  const BfgsState entry_bfgs = bfgs_;
  const double entry_rho = rho_;

  // Restores the entry state and converts the exit into a fold-crossing
  // verdict; the caller responds by tightening the relaxation.
  const auto cross_out = [&](InnerExit& e, double v_now) {
    rp_ = entry_rp;
    md_ = entry_md;
    mult_ = entry_mult;
    bfgs_ = entry_bfgs;
    rho_ = entry_rho;
    e.kind = InnerExit::Crossing;
    e.v_cross = v_now;
    e.r_inf = inf_norm(residual_r(md_, rp_, mult_.lambda));
    e.r1_inf = residual_r1_inf(md_, rp_, mult_.lambda);
    e.g_inf = rp_.C.norm() >= cfg_.g_floor ? inf_norm(residual_g(md_, rp_))
                                           : kNaN;
  };

  const auto run_tests = [&](InnerExit& e) {
    const Vec r = residual_r(md_, rp_, mult_.lambda);
    e.r_inf = inf_norm(r);
    e.r1_inf = residual_r1_inf(md_, rp_, mult_.lambda);
    if (std::getenv("RELAXIP_TRACE")) {
      fprintf(stderr,
              "RT l=%d k=%d r=%.4e r1=%.4e rC=%.4e thresh=%.2e |C|=%.3e\n", l,
              ex.k, e.r_inf, e.r1_inf, inf_norm(rp_.C),
              cfg_.mu_accept_factor * bp_.mu, rp_.C.norm());
    }
    const bool g_applicable = rp_.C.norm() >= cfg_.g_floor;
    e.g_inf = g_applicable ? inf_norm(residual_g(md_, rp_)) : kNaN;
    const bool fires = e.r_inf <= cfg_.mu_accept_factor * bp_.mu ||
                       (g_applicable && e.g_inf <= bp_.tau);
    if (!fires) return false;
    // Exit-time escape net: a round must never hand the driver an exit
    // point whose inequalities are held violated when its entry point kept
    // them satisfied.  With the line-search fence active this is insurance.
    if (guard_armed && ex.k > 0 && m > 0) {
      const double v_ineq = rp_.c.cwiseMax(0.0).norm();
      if (v_ineq > guard_level) {
        cross_out(e, infeasibility_of(rp_));
        return true;
      }
    }
    e.kind = e.r_inf <= cfg_.mu_accept_factor * bp_.mu ? InnerExit::RTest
                                                       : InnerExit::GTest;
    return true;
  };

  if (run_tests(ex)) return ex;  // fires with k = 0, no step taken

  while (true) {
    if (report_.counters.iters >= cfg_.max_total_iters) {
      ex.kind = InnerExit::Budget;
      ex.diagnostic = "iteration budget exhausted";
      return ex;
    }

    const Vec gradF = assemble_gradF(md_.grad_f, rp_.z, rp_.y, bp_);
    const Mat jacC = assemble_jacC(md_.Jh, md_.Jc, rp_.z, rp_.y, bp_);
    const QOperator Q = QOperator::from_point(bfgs_.B, rp_.z, rp_.y, bp_);
    const ScalingR R(bp_, n, m);

    const NormalStepResult nstep =
        normal_step(rp_.C, jacC, Q, R, rho_, cfg_.xi);
    const TangentialStepResult tstep =
        tangential_step(md_, gradF, rp_, bp_, Q, nstep.p);
    ++report_.counters.iters;
    ++ex.k;
    if (tstep.failed) {
      ex.kind = InnerExit::Failure;
      ex.diagnostic = tstep.diagnostic;
      return ex;
    }

    if (std::getenv("RELAXIP_TRACE")) {
      Eigen::SelfAdjointEigenSolver<Mat> es(bfgs_.B);
      fprintf(stderr,
              "TR l=%d k=%d |C|=%.3e mu=%.2e tau=%.2e rho=%.2e "
              "|p|=%.2e dC=%.3e |dx|=%.2e |dt|=%.2e |ds|=%.2e q=%.3e "
              "lamB=[%.2e,%.2e]\n",
              l, ex.k, rp_.C.norm(), bp_.mu, bp_.tau, rho_, nstep.p.norm(),
              nstep.model_reduction, tstep.d.head(n).norm(),
              tstep.d.segment(n, m).norm(), tstep.d.tail(m).norm(),
              tstep.q_value, es.eigenvalues().minCoeff(),
              es.eigenvalues().maxCoeff());
      std::ostringstream os;
      os << "   x=" << rp_.x.transpose() << "  t=" << rp_.t.transpose()
         << "  s=" << rp_.s.transpose() << "  z=" << rp_.z.transpose()
         << "  y=" << rp_.y.transpose() << "  lam=" << tstep.u.lambda.transpose()
         << "  beta=" << tstep.u.beta.transpose()
         << "  nu=" << tstep.u.nu.transpose();
      fprintf(stderr, "%s\n", os.str().c_str());
    }

    const PenaltyUpdate pen = update_penalty(rho_, rp_, gradF, jacC, Q, R,
                                             nstep.p, tstep.d, cfg_.delta);
    if (pen.tiny) {
      ex.kind = InnerExit::Failure;
      ex.diagnostic =
          "penalty parameter collapsed below 1e-16: no direction compatible "
          "with the merit function";
      return ex;
    }
    rho_ = pen.rho;

    const TrialPointFn trial = [this](const Vec& x, const Vec& t,
                                      const Vec& s) {
      return count_point(x, t, s);
    };
    const LineSearchResult ls =
        line_search(rp_, rho_, tstep.d, pen.pi.pi, cfg_.sigma, cfg_.delta,
                    cfg_.max_backtracks, trial);
    if (ls.failed) {
      ex.kind = InnerExit::Failure;
      ex.diagnostic = "line search exhausted the backtracking budget";
      return ex;
    }

    // Dual safeguard, applied without re-evaluating the model.
    RelaxPoint next = ls.accepted;
    next.s = dual_safeguard(next.t, next.s, bp_.mu);
    next = rebind_point(next, bp_);

    if (cfg_.observer) {
      InnerObservation obs;
      obs.l = l;
      obs.k = ex.k - 1;
      obs.rho = rho_;
      obs.alpha = ls.alpha;
      obs.pi = pen.pi.pi;
      obs.merit_before = eval_merit(rp_, rho_);
      obs.merit_after = eval_merit(next, rho_);
      obs.min_z_minus_t =
          m > 0 ? (next.z - next.t).minCoeff()
                : std::numeric_limits<double>::infinity();
      obs.backtracks = ls.backtracks;
      cfg_.observer(obs);
    }

    mult_ = tstep.u;
    const Vec x_prev = rp_.x;
    const ModelDerivs md_prev = md_;
    rp_ = next;
    md_ = count_derivs(rp_.x);
    if (!md_.grad_f.allFinite() || !md_.Jh.allFinite() ||
        !md_.Jc.allFinite()) {
      ex.kind = InnerExit::Failure;
      ex.diagnostic = "derivative evaluation returned non-finite values";
      return ex;
    }

    if (guard_armed && m > 0 &&
        rp_.c.cwiseMax(0.0).norm() > guard_level) {
      cross_out(ex, infeasibility_of(rp_));
      return ex;
    }

    if (run_tests(ex)) return ex;  // no quasi-Newton update on exit

    const Vec step = rp_.x - x_prev;
    Vec grad_new = md_.grad_f + md_.Jc * mult_.beta;
    Vec grad_old = md_prev.grad_f + md_prev.Jc * mult_.beta;
    if (model_.m_e > 0) {
      grad_new += md_.Jh * mult_.lambda;
      grad_old += md_prev.Jh * mult_.lambda;
    }
    damped_bfgs_update(bfgs_, step, Vec(grad_new - grad_old));
  }
}

void Engine::push_record(int l, const InnerExit& ex) {
  IterationRecord row;
  row.l = l;
  row.k = ex.k;
  row.f = rp_.f;
  row.infeasibility = infeasibility_of(rp_);
  row.r_inf = ex.r_inf;
  row.g_inf = ex.g_inf;
  row.mu = bp_.mu;   // post-update values: callers update bp_ first
  row.tau = bp_.tau;
  report_.iterations.push_back(row);
}

void Engine::finalize(const InnerExit& ex, bool mu_crossed,
                      bool regular_exit) {
  report_.x = rp_.x;
  report_.t = rp_.t;
  report_.s = rp_.s;
  report_.mult = mult_;
  report_.f = rp_.f;
  report_.infeasibility = infeasibility_of(rp_);
  report_.r_inf = inf_norm(residual_r(md_, rp_, mult_.lambda));
  report_.final_mu = bp_.mu;
  report_.final_tau = bp_.tau;

  if (ex.kind == InnerExit::Failure) {
    report_.status = SolveStatus::StepFailure;
    report_.message = ex.diagnostic;
    return;
  }
  if (ex.kind == InnerExit::Budget || !regular_exit) {
    report_.status = SolveStatus::IterationLimit;
    report_.message = ex.kind == InnerExit::Budget
                          ? ex.diagnostic
                          : "outer round cap exhausted";
    return;
  }
  if (mu_crossed) {
    // A vanishing barrier parameter with a satisfied r-test is the KKT
    // branch only while the multiplier estimates stay moderate.  When they
    // diverge, the stationarity condition holds only after normalizing by
    // the multiplier size — a Fritz-John point, not a KKT point — which is
    // how a solution without a constraint qualification presents itself on
    // the barrier trajectory.
    double dual_inf = inf_norm(rp_.s);
    if (model_.m_e > 0) dual_inf = std::max(dual_inf, inf_norm(mult_.lambda));
    if (dual_inf > 1.0 / std::sqrt(cfg_.eps) &&
        report_.infeasibility <= std::sqrt(cfg_.eps)) {
      report_.status = SolveStatus::SingularStationary;
      report_.message =
          "multiplier estimates diverge while the KKT residual vanishes: "
          "the point satisfies the Fritz-John conditions but no constraint "
          "qualification";
      return;
    }
    report_.status = SolveStatus::ApproxKKT;
    return;
  }
  // tau exhausted: stationarity of the constraint violation decides.
  const Vec viol = rp_.c.cwiseMax(0.0);
  Vec cert = md_.Jc * viol;
  if (model_.m_e > 0) cert += md_.Jh * rp_.h;
  report_.certificate = inf_norm(cert);
  if (report_.infeasibility <= std::sqrt(cfg_.eps)) {
    report_.status = SolveStatus::SingularStationary;
    report_.message =
        "stationary point of the constraint violation within feasibility "
        "tolerance: constraint qualification fails here";
  } else {
    report_.status = SolveStatus::InfeasibleStationary;
    report_.message =
        "converged to an infeasible stationary point of the constraint "
        "violation";
  }
}

SolveReport Engine::run() {
  if (!(cfg_.mu0 > 0.0) || !(cfg_.tau0 > 0.0) || !(cfg_.eps > 0.0) ||
      !(cfg_.delta > 0.0 && cfg_.delta < 1.0) ||
      !(cfg_.sigma > 0.0 && cfg_.sigma < 0.5) || !(cfg_.xi > 1.0) ||
      !(cfg_.tau_factor > 0.0 && cfg_.tau_factor < 1.0) ||
      !(cfg_.mu_halve > 0.0 && cfg_.mu_halve < 1.0) ||
      cfg_.max_total_iters <= 0 || cfg_.max_backtracks <= 0) {
    throw std::invalid_argument("solve: invalid configuration");
  }
  if (x0_.size() != model_.n) {
    throw std::invalid_argument("solve: start point has wrong dimension");
  }

  if (!initialize()) return std::move(report_);

  int l = 0;
  InnerExit ex;
  bool regular = true;
  while (bp_.mu > cfg_.eps && bp_.tau > cfg_.eps) {
    if (++l > kMaxRounds) {
      regular = false;
      --l;
      break;
    }
    ex = inner_round(l);
    if (ex.kind == InnerExit::Failure || ex.kind == InnerExit::Budget) {
      push_record(l, ex);
      finalize(ex, false, true);
      return std::move(report_);
    }
    if (ex.kind == InnerExit::RTest) {
      bp_.mu = next_mu(bp_.mu, ex.r1_inf, cfg_);
      if (!std::getenv("RELAXIP_NORECENTER")) recenter_slacks();
    } else if (ex.kind == InnerExit::GTest) {
      bp_.tau = next_tau(bp_.tau, cfg_);
    } else {
      // Fold-crossing guard fired: the round was abandoned and its entry
      // state restored.  The escape shows the relaxation is too loose to
      // hold the iterate inside the feasible set, which is the same verdict
      // the g-test delivers, so take the same parameter step.  Re-running
      // from the restored point either stays inside (the tighter wall
      // prices the exterior point out of the merit function) or escapes
      // again and tightens once more — a geometric descent of tau.
      bp_.tau = next_tau(bp_.tau, cfg_);
    }
    push_record(l, ex);  // records post-update mu/tau
  }

  if (l == 0) {
    // Degenerate configuration: the initial parameters already sit at or
    // below the stopping tolerance, so no inner round ever ran and there is
    // no exit state to classify.
    ex.kind = InnerExit::Budget;
    ex.diagnostic = "initial barrier parameters are at or below the "
                    "stopping tolerance: no inner rounds were run";
  }
  finalize(ex, bp_.mu <= cfg_.eps, regular);
  return std::move(report_);
}

}  // namespace

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::ApproxKKT:
      return "ApproxKKT";
    case SolveStatus::SingularStationary:
      return "SingularStationary";
    case SolveStatus::InfeasibleStationary:
      return "InfeasibleStationary";
    case SolveStatus::IterationLimit:
      return "IterationLimit";
    case SolveStatus::StepFailure:
      return "StepFailure";
  }
  return "Unknown";
}

Vec residual_r(const ModelDerivs& md, const RelaxPoint& rp,
               const Vec& lambda) {
  const auto n = md.grad_f.size();
  Vec r(n + rp.C.size());
  Vec dual = md.grad_f + md.Jc * rp.s;
  if (lambda.size() > 0) dual += md.Jh * lambda;
  r.head(n) = dual;
  r.tail(rp.C.size()) = rp.C;
  return r;
}

double residual_r1_inf(const ModelDerivs& md, const RelaxPoint& rp,
                       const Vec& lambda) {
  Vec dual = md.grad_f + md.Jc * rp.s;
  if (lambda.size() > 0) dual += md.Jh * lambda;
  return inf_norm(dual);
}

Vec residual_g(const ModelDerivs& md, const RelaxPoint& rp) {
  const auto n = md.grad_f.size();
  const auto m = rp.t.size();
  const Vec zt = rp.z - rp.t;
  Vec g(n + 2 * m);
  g.head(n) = md.Jh * rp.h + md.Jc * zt;
  g.segment(n, m) = rp.c + rp.t - zt;
  g.tail(m) = rp.z.cwiseProduct(zt);
  return g / rp.C.norm();
}

double next_mu(double mu, double r1_inf, const SolverConfig& cfg) {
  return std::max(kMuFloor, std::min(cfg.mu_halve * mu,
                                     std::pow(r1_inf, cfg.mu_exponent)));
}

double next_tau(double tau, const SolverConfig& cfg) {
  return std::max(kMuFloor, cfg.tau_factor * tau);
}

SolveReport solve(const ProblemModel& model, const SolverConfig& cfg) {
  return solve(model, model.standard_start, cfg);
}

SolveReport solve(const ProblemModel& model, const Vec& x0,
                  const SolverConfig& cfg) {
  Engine engine(model, x0, cfg);
  return engine.run();
}

}  // namespace relaxip
