#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "relaxip/globalization.hpp"
#include "relaxip/steps.hpp"

namespace relaxip {
namespace {

// One-dimensional unconstrained helper model with a pluggable objective.
ProblemModel scalar_model(std::function<double(double)> f,
                          std::function<double(double)> df) {
  ProblemModel p;
  p.name = "scalar";
  p.n = 1;
  p.m_e = 0;
  p.m = 0;
  p.eval_f = [f](const Vec& x) { return f(x[0]); };
  p.eval_h = [](const Vec&) { return Vec(0); };
  p.eval_c = [](const Vec&) { return Vec(0); };
  p.eval_grad_f = [df](const Vec& x) { return Vec::Constant(1, df(x[0])); };
  p.eval_jac_h = [](const Vec&) { return Mat(1, 0); };
  p.eval_jac_c = [](const Vec&) { return Mat(1, 0); };
  p.standard_start = Vec::Zero(1);
  return p;
}

TEST(Merit, Arithmetic) {
  RelaxPoint rp;
  rp.F = 2.5;
  rp.C = Vec::Zero(3);
  rp.C[2] = 3.0;
  EXPECT_DOUBLE_EQ(eval_merit(rp, 1.0), 5.5);
  EXPECT_DOUBLE_EQ(eval_merit(rp, 2.0), 8.0);
  rp.C = Vec(0);
  EXPECT_DOUBLE_EQ(eval_merit(rp, 1.0), 2.5);
  EXPECT_THROW(eval_merit(rp, 0.0), std::invalid_argument);
  EXPECT_THROW(eval_merit(rp, -1.0), std::invalid_argument);
}

TEST(Merit, TP1InitialValue) {
  const ProblemModel& p = *lookup_problem("TP1");
  const BarrierParams bp{0.1, 1.0};
  Vec t0(2), s0(2);
  t0 << 1.0, 1.0;
  s0 << 0.095, 0.095;
  const RelaxPoint rp = make_point(p, p.standard_start, t0, s0, bp);
  EXPECT_NEAR(eval_merit(rp, 3.91311896062463197), -0.00354945716819266,
              1e-11);
}

TEST(PiChi, ZeroDirectionGivesZero) {
  const ProblemModel& p = *lookup_problem("HS14");
  const BarrierParams bp{0.1, 1.0};
  Vec t(1), s(1);
  t << 0.5;
  s << 0.3;
  const RelaxPoint rp = make_point(p, p.standard_start, t, s, bp);
  const RelaxDerivs derivs = eval_derivatives(p, rp, bp);
  const PiChi pc = eval_pi(rp, derivs.gradF, derivs.jacC, 1.0,
                           Vec::Zero(derivs.gradF.size()));
  EXPECT_EQ(pc.pi, 0.0);
  EXPECT_EQ(pc.chi, 0.0);
}

TEST(PiChi, BoundsTheMeritDifferenceQuotient) {
  // The directional model is an upper bound for the merit slope up to the
  // curvature left out of the linearization.
  const ProblemModel& p = *lookup_problem("TP2");
  const BarrierParams bp{0.05, 0.8};
  std::mt19937 rng(11u);
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  const double alpha = 1e-6;
  for (int rep = 0; rep < 50; ++rep) {
    Vec x(2), t(3), s(3);
    for (int i = 0; i < 2; ++i) x[i] = 2.0 * box(rng);
    for (int j = 0; j < 3; ++j) {
      t[j] = 2.0 * box(rng);
      s[j] = 2.0 * box(rng);
    }
    const RelaxPoint rp = make_point(p, x, t, s, bp);
    const RelaxDerivs derivs = eval_derivatives(p, rp, bp);
    Vec d(8);
    for (int i = 0; i < 8; ++i) d[i] = box(rng);
    const double rho = 0.7;
    const PiChi pc = eval_pi(rp, derivs.gradF, derivs.jacC, rho, d);
    const RelaxPoint trial = make_point(
        p, Vec(x + alpha * d.head(2)), Vec(t + alpha * d.segment(2, 3)),
        Vec(s + alpha * d.tail(3)), bp);
    const double quotient =
        (eval_merit(trial, rho) - eval_merit(rp, rho)) / alpha;
    EXPECT_LE(quotient, pc.pi + 1e-3 * (1.0 + d.squaredNorm()));
  }
}

TEST(PiChi, NonpositiveForTangentialStepAtFeasiblePoint) {
  // Interior feasible point of HS22 with exactly complementary (t, s):
  // the stacked violation vanishes, so the model slope of a QP step must
  // pay for its own curvature.
  const ProblemModel& p = *lookup_problem("HS22");
  const BarrierParams bp{0.1, 1.0};
  Vec x(2);
  x << 0.5, 0.5;
  const Vec c = p.eval_c(x);
  const Vec t = -c;
  ASSERT_GT(t.minCoeff(), 0.0);
  const Vec s = bp.mu * t.cwiseInverse();
  const RelaxPoint rp = make_point(p, x, t, s, bp);
  ASSERT_LE(rp.C.norm(), 1e-14);
  const RelaxDerivs derivs = eval_derivatives(p, rp, bp);
  const QOperator Q =
      QOperator::from_point(Mat::Identity(2, 2), rp.z, rp.y, bp);
  const ScalingR R(bp, 2, 2);
  const double rho = 1.0;
  const Vec pstep = normal_step(rp.C, derivs.jacC, Q, R, rho, 2.0).p;
  const TangentialStepResult tres =
      tangential_step(derivs.md, derivs.gradF, rp, bp, Q, pstep);
  ASSERT_FALSE(tres.failed);
  ASSERT_GT(tres.d.norm(), 1e-8);
  const PiChi pc = eval_pi(rp, derivs.gradF, derivs.jacC, rho, tres.d);
  EXPECT_LE(pc.pi, -0.5 * rho * Q.quad(tres.d) + 1e-10);
}

// ---- penalty update -------------------------------------------------------

struct PenaltyFixture {
  RelaxPoint rp;
  Vec gradF;
  Mat jacC;
  QOperator Q{Mat::Identity(2, 2), Vec(0), 1.0};
  ScalingR R{{0.1, 1.0}, 2, 0};
  Vec p = Vec::Zero(2);
  Vec d = Vec::Zero(2);
};

PenaltyFixture one_constraint_fixture(double violation) {
  PenaltyFixture f;
  f.rp.C = Vec::Constant(1, violation);
  f.gradF = Vec::Zero(2);
  f.jacC = Mat(2, 1);
  f.jacC << 1.0, 0.0;
  return f;
}

TEST(UpdatePenalty, KeepsRhoWhenModelDecreaseIsSufficient) {
  PenaltyFixture f;
  f.rp.C = Vec(0);
  f.jacC = Mat(2, 0);
  f.gradF = Vec(2);
  f.gradF << -1.0, 0.0;
  f.d << 1.0, 0.0;  // gradF . d = -1, d' Q d = 1
  const PenaltyUpdate up =
      update_penalty(1.0, f.rp, f.gradF, f.jacC, f.Q, f.R, f.p, f.d, 0.5);
  EXPECT_DOUBLE_EQ(up.rho, 1.0);
  EXPECT_FALSE(up.tiny);
  EXPECT_DOUBLE_EQ(up.pi.pi, -1.0);
}

TEST(UpdatePenalty, HalvesOnceWhenSlopeConditionFailsAtFullRho) {
  PenaltyFixture f = one_constraint_fixture(0.1);
  f.gradF << -1.5, 0.0;
  f.d << -0.05, 0.0;
  const PenaltyUpdate up =
      update_penalty(1.0, f.rp, f.gradF, f.jacC, f.Q, f.R, f.p, f.d, 0.5);
  EXPECT_DOUBLE_EQ(up.rho, 0.5);
  EXPECT_FALSE(up.tiny);
}

TEST(UpdatePenalty, HalvesWhenCurvatureConditionFails) {
  PenaltyFixture f = one_constraint_fixture(1.0);
  // p = d = 0 satisfies the slope condition trivially; the curvature
  // condition 2 rho |C| u'Qu / |jacC C|^2 <= 1 forces one halving.
  const PenaltyUpdate up =
      update_penalty(1.0, f.rp, f.gradF, f.jacC, f.Q, f.R, f.p, f.d, 0.5);
  EXPECT_DOUBLE_EQ(up.rho, 0.5);
  EXPECT_FALSE(up.tiny);
}

TEST(UpdatePenalty, SignalsTinyWhenDirectionIncreasesViolation) {
  PenaltyFixture f = one_constraint_fixture(1.0);
  f.d << 1.0, 0.0;  // chi(d) = +1 can never satisfy the slope condition
  const PenaltyUpdate up =
      update_penalty(1.0, f.rp, f.gradF, f.jacC, f.Q, f.R, f.p, f.d, 0.5);
  EXPECT_TRUE(up.tiny);
  EXPECT_LT(up.rho, 1e-15);
}

TEST(UpdatePenalty, OnlyEverHalves) {
  std::mt19937 rng(13u);
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    PenaltyFixture f = one_constraint_fixture(box(rng) + 1.5);
    f.gradF << box(rng), box(rng);
    f.p << 0.2 * box(rng), 0.2 * box(rng);
    f.d << box(rng), box(rng);
    const double prev = std::pow(2.0, static_cast<int>(rng() % 5));
    const PenaltyUpdate up =
        update_penalty(prev, f.rp, f.gradF, f.jacC, f.Q, f.R, f.p, f.d, 0.5);
    EXPECT_LE(up.rho, prev);
    if (!up.tiny) {
      const double k = std::log2(prev / up.rho);
      EXPECT_NEAR(k, std::round(k), 1e-12);
    }
  }
}

// ---- line search ----------------------------------------------------------

TEST(LineSearch, AcceptsFullStepOnQuadratic) {
  const ProblemModel p =
      scalar_model([](double x) { return x * x; },
                   [](double x) { return 2.0 * x; });
  const BarrierParams bp{0.1, 1.0};
  const RelaxPoint rp = make_point(p, Vec::Constant(1, 1.0), Vec(0), Vec(0), bp);
  const TrialPointFn trial = [&](const Vec& x, const Vec& t, const Vec& s) {
    return make_point(p, x, t, s, bp);
  };
  const LineSearchResult res =
      line_search(rp, 1.0, Vec::Constant(1, -1.0), -2.0, 1e-4, 0.5, 60, trial);
  EXPECT_FALSE(res.failed);
  EXPECT_DOUBLE_EQ(res.alpha, 1.0);
  EXPECT_EQ(res.backtracks, 0);
  EXPECT_NEAR(res.accepted.x[0], 0.0, 1e-15);
}

TEST(LineSearch, BacktracksOnceOnOvershoot) {
  const ProblemModel p =
      scalar_model([](double x) { return x * x; },
                   [](double x) { return 2.0 * x; });
  const BarrierParams bp{0.1, 1.0};
  const RelaxPoint rp = make_point(p, Vec::Constant(1, 1.0), Vec(0), Vec(0), bp);
  const TrialPointFn trial = [&](const Vec& x, const Vec& t, const Vec& s) {
    return make_point(p, x, t, s, bp);
  };
  const LineSearchResult res =
      line_search(rp, 1.0, Vec::Constant(1, -2.5), -5.0, 1e-4, 0.5, 60, trial);
  EXPECT_FALSE(res.failed);
  EXPECT_DOUBLE_EQ(res.alpha, 0.5);
  EXPECT_EQ(res.backtracks, 1);
  EXPECT_NEAR(res.accepted.x[0], -0.25, 1e-15);
}

TEST(LineSearch, TreatsNonFiniteMeritAsRejection) {
  const ProblemModel p =
      scalar_model([](double x) { return std::log(1.0 - x); },
                   [](double x) { return -1.0 / (1.0 - x); });
  const BarrierParams bp{0.1, 1.0};
  const RelaxPoint rp = make_point(p, Vec::Zero(1), Vec(0), Vec(0), bp);
  const TrialPointFn trial = [&](const Vec& x, const Vec& t, const Vec& s) {
    return make_point(p, x, t, s, bp);
  };
  // Full step lands where the objective is undefined; the half step is a
  // genuine decrease.
  const LineSearchResult res =
      line_search(rp, 1.0, Vec::Constant(1, 1.5), -1.5, 1e-4, 0.5, 60, trial);
  EXPECT_FALSE(res.failed);
  EXPECT_DOUBLE_EQ(res.alpha, 0.5);
  EXPECT_EQ(res.backtracks, 1);
}

TEST(LineSearch, FailsAfterBacktrackCap) {
  const ProblemModel p =
      scalar_model([](double x) { return x * x; },
                   [](double x) { return 2.0 * x; });
  const BarrierParams bp{0.1, 1.0};
  const RelaxPoint rp = make_point(p, Vec::Constant(1, 1.0), Vec(0), Vec(0), bp);
  const TrialPointFn trial = [&](const Vec& x, const Vec& t, const Vec& s) {
    return make_point(p, x, t, s, bp);
  };
  // Ascent direction with a (deliberately wrong) negative slope estimate:
  // no step length can be accepted.
  const LineSearchResult res =
      line_search(rp, 1.0, Vec::Constant(1, 1.0), -1.0, 1e-4, 0.5, 10, trial);
  EXPECT_TRUE(res.failed);
  EXPECT_EQ(res.backtracks, 11);
}

TEST(LineSearch, ValidatesParameters) {
  RelaxPoint rp;
  rp.F = 0.0;
  rp.C = Vec(0);
  rp.x = Vec::Zero(1);
  rp.t = Vec(0);
  rp.s = Vec(0);
  const TrialPointFn trial = [&](const Vec&, const Vec&, const Vec&) {
    return rp;
  };
  const Vec d = Vec::Zero(1);
  EXPECT_THROW(line_search(rp, 1.0, d, -1.0, 0.6, 0.5, 10, trial),
               std::invalid_argument);
  EXPECT_THROW(line_search(rp, 1.0, d, -1.0, 1e-4, 1.0, 10, trial),
               std::invalid_argument);
  EXPECT_THROW(line_search(rp, 1.0, d, -1.0, 1e-4, 0.0, 10, trial),
               std::invalid_argument);
}

// ---- dual safeguard -------------------------------------------------------

TEST(DualSafeguard, ComponentwiseFormula) {
  Vec t(3), s_hat(3);
  t << 2.0, -1.0, 0.5;
  s_hat << 1.0, 7.0, 0.1;
  const Vec s = dual_safeguard(t, s_hat, 0.1);
  EXPECT_DOUBLE_EQ(s[0], 0.05);  // capped at mu / t
  EXPECT_DOUBLE_EQ(s[1], 7.0);   // t <= 0: untouched
  EXPECT_DOUBLE_EQ(s[2], 0.1);   // already below the cap
}

TEST(DualSafeguard, RestoresRelaxedBoundForAnyTau) {
  std::mt19937 rng(17u);
  std::uniform_real_distribution<double> box(-3.0, 3.0);
  std::uniform_real_distribution<double> pos(1e-3, 4.0);
  for (const double tau : {1e-3, 0.37, 1.0, 10.0}) {
    for (const double mu : {1e-6, 0.1}) {
      const BarrierParams bp{mu, tau};
      for (int rep = 0; rep < 500; ++rep) {
        Vec t(4), s_hat(4);
        for (int j = 0; j < 4; ++j) {
          t[j] = box(rng);
          s_hat[j] = pos(rng);
        }
        const Vec s = dual_safeguard(t, s_hat, mu);
        Vec z, y;
        eval_zy(t, s, bp, z, y);
        for (int j = 0; j < 4; ++j) {
          ASSERT_GE(z[j] - t[j], -1e-12 * std::max(1.0, std::abs(t[j])));
        }
      }
    }
  }
}

TEST(DualSafeguard, NeverIncreasesMerit) {
  const ProblemModel& p = *lookup_problem("HS22");
  std::mt19937 rng(19u);
  std::uniform_real_distribution<double> box(-2.0, 2.0);
  std::uniform_real_distribution<double> pos(1e-3, 3.0);
  const BarrierParams bp{0.05, 0.7};
  for (int rep = 0; rep < 200; ++rep) {
    Vec x(2), t(2), s_hat(2);
    for (int i = 0; i < 2; ++i) x[i] = box(rng);
    for (int j = 0; j < 2; ++j) {
      t[j] = box(rng);
      s_hat[j] = pos(rng);
    }
    const Vec s = dual_safeguard(t, s_hat, bp.mu);
    const RelaxPoint before = make_point(p, x, t, s_hat, bp);
    const RelaxPoint after = make_point(p, x, t, s, bp);
    const double scale = std::max(1.0, std::abs(eval_merit(before, 1.0)));
    EXPECT_LE(eval_merit(after, 1.0), eval_merit(before, 1.0) + 1e-12 * scale);
  }
}

}  // namespace
}  // namespace relaxip
