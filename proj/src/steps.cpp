#include "relaxip/steps.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <Eigen/Dense>

namespace relaxip {
namespace {

// qN along the ray d(a) = -a*u equals 1/2 rho Gamma a^2 + r(a) with
// r(a)^2 = ||C||^2 - 2 a gsq + a^2 W2; the residual term never goes
// negative, it reaches a kink where the linearized constraint is met.
double ray_residual(double normC_sq, double gsq, double W2, double a) {
  return std::sqrt(std::max(0.0, normC_sq - 2.0 * a * gsq + a * a * W2));
}

}  // namespace

NormalStepResult normal_step(const Vec& C, const Mat& JC, const QOperator& Q,
                             const ScalingR& R, double rho, double xi) {
  if (!(xi > 1.0) || !(rho > 0.0)) {
    throw std::invalid_argument("normal_step: need xi > 1 and rho > 0");
  }
  if (JC.rows() != R.size() || JC.cols() != C.size() ||
      Q.size() != R.size()) {
    throw std::invalid_argument("normal_step: dimension mismatch");
  }

  NormalStepResult out;
  out.p = Vec::Zero(JC.rows());

  const double normC = C.norm();
  if (normC == 0.0) {
    return out;  // p = 0, nothing to reduce
  }

  const Vec JCC = JC * C;
  const Vec u = R.apply_inverse(R.apply_inverse(JCC));  // R^{-2} JC C
  const double gsq = JCC.dot(u);  // = ||R^{-1} JC C||^2
  const Vec JCtu = JC.transpose() * u;
  const double W2 = JCtu.squaredNorm();
  const double floor = 1e-14 * std::max(1.0, normC);
  if (gsq <= floor * floor || W2 <= floor * floor) {
    out.degenerate = true;
    return out;
  }

  const double Gamma = Q.quad(u);  // u'Qu >= 0
  const double eta = gsq / W2;
  const double normC_sq = normC * normC;

  // psi(a) = 1/2 rho Gamma a^2 + r(a) is convex on [0, xi]; its minimizer is
  // either the sign change of G(a) = rho Gamma a r(a) + a W2 - gsq (which
  // shares the sign of psi' wherever r > 0 and vanishes at the kink) or the
  // boundary xi.
  const auto G = [&](double a) {
    return rho * Gamma * a * ray_residual(normC_sq, gsq, W2, a) + a * W2 - gsq;
  };

  double a_opt;
  if (G(xi) <= 0.0) {
    a_opt = xi;
  } else {
    double lo = 0.0, hi = xi;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * xi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (G(mid) <= 0.0 ? lo : hi) = mid;
    }
    a_opt = 0.5 * (lo + hi);
  }

  // Guard the numerical root with the closed-form candidates the theory
  // quotes; the best of them can only improve the model value.  Candidates
  // are compared on a directly evaluated residual: the ray formula for r(a)
  // cancels catastrophically once the linearized constraint is nearly met.
  const auto psi_direct = [&](const Vec& d) {
    return 0.5 * rho * Q.quad(d) + (C + JC.transpose() * d).norm();
  };
  const double a_cauchy = std::min(1.0, eta);
  Vec best_p = Vec::Zero(JC.rows());
  double best_psi = normC;  // psi(0)
  const auto consider = [&](const Vec& d) {
    const double value = psi_direct(d);
    if (value < best_psi) {
      best_psi = value;
      best_p = d;
    }
  };
  for (double a : {a_opt, a_cauchy, std::min(eta, xi), xi}) {
    consider(Vec(-a * u));
  }

  const double cauchy_reduction = 0.5 * a_cauchy * (gsq / normC_sq) *
                                  (normC - rho * normC_sq * Gamma / gsq);

  // Dogleg refinement: bend from the Cauchy point toward the minimum-norm
  // Gauss-Newton step (the shortest scaled step meeting the linearized
  // constraints in the least-squares sense), clipped to the trust region.
  // Work in the scaled variable e = R d, where the radius is xi*sqrt(gsq).
  {
    Mat W(JC.rows(), JC.cols());  // W = R^{-1} JC
    for (int j = 0; j < JC.cols(); ++j) {
      W.col(j) = R.apply_inverse(JC.col(j));
    }
    const Vec e_gn =
        Eigen::CompleteOrthogonalDecomposition<Mat>(W.transpose())
            .solve(Vec(-C));
    const double radius = xi * std::sqrt(gsq);
    if (e_gn.allFinite()) {
      const auto consider_e = [&](const Vec& e) {
        consider(R.apply_inverse(e));
      };
      if (e_gn.norm() <= radius) {
        consider_e(e_gn);
      } else {
        // Truncated Gauss-Newton leaves the residual parallel to C, so the
        // steepest-descent direction (and with it the next trust region,
        // whose radius is proportional to it) keeps pace with ||C||.
        // Greedier boundary points the bend below can reach concentrate the
        // leftover violation in the near-null directions of the constraint
        // Jacobian, shrinking later trust regions much faster than ||C||
        // and stalling feasibility restoration.  Prefer the truncated
        // Gauss-Newton point whenever the trust region admits a healthy
        // fraction of the full step and the Cauchy decrease floor is met.
        // When the region admits almost none of it the geometry is close
        // to stationary for the violation, and concentrating the residual
        // is exactly what lets the degeneracy tests see that; fall through
        // to the plain dogleg there.
        const double kappa = radius / e_gn.norm();
        const Vec d_trunc = R.apply_inverse(Vec(kappa * e_gn));
        const double psi_trunc = psi_direct(d_trunc);
        const double red_trunc = normC - psi_trunc;
        if (kappa >= 0.1 && red_trunc > 0.0 &&
            red_trunc + 1e-12 * std::max(1.0, normC) >= cauchy_reduction) {
          best_psi = psi_trunc;
          best_p = d_trunc;
        } else {
          consider(d_trunc);
          const Vec e_c = -a_cauchy * (W * C);
          const Vec leg = e_gn - e_c;
          // Boundary crossing of the second dogleg segment.
          const double aa = leg.squaredNorm();
          const double bb = 2.0 * e_c.dot(leg);
          const double cc = e_c.squaredNorm() - radius * radius;
          const double disc = bb * bb - 4.0 * aa * cc;
          if (aa > 0.0 && disc >= 0.0 && cc <= 0.0) {
            const double sigma =
                std::clamp((-bb + std::sqrt(disc)) / (2.0 * aa), 0.0, 1.0);
            consider_e(Vec(e_c + sigma * leg));
          }
        }
      }
    }
  }

  if (std::getenv("RELAXIP_TRACE2")) {
    Mat W(JC.rows(), JC.cols());
    for (int j = 0; j < JC.cols(); ++j) W.col(j) = R.apply_inverse(JC.col(j));
    const Vec e_gn = Eigen::CompleteOrthogonalDecomposition<Mat>(W.transpose())
                         .solve(Vec(-C));
    fprintf(stderr,
            "NS |C|=%.3e gsq=%.3e radius=%.3e |e_gn|=%.3e "
            "psi(gn)=%.3e psi(cauchy)=%.3e psi(a_opt)=%.3e best=%.3e "
            "resid_gn=%.3e\n",
            normC, gsq, xi * std::sqrt(gsq), e_gn.norm(),
            psi_direct(R.apply_inverse(e_gn)),
            psi_direct(Vec(-a_cauchy * u)), psi_direct(Vec(-a_opt * u)),
            best_psi, (C + W.transpose() * e_gn).norm());
  }

  out.p = best_p;
  out.model_reduction = normC - best_psi;
  out.eta = eta;
  out.cauchy_reduction = cauchy_reduction;
  return out;
}

TangentialStepResult tangential_step(const ModelDerivs& md, const Vec& gradF,
                                     const RelaxPoint& rp,
                                     const BarrierParams& bp,
                                     const QOperator& Q, const Vec& p) {
  const int n = static_cast<int>(md.grad_f.size());
  const int m_e = static_cast<int>(md.Jh.cols());
  const int m = static_cast<int>(rp.z.size());
  const int total = n + 2 * m;
  if (gradF.size() != total || p.size() != total || Q.size() != total) {
    throw std::invalid_argument("tangential_step: dimension mismatch");
  }

  TangentialStepResult out;

  // Eliminate the (c+t) and (z-t) constraint blocks:
  //   d_t = b_t - Jc' d_x            with b_t = p_t + Jc' p_x,
  //   d_s = b_s + diag(w) Jc' d_x    with w_j = y_j / (tau z_j),
  // so d = d0 + L e, e = d_x, and the QP reduces to e with constraint
  // Jh'(e - p_x) = 0.
  const Vec p_x = p.head(n);
  const Vec p_t = p.segment(n, m);
  const Vec p_s = p.tail(m);
  const Vec w = rp.y.cwiseQuotient(bp.tau * rp.z);
  const Vec b_t = p_t + md.Jc.transpose() * p_x;
  const Vec b_s = p_s - w.cwiseProduct(b_t - p_t);

  Vec d0 = Vec::Zero(total);
  d0.segment(n, m) = b_t;
  d0.tail(m) = b_s;

  Mat L(total, n);
  L.topRows(n) = Mat::Identity(n, n);
  L.middleRows(n, m) = -md.Jc.transpose();
  L.bottomRows(m) = w.asDiagonal() * md.Jc.transpose();

  const Vec rhat = L.transpose() * (gradF + Q.apply(d0));
  Mat QL(total, n);
  for (int j = 0; j < n; ++j) QL.col(j) = Q.apply(L.col(j));
  const Mat M = L.transpose() * QL;

  // Reduced KKT system in (e, lambda): [M Jh; Jh' 0][e; lam] = [-rhat; Jh'p_x]
  const int dim = n + m_e;
  Vec rhs(dim);
  rhs.head(n) = -rhat;
  rhs.tail(m_e) = md.Jh.transpose() * p_x;

  const auto build_kkt = [&](double eps_reg) {
    Mat K = Mat::Zero(dim, dim);
    K.topLeftCorner(n, n) = M + eps_reg * Mat::Identity(n, n);
    K.topRightCorner(n, m_e) = md.Jh;
    K.bottomLeftCorner(m_e, n) = md.Jh.transpose();
    K.bottomRightCorner(m_e, m_e) = -eps_reg * Mat::Identity(m_e, m_e);
    return K;
  };

  const double rhs_scale = std::max(1.0, rhs.norm());
  Vec sol;
  bool solved = false;
  double eps_reg = 0.0;
  const double eps_base = 1e-8 * std::max(1.0, Q.B().norm());
  for (int attempt = 0; attempt <= 20 && !solved; ++attempt) {
    const Mat K = build_kkt(eps_reg);
    const Eigen::FullPivLU<Mat> lu(K);
    sol = lu.solve(rhs);
    solved = sol.allFinite() && (K * sol - rhs).norm() <= 1e-8 * rhs_scale;
    eps_reg = attempt == 0 ? eps_base : 2.0 * eps_reg;
  }
  if (!solved) {
    out.failed = true;
    out.diagnostic =
        "tangential step: reduced KKT system remained unsolvable after 20 "
        "regularization doublings";
    return out;
  }

  const Vec e = sol.head(n);
  out.d = d0 + L * e;
  out.u.lambda = sol.tail(m_e);

  // Back-substitute the eliminated blocks' multipliers from full-space
  // stationarity gradF + Qd + JC u = 0: the s rows give nu, the t rows beta.
  const Vec Qd = Q.apply(out.d);
  const Vec zy = rp.z + rp.y;
  out.u.nu = Vec(m);
  out.u.beta = Vec(m);
  for (int j = 0; j < m; ++j) {
    const double gs = gradF[n + m + j] + Qd[n + m + j];
    out.u.nu[j] = zy[j] * gs / (bp.tau * rp.z[j]);
    out.u.beta[j] =
        rp.y[j] * out.u.nu[j] / zy[j] - gradF[n + j] - Qd[n + j];
  }

  out.q_value = gradF.dot(out.d) + 0.5 * Q.quad(out.d);
  return out;
}

}  // namespace relaxip
