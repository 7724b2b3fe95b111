#include "relaxip/globalization.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace relaxip {

double eval_merit(const RelaxPoint& rp, double rho) {
  if (!(rho > 0.0)) {
    throw std::invalid_argument("eval_merit: rho must be positive");
  }
  return rho * rp.F + rp.C.norm();
}

PiChi eval_pi(const RelaxPoint& rp, const Vec& gradF, const Mat& jacC,
              double rho, const Vec& d) {
  PiChi out;
  out.chi = (rp.C + jacC.transpose() * d).norm() - rp.C.norm();
  out.pi = rho * gradF.dot(d) + out.chi;
  return out;
}

PenaltyUpdate update_penalty(double prev_rho, const RelaxPoint& rp,
                             const Vec& gradF, const Mat& jacC,
                             const QOperator& Q, const ScalingR& R,
                             const Vec& p, const Vec& d, double delta) {
  if (!(prev_rho > 0.0) || !(delta > 0.0) || !(delta < 1.0)) {
    throw std::invalid_argument("update_penalty: bad prev_rho or delta");
  }

  const double normC = rp.C.norm();
  // rho-independent pieces of the two conditions.
  const double quad_p = Q.quad(p);
  const double quad_d = Q.quad(d);
  const double res_p = (rp.C + jacC.transpose() * p).norm();
  const double gFd = gradF.dot(d);
  const double chi_d = (rp.C + jacC.transpose() * d).norm() - normC;

  // Curvature ratio of condition (a); vacuous when the violation or its
  // pulled-back gradient vanishes.
  double curve_ratio = 0.0;
  if (normC > 0.0) {
    const Vec JCC = jacC * rp.C;
    const Vec u = R.apply_inverse(R.apply_inverse(JCC));
    const double gsq = JCC.dot(u);
    if (gsq > 0.0) curve_ratio = normC * Q.quad(u) / gsq;
  }

  PenaltyUpdate out;
  double rho = prev_rho;
  while (true) {
    const bool cond_a = 2.0 * rho * curve_ratio <= 1.0;
    const double qN_gap = 0.5 * rho * quad_p + res_p - normC;
    const double pi = rho * gFd + chi_d;
    const bool cond_b = pi <= (1.0 - delta) * qN_gap - 0.5 * rho * quad_d;
    if (std::getenv("RELAXIP_TRACE4")) {
      fprintf(stderr,
              "UP rho=%.3e curve=%.3e qN_gap=%.6e pi=%.6e rhs_b=%.6e a=%d "
              "b=%d quad_d=%.3e chi_d=%.6e gFd=%.6e\n",
              rho, curve_ratio, qN_gap, pi,
              (1.0 - delta) * qN_gap - 0.5 * rho * quad_d, cond_a ? 1 : 0,
              cond_b ? 1 : 0, quad_d, chi_d, gFd);
    }
    if (cond_a && cond_b) {
      out.rho = rho;
      out.pi.pi = pi;
      out.pi.chi = chi_d;
      return out;
    }
    rho *= 0.5;
    if (rho < 1e-16) {
      out.tiny = true;
      out.rho = rho;
      return out;
    }
  }
}

LineSearchResult line_search(const RelaxPoint& rp, double rho, const Vec& d,
                             double pi, double sigma, double delta,
                             int max_backtracks, const TrialPointFn& trial_point,
                             const TrialFilter& admissible) {
  if (!(sigma > 0.0) || !(sigma < 0.5) || !(delta > 0.0) || !(delta < 1.0)) {
    throw std::invalid_argument("line_search: bad sigma or delta");
  }
  const int n = static_cast<int>(rp.x.size());
  const int m = static_cast<int>(rp.t.size());

  LineSearchResult out;
  const double phi0 = eval_merit(rp, rho);
  const bool ls_trace = std::getenv("RELAXIP_TRACE3") != nullptr;
  if (ls_trace) {
    std::ostringstream os;
    os << "LS d=[";
    for (Eigen::Index i = 0; i < d.size(); ++i) os << " " << d[i];
    os << " ] pi=" << pi;
    fprintf(stderr, "%s\n", os.str().c_str());
  }
  double alpha = 1.0;
  for (int k = 0; k <= max_backtracks; ++k) {
    const RelaxPoint trial =
        trial_point(rp.x + alpha * d.head(n), rp.t + alpha * d.segment(n, m),
                    rp.s + alpha * d.tail(m));
    const double phi = eval_merit(trial, rho);
    if (ls_trace) {
      fprintf(stderr, "  LS a=%.5f dphi=%.6e need<=%.6e\n", alpha, phi - phi0,
              sigma * alpha * pi);
    }
    if (std::isfinite(phi) && phi - phi0 <= sigma * alpha * pi &&
        (!admissible || admissible(trial))) {
      out.alpha = alpha;
      out.accepted = trial;
      out.backtracks = k;
      return out;
    }
    alpha *= delta;
  }
  out.failed = true;
  out.backtracks = max_backtracks + 1;
  return out;
}

Vec dual_safeguard(const Vec& t_next, const Vec& s_hat, double mu) {
  if (t_next.size() != s_hat.size()) {
    throw std::invalid_argument("dual_safeguard: dimension mismatch");
  }
  Vec s = s_hat;
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    if (t_next[j] > 0.0) s[j] = std::min(s_hat[j], mu / t_next[j]);
  }
  return s;
}

}  // namespace relaxip
