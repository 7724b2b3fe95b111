#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "relaxip/model.hpp"

namespace relaxip {
namespace {

void track(DerivativeCheckBlock& block, double analytic, double numeric,
           int row, int col) {
  const double rel =
      std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
  if (rel > block.max_rel_error) {
    block.max_rel_error = rel;
    block.row = row;
    block.col = col;
  }
}

}  // namespace

double DerivativeCheckReport::worst() const {
  return std::max({grad_f.max_rel_error, jac_h.max_rel_error,
                   jac_c.max_rel_error});
}

bool DerivativeCheckReport::passed(double tol) const {
  return diagnostics.empty() && worst() <= tol;
}

DerivativeCheckReport check_derivatives(const ProblemModel& model, const Vec& x,
                                        double h) {
  if (x.size() != model.n) {
    throw std::invalid_argument("check_derivatives: x has wrong dimension");
  }
  if (!(h > 0.0)) {
    throw std::invalid_argument("check_derivatives: step must be positive");
  }

  DerivativeCheckReport report;

  const Vec grad_f = model.eval_grad_f(x);
  const Mat jac_h = model.m_e > 0 ? model.eval_jac_h(x) : Mat(model.n, 0);
  const Mat jac_c = model.m > 0 ? model.eval_jac_c(x) : Mat(model.n, 0);
  if (!grad_f.allFinite()) {
    report.diagnostics.push_back("grad_f returned a non-finite value");
  }
  if (!jac_h.allFinite()) {
    report.diagnostics.push_back("jac_h returned a non-finite value");
  }
  if (!jac_c.allFinite()) {
    report.diagnostics.push_back("jac_c returned a non-finite value");
  }

  Vec xp = x;
  Vec xm = x;
  for (int i = 0; i < model.n; ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;

    const double fp = model.eval_f(xp);
    const double fm = model.eval_f(xm);
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      report.diagnostics.push_back("f returned a non-finite value");
    } else {
      track(report.grad_f, grad_f[i], (fp - fm) / (2.0 * h), i, -1);
    }

    if (model.m_e > 0) {
      const Vec hp = model.eval_h(xp);
      const Vec hm = model.eval_h(xm);
      if (!hp.allFinite() || !hm.allFinite()) {
        report.diagnostics.push_back("h returned a non-finite value");
      } else {
        for (int j = 0; j < model.m_e; ++j) {
          track(report.jac_h, jac_h(i, j), (hp[j] - hm[j]) / (2.0 * h), i, j);
        }
      }
    }

    if (model.m > 0) {
      const Vec cp = model.eval_c(xp);
      const Vec cm = model.eval_c(xm);
      if (!cp.allFinite() || !cm.allFinite()) {
        report.diagnostics.push_back("c returned a non-finite value");
      } else {
        for (int j = 0; j < model.m; ++j) {
          track(report.jac_c, jac_c(i, j), (cp[j] - cm[j]) / (2.0 * h), i, j);
        }
      }
    }

    xp[i] = x[i];
    xm[i] = x[i];
  }

  return report;
}

}  // namespace relaxip
