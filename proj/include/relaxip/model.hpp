#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "relaxip/types.hpp"

namespace relaxip {

/**
 * Smooth nonlinear program in the standard form
 *
 *   min  f(x)
 *   s.t. h_i(x)  = 0,  i = 1..m_e
 *        c_j(x) <= 0,  j = 1..m
 *
 * Bounds are not treated specially; encode them as general inequalities.
 * Jacobians are stored column-wise: column i of jac_h is the gradient of
 * h_i, column j of jac_c is the gradient of c_j (both n-vectors).
 */
struct ProblemModel {
  std::string name;
  int n = 0;    ///< number of decision variables
  int m_e = 0;  ///< number of equality constraints
  int m = 0;    ///< number of inequality constraints

  std::function<double(const Vec&)> eval_f;
  std::function<Vec(const Vec&)> eval_h;       ///< size m_e (empty allowed)
  std::function<Vec(const Vec&)> eval_c;       ///< size m (empty allowed)
  std::function<Vec(const Vec&)> eval_grad_f;  ///< size n
  std::function<Mat(const Vec&)> eval_jac_h;   ///< n x m_e
  std::function<Mat(const Vec&)> eval_jac_c;   ///< n x m

  Vec standard_start;  ///< published starting point, size n
};

/// All built-in test problems, in canonical order.
const std::vector<ProblemModel>& builtin_catalog();

/// Case-insensitive catalog lookup; nullptr if the name is unknown.
const ProblemModel* lookup_problem(std::string_view name);

/// Worst relative error found in one derivative block, with its location.
struct DerivativeCheckBlock {
  double max_rel_error = 0.0;
  int row = -1;  ///< variable index of the worst entry
  int col = -1;  ///< constraint index (-1 for the objective gradient)
};

struct DerivativeCheckReport {
  DerivativeCheckBlock grad_f;
  DerivativeCheckBlock jac_h;
  DerivativeCheckBlock jac_c;
  /// Non-finite values met while probing, one message per offending evaluator.
  std::vector<std::string> diagnostics;

  double worst() const;
  bool passed(double tol) const;
};

/**
 * Compares the analytic derivatives of a model against central finite
 * differences with step h, at the point x.  Relative errors use the
 * denominator max(1, |analytic|) so that near-zero entries are judged on
 * absolute error.
 */
DerivativeCheckReport check_derivatives(const ProblemModel& model, const Vec& x,
                                        double h = 1e-6);

}  // namespace relaxip
