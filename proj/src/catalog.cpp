#include <algorithm>
#include <cctype>
#include <cmath>

#include "relaxip/model.hpp"

namespace relaxip {
namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

Vec vec4(double a, double b, double c, double d) {
  Vec v(4);
  v << a, b, c, d;
  return v;
}

// min x1  s.t.  x1^2 - x2 - 1 = 0,  x1 - x3 - 2 = 0,  x2 >= 0,  x3 >= 0.
// Unique minimizer (2, 3, 0); hard for line-search interior-point methods.
ProblemModel make_tp1() {
  ProblemModel p;
  p.name = "TP1";
  p.n = 3;
  p.m_e = 2;
  p.m = 2;
  p.eval_f = [](const Vec& x) { return x[0]; };
  p.eval_grad_f = [](const Vec&) { return vec3(1.0, 0.0, 0.0); };
  p.eval_h = [](const Vec& x) {
    return vec2(x[0] * x[0] - x[1] - 1.0, x[0] - x[2] - 2.0);
  };
  p.eval_jac_h = [](const Vec& x) {
    Mat J(3, 2);
    J.col(0) = vec3(2.0 * x[0], -1.0, 0.0);
    J.col(1) = vec3(1.0, 0.0, -1.0);
    return J;
  };
  p.eval_c = [](const Vec& x) { return vec2(-x[1], -x[2]); };
  p.eval_jac_c = [](const Vec& x) {
    Mat J(3, 2);
    J.col(0) = vec3(0.0, -1.0, 0.0);
    J.col(1) = vec3(0.0, 0.0, -1.0);
    return J;
  };
  p.standard_start = vec3(-4.0, 1.0, 1.0);
  return p;
}

// Hock-Schittkowski 13: min (x1-2)^2 + x2^2 s.t. (1-x1)^3 - x2 >= 0,
// x1 >= 0, x2 >= 0.  The solution (1, 0) is a singular stationary point:
// neither LICQ nor MFCQ holds there.
ProblemModel make_tp2() {
  ProblemModel p;
  p.name = "TP2";
  p.n = 2;
  p.m_e = 0;
  p.m = 3;
  p.eval_f = [](const Vec& x) {
    return (x[0] - 2.0) * (x[0] - 2.0) + x[1] * x[1];
  };
  p.eval_grad_f = [](const Vec& x) {
    return vec2(2.0 * (x[0] - 2.0), 2.0 * x[1]);
  };
  p.eval_c = [](const Vec& x) {
    const double u = 1.0 - x[0];
    return vec3(x[1] - u * u * u, -x[0], -x[1]);
  };
  p.eval_jac_c = [](const Vec& x) {
    const double u = 1.0 - x[0];
    Mat J(2, 3);
    J.col(0) = vec2(3.0 * u * u, 1.0);
    J.col(1) = vec2(-1.0, 0.0);
    J.col(2) = vec2(0.0, -1.0);
    return J;
  };
  p.standard_start = vec2(-2.0, -2.0);
  return p;
}

// The "isolated" infeasible problem: min x1 + x2 with four incompatible
// inequalities; (0, 0) is the strict minimizer of the constraint violation.
ProblemModel make_tp3() {
  ProblemModel p;
  p.name = "TP3";
  p.n = 2;
  p.m_e = 0;
  p.m = 4;
  p.eval_f = [](const Vec& x) { return x[0] + x[1]; };
  p.eval_grad_f = [](const Vec&) { return vec2(1.0, 1.0); };
  p.eval_c = [](const Vec& x) {
    return vec4(x[0] * x[0] - x[1] + 1.0, x[0] * x[0] + x[1] + 1.0,
                -x[0] + x[1] * x[1] + 1.0, x[0] + x[1] * x[1] + 1.0);
  };
  p.eval_jac_c = [](const Vec& x) {
    Mat J(2, 4);
    J.col(0) = vec2(2.0 * x[0], -1.0);
    J.col(1) = vec2(2.0 * x[0], 1.0);
    J.col(2) = vec2(-1.0, 2.0 * x[1]);
    J.col(3) = vec2(1.0, 2.0 * x[1]);
    return J;
  };
  p.standard_start = vec2(3.0, 2.0);
  return p;
}

ProblemModel make_hs10() {
  ProblemModel p;
  p.name = "HS10";
  p.n = 2;
  p.m_e = 0;
  p.m = 1;
  p.eval_f = [](const Vec& x) { return x[0] - x[1]; };
  p.eval_grad_f = [](const Vec&) { return vec2(1.0, -1.0); };
  p.eval_c = [](const Vec& x) {
    Vec c(1);
    c[0] = 3.0 * x[0] * x[0] - 2.0 * x[0] * x[1] + x[1] * x[1] - 1.0;
    return c;
  };
  p.eval_jac_c = [](const Vec& x) {
    Mat J(2, 1);
    J.col(0) = vec2(6.0 * x[0] - 2.0 * x[1], -2.0 * x[0] + 2.0 * x[1]);
    return J;
  };
  p.standard_start = vec2(-10.0, 10.0);
  return p;
}

ProblemModel make_hs11() {
  ProblemModel p;
  p.name = "HS11";
  p.n = 2;
  p.m_e = 0;
  p.m = 1;
  p.eval_f = [](const Vec& x) {
    return (x[0] - 5.0) * (x[0] - 5.0) + x[1] * x[1] - 25.0;
  };
  p.eval_grad_f = [](const Vec& x) {
    return vec2(2.0 * (x[0] - 5.0), 2.0 * x[1]);
  };
  p.eval_c = [](const Vec& x) {
    Vec c(1);
    c[0] = x[0] * x[0] - x[1];
    return c;
  };
  p.eval_jac_c = [](const Vec& x) {
    Mat J(2, 1);
    J.col(0) = vec2(2.0 * x[0], -1.0);
    return J;
  };
  p.standard_start = vec2(4.9, 0.1);
  return p;
}

ProblemModel make_hs14() {
  ProblemModel p;
  p.name = "HS14";
  p.n = 2;
  p.m_e = 1;
  p.m = 1;
  p.eval_f = [](const Vec& x) {
    return (x[0] - 2.0) * (x[0] - 2.0) + (x[1] - 1.0) * (x[1] - 1.0);
  };
  p.eval_grad_f = [](const Vec& x) {
    return vec2(2.0 * (x[0] - 2.0), 2.0 * (x[1] - 1.0));
  };
  p.eval_h = [](const Vec& x) {
    Vec h(1);
    h[0] = x[0] - 2.0 * x[1] + 1.0;
    return h;
  };
  p.eval_jac_h = [](const Vec&) {
    Mat J(2, 1);
    J.col(0) = vec2(1.0, -2.0);
    return J;
  };
  p.eval_c = [](const Vec& x) {
    Vec c(1);
    c[0] = 0.25 * x[0] * x[0] + x[1] * x[1] - 1.0;
    return c;
  };
  p.eval_jac_c = [](const Vec& x) {
    Mat J(2, 1);
    J.col(0) = vec2(0.5 * x[0], 2.0 * x[1]);
    return J;
  };
  p.standard_start = vec2(2.0, 2.0);
  return p;
}

ProblemModel make_hs22() {
  ProblemModel p;
  p.name = "HS22";
  p.n = 2;
  p.m_e = 0;
  p.m = 2;
  p.eval_f = [](const Vec& x) {
    return (x[0] - 2.0) * (x[0] - 2.0) + (x[1] - 1.0) * (x[1] - 1.0);
  };
  p.eval_grad_f = [](const Vec& x) {
    return vec2(2.0 * (x[0] - 2.0), 2.0 * (x[1] - 1.0));
  };
  p.eval_c = [](const Vec& x) {
    return vec2(x[0] + x[1] - 2.0, x[0] * x[0] - x[1]);
  };
  p.eval_jac_c = [](const Vec& x) {
    Mat J(2, 2);
    J.col(0) = vec2(1.0, 1.0);
    J.col(1) = vec2(2.0 * x[0], -1.0);
    return J;
  };
  p.standard_start = vec2(2.0, 2.0);
  return p;
}

// Rosen-Suzuki problem.
ProblemModel make_hs43() {
  ProblemModel p;
  p.name = "HS43";
  p.n = 4;
  p.m_e = 0;
  p.m = 3;
  p.eval_f = [](const Vec& x) {
    return x[0] * x[0] + x[1] * x[1] + 2.0 * x[2] * x[2] + x[3] * x[3] -
           5.0 * x[0] - 5.0 * x[1] - 21.0 * x[2] + 7.0 * x[3];
  };
  p.eval_grad_f = [](const Vec& x) {
    return vec4(2.0 * x[0] - 5.0, 2.0 * x[1] - 5.0, 4.0 * x[2] - 21.0,
                2.0 * x[3] + 7.0);
  };
  p.eval_c = [](const Vec& x) {
    const double sq = x.squaredNorm();
    return vec3(sq + x[0] - x[1] + x[2] - x[3] - 8.0,
                sq + x[1] * x[1] + x[3] * x[3] - x[0] - x[3] - 10.0,
                2.0 * x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + 2.0 * x[0] -
                    x[1] - x[3] - 5.0);
  };
  p.eval_jac_c = [](const Vec& x) {
    Mat J(4, 3);
    J.col(0) = vec4(2.0 * x[0] + 1.0, 2.0 * x[1] - 1.0, 2.0 * x[2] + 1.0,
                    2.0 * x[3] - 1.0);
    J.col(1) =
        vec4(2.0 * x[0] - 1.0, 4.0 * x[1], 2.0 * x[2], 4.0 * x[3] - 1.0);
    J.col(2) = vec4(4.0 * x[0] + 2.0, 2.0 * x[1] - 1.0, 2.0 * x[2], -1.0);
    return J;
  };
  p.standard_start = vec4(0.0, 0.0, 0.0, 0.0);
  return p;
}

// Charalambous-Bandler minimax problems in their smooth reformulation:
// minimize the bound x3 over the three branch constraints.
ProblemModel make_cb2() {
  ProblemModel p;
  p.name = "CB2";
  p.n = 3;
  p.m_e = 0;
  p.m = 3;
  p.eval_f = [](const Vec& x) { return x[2]; };
  p.eval_grad_f = [](const Vec&) { return vec3(0.0, 0.0, 1.0); };
  p.eval_c = [](const Vec& x) {
    const double e = std::exp(x[1] - x[0]);
    return vec3(x[0] * x[0] + x[1] * x[1] * x[1] * x[1] - x[2],
                (2.0 - x[0]) * (2.0 - x[0]) + (2.0 - x[1]) * (2.0 - x[1]) -
                    x[2],
                2.0 * e - x[2]);
  };
  p.eval_jac_c = [](const Vec& x) {
    const double e = std::exp(x[1] - x[0]);
    Mat J(3, 3);
    J.col(0) = vec3(2.0 * x[0], 4.0 * x[1] * x[1] * x[1], -1.0);
    J.col(1) = vec3(-2.0 * (2.0 - x[0]), -2.0 * (2.0 - x[1]), -1.0);
    J.col(2) = vec3(-2.0 * e, 2.0 * e, -1.0);
    return J;
  };
  p.standard_start = vec3(2.0, 2.0, 2.0);
  return p;
}

ProblemModel make_cb3() {
  ProblemModel p = make_cb2();
  p.name = "CB3";
  p.eval_c = [](const Vec& x) {
    const double e = std::exp(x[1] - x[0]);
    return vec3(x[0] * x[0] * x[0] * x[0] + x[1] * x[1] - x[2],
                (2.0 - x[0]) * (2.0 - x[0]) + (2.0 - x[1]) * (2.0 - x[1]) -
                    x[2],
                2.0 * e - x[2]);
  };
  p.eval_jac_c = [](const Vec& x) {
    const double e = std::exp(x[1] - x[0]);
    Mat J(3, 3);
    J.col(0) = vec3(4.0 * x[0] * x[0] * x[0], 2.0 * x[1], -1.0);
    J.col(1) = vec3(-2.0 * (2.0 - x[0]), -2.0 * (2.0 - x[1]), -1.0);
    J.col(2) = vec3(-2.0 * e, 2.0 * e, -1.0);
    return J;
  };
  return p;
}

}  // namespace

const std::vector<ProblemModel>& builtin_catalog() {
  static const std::vector<ProblemModel> catalog = {
      make_tp1(),  make_tp2(),  make_tp3(), make_hs10(), make_hs11(),
      make_hs14(), make_hs22(), make_hs43(), make_cb2(), make_cb3()};
  return catalog;
}

const ProblemModel* lookup_problem(std::string_view name) {
  auto eq_fold = [](std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
      if (std::toupper(static_cast<unsigned char>(a[i])) !=
          std::toupper(static_cast<unsigned char>(b[i]))) {
        return false;
      }
    }
    return true;
  };
  for (const auto& p : builtin_catalog()) {
    if (eq_fold(p.name, name)) return &p;
  }
  return nullptr;
}

}  // namespace relaxip
