#include "relaxip/relaxation.hpp"

#include <cmath>

namespace relaxip {

void eval_zy(const Vec& t, const Vec& s, const BarrierParams& bp, Vec& z,
             Vec& y) {
  if (!bp.valid()) {
    throw std::invalid_argument("eval_zy: mu and tau must be positive");
  }
  if (t.size() != s.size()) {
    throw std::invalid_argument("eval_zy: t and s must have equal length");
  }
  const auto m = t.size();
  z.resize(m);
  y.resize(m);
  const double taumu = bp.tau * bp.mu;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double diff = bp.tau * s[j] - t[j];
    const double disc = std::sqrt(diff * diff + 4.0 * taumu);
    // Compute the larger root explicitly and back the smaller one out of
    // z*y = tau*mu; the explicit formula for the smaller root cancels badly
    // when |diff| dominates sqrt(tau*mu).
    if (diff >= 0.0) {
      y[j] = 0.5 * (disc + diff);
      z[j] = taumu / y[j];
    } else {
      z[j] = 0.5 * (disc - diff);
      y[j] = taumu / z[j];
    }
  }
}

ZyDerivs eval_zy_derivatives(const Vec& z, const Vec& y,
                             const BarrierParams& bp) {
  ZyDerivs d;
  const Vec zy = z + y;  // equals sqrt((tau*s - t)^2 + 4*tau*mu) > 0
  d.dz_dt = z.cwiseQuotient(zy);
  d.dy_dt = -y.cwiseQuotient(zy);
  d.dz_ds = -bp.tau * d.dz_dt;
  d.dy_ds = -bp.tau * d.dy_dt;
  return d;
}

namespace {

void fill_relaxation(RelaxPoint& rp, const BarrierParams& bp) {
  if (!bp.valid()) {
    throw std::invalid_argument("relaxation: mu and tau must be positive");
  }
  eval_zy(rp.t, rp.s, bp, rp.z, rp.y);
  rp.F = rp.f - bp.mu * rp.z.array().log().sum();
  const auto m_e = rp.h.size();
  const auto m = rp.c.size();
  rp.C.resize(m_e + 2 * m);
  rp.C.head(m_e) = rp.h;
  rp.C.segment(m_e, m) = rp.c + rp.t;
  rp.C.tail(m) = rp.z - rp.t;
}

}  // namespace

RelaxPoint make_point(const ProblemModel& p, const Vec& x, const Vec& t,
                      const Vec& s, const BarrierParams& bp) {
  RelaxPoint rp;
  rp.x = x;
  rp.t = t;
  rp.s = s;
  rp.f = p.eval_f(x);
  rp.h = p.m_e > 0 ? p.eval_h(x) : Vec(0);
  rp.c = p.m > 0 ? p.eval_c(x) : Vec(0);
  fill_relaxation(rp, bp);
  return rp;
}

RelaxPoint rebind_point(const RelaxPoint& rp, const BarrierParams& bp) {
  RelaxPoint out = rp;
  fill_relaxation(out, bp);
  return out;
}

ModelDerivs eval_model_derivs(const ProblemModel& p, const Vec& x) {
  ModelDerivs md;
  md.grad_f = p.eval_grad_f(x);
  md.Jh = p.m_e > 0 ? p.eval_jac_h(x) : Mat(p.n, 0);
  md.Jc = p.m > 0 ? p.eval_jac_c(x) : Mat(p.n, 0);
  return md;
}

Vec assemble_gradF(const Vec& grad_f, const Vec& z, const Vec& y,
                   const BarrierParams& bp) {
  const auto n = grad_f.size();
  const auto m = z.size();
  Vec g(n + 2 * m);
  g.head(n) = grad_f;
  const Vec inv_zy = (z + y).cwiseInverse();
  g.segment(n, m) = -bp.mu * inv_zy;
  g.tail(m) = (bp.tau * bp.mu) * inv_zy;
  return g;
}

Mat assemble_jacC(const Mat& Jh, const Mat& Jc, const Vec& z, const Vec& y,
                  const BarrierParams& bp) {
  const auto n = Jh.rows();
  const auto m_e = Jh.cols();
  const auto m = z.size();
  Mat J = Mat::Zero(n + 2 * m, m_e + 2 * m);
  J.topLeftCorner(n, m_e) = Jh;
  J.block(0, m_e, n, m) = Jc;
  const Vec inv_zy = (z + y).cwiseInverse();
  for (Eigen::Index j = 0; j < m; ++j) {
    J(n + j, m_e + j) = 1.0;
    J(n + j, m_e + m + j) = -y[j] * inv_zy[j];
    J(n + m + j, m_e + m + j) = -bp.tau * z[j] * inv_zy[j];
  }
  return J;
}

RelaxDerivs eval_derivatives(const ProblemModel& p, const RelaxPoint& rp,
                             const BarrierParams& bp) {
  return rebind_derivatives(eval_model_derivs(p, rp.x), rp, bp);
}

RelaxDerivs rebind_derivatives(const ModelDerivs& md, const RelaxPoint& rp,
                               const BarrierParams& bp) {
  RelaxDerivs d;
  d.md = md;
  d.gradF = assemble_gradF(md.grad_f, rp.z, rp.y, bp);
  d.jacC = assemble_jacC(md.Jh, md.Jc, rp.z, rp.y, bp);
  return d;
}

QOperator::QOperator(Mat B, Vec D, double tau)
    : B_(std::move(B)), D_(std::move(D)), tau_(tau) {
  if (B_.rows() != B_.cols()) {
    throw std::invalid_argument("QOperator: B must be square");
  }
}

QOperator QOperator::from_point(const Mat& B, const Vec& z, const Vec& y,
                                const BarrierParams& bp) {
  const Vec sum = z + y;
  return QOperator(B, bp.mu * sum.cwiseProduct(sum).cwiseInverse(), bp.tau);
}

Vec QOperator::apply(const Vec& d) const {
  if (d.size() != size()) {
    throw std::invalid_argument("QOperator::apply: dimension mismatch");
  }
  const int nn = n();
  const int mm = m();
  Vec out(size());
  out.head(nn) = B_ * d.head(nn);
  const Vec w = D_.cwiseProduct(d.segment(nn, mm) - tau_ * d.tail(mm));
  out.segment(nn, mm) = w;
  out.tail(mm) = -tau_ * w;
  return out;
}

double QOperator::quad(const Vec& d) const {
  if (d.size() != size()) {
    throw std::invalid_argument("QOperator::quad: dimension mismatch");
  }
  const int nn = n();
  const int mm = m();
  const Vec dx = d.head(nn);
  const Vec w = d.segment(nn, mm) - tau_ * d.tail(mm);
  return dx.dot(B_ * dx) + w.dot(D_.cwiseProduct(w));
}

Mat QOperator::materialize() const {
  if (size() > 200) {
    throw std::logic_error("QOperator::materialize: instance too large");
  }
  const int nn = n();
  const int mm = m();
  Mat Q = Mat::Zero(size(), size());
  Q.topLeftCorner(nn, nn) = B_;
  for (int j = 0; j < mm; ++j) {
    Q(nn + j, nn + j) = D_[j];
    Q(nn + j, nn + mm + j) = -tau_ * D_[j];
    Q(nn + mm + j, nn + j) = -tau_ * D_[j];
    Q(nn + mm + j, nn + mm + j) = tau_ * tau_ * D_[j];
  }
  return Q;
}

Vec ScalingR::apply(const Vec& v) const {
  if (v.size() != size()) {
    throw std::invalid_argument("ScalingR::apply: dimension mismatch");
  }
  Vec out = v;
  out.tail(m_) *= tau_;
  return out;
}

Vec ScalingR::apply_inverse(const Vec& v) const {
  if (v.size() != size()) {
    throw std::invalid_argument("ScalingR::apply_inverse: dimension mismatch");
  }
  Vec out = v;
  out.tail(m_) /= tau_;
  return out;
}

}  // namespace relaxip
