#include "relaxip/bfgs.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace relaxip {

void damped_bfgs_update(BfgsState& state, const Vec& step,
                        const Vec& grad_diff) {
  if (step.size() != state.B.rows() || grad_diff.size() != state.B.rows()) {
    throw std::invalid_argument("damped_bfgs_update: dimension mismatch");
  }
  if (step.norm() <= 1e-14) return;

  const Vec Bs = state.B * step;
  const double b = step.dot(Bs);
  if (b <= 1e-16) return;

  const double sq = step.dot(grad_diff);
  const double theta =
      sq >= state.damping_threshold * b ? 1.0 : 0.8 * b / (b - sq);
  const Vec r = theta * grad_diff + (1.0 - theta) * Bs;
  const double sr = step.dot(r);  // >= 0.2 b > 0 by the damping choice
  if (!(sr > 0.0)) return;

  Mat next = state.B - (Bs * Bs.transpose()) / b + (r * r.transpose()) / sr;
  next = 0.5 * (next + next.transpose());  // remove accumulation asymmetry

  // Keep the approximation inside its intended regime: eigenvalues in
  // [gamma, cap].  A breach of the ceiling means the damped updates have
  // been accumulating spurious curvature (tiny steps against indefinite
  // local geometry); the accumulated matrix carries no usable information
  // at that point, so restart from the identity rather than clip.
  Eigen::SelfAdjointEigenSolver<Mat> es(next);
  if (es.info() != Eigen::Success) return;
  if (es.eigenvalues().maxCoeff() > state.cap) {
    state.B = Mat::Identity(next.rows(), next.cols());
    return;
  }
  if (es.eigenvalues().minCoeff() < state.gamma) {
    const Vec lifted = es.eigenvalues().cwiseMax(state.gamma);
    next = es.eigenvectors() * lifted.asDiagonal() *
           es.eigenvectors().transpose();
    next = 0.5 * (next + next.transpose());
  }
  state.B = std::move(next);
}

}  // namespace relaxip
