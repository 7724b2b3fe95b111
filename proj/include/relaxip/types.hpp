#pragma once

#include <Eigen/Dense>

namespace relaxip {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace relaxip
