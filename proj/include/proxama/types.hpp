#pragma once

#include <Eigen/Dense>

namespace proxama {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

}  // namespace proxama
