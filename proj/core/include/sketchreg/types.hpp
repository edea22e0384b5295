#pragma once

#include <Eigen/Dense>

namespace sketchreg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

using Index = Eigen::Index;

}  // namespace sketchreg
