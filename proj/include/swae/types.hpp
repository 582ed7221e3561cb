#pragma once

#include <Eigen/Dense>

namespace swae {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

} // namespace swae
