#pragma once

#include <Eigen/Core>

namespace bwretrieve {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

}  // namespace bwretrieve
