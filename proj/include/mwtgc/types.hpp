#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace mwtgc {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

} // namespace mwtgc
