#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace nlvar {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Regime indices are 0-based throughout the library and in file formats.
using RegimeIndex = std::size_t;

}  // namespace nlvar
