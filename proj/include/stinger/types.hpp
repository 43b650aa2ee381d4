#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace stinger {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Seeds are plain 64-bit integers; every random operation takes one.
using Seed = std::uint64_t;

}  // namespace stinger
