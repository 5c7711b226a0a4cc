#pragma once

#include <Eigen/Dense>

namespace vrbflow {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Scalar-first unit quaternion [q0, q1, q2, q3].
using Quat = Eigen::Vector4d;

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace vrbflow
