// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "maed/tensor.hpp"

/// Rotation parameterizations and the weak-perspective camera.
///
/// The 6D representation packs the first two *columns* of a rotation matrix,
/// (a1, a2). Conversion back runs Gram-Schmidt: b1 = a1/|a1|,
/// b2 = normalize(a2 - (b1·a2) b1), b3 = b1 × b2, R = [b1 b2 b3].
namespace maed::geometry {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Norm below which a 6D column is considered degenerate.
inline constexpr double kRotationEps = 1e-8;

class DegenerateRotation : public std::domain_error {
   public:
    using std::domain_error::domain_error;
};

class InvalidRotation : public std::domain_error {
   public:
    using std::domain_error::domain_error;
};

class InvalidCamera : public std::domain_error {
   public:
    using std::domain_error::domain_error;
};

struct AxisAngle {
    Vec3 v = Vec3::Zero();
};

struct Rot6D {
    std::array<double, 6> r{};  // a1 = r[0..2], a2 = r[3..5]

    static Rot6D identity() { return {{1.0, 0.0, 0.0, 0.0, 1.0, 0.0}}; }
};

/// Weak-perspective camera (s, t_x, t_y).
struct Camera {
    double scale = 1.0;
    double tx = 0.0;
    double ty = 0.0;
};

Mat3 rot6d_to_matrix(const Rot6D& r);
Rot6D matrix_to_rot6d(const Mat3& m);

/// Rodrigues formula; a series expansion is used below |v| = 1e-3.
Mat3 axis_angle_to_matrix(const AxisAngle& a);
/// Inverse of axis_angle_to_matrix with |v| in [0, pi]. The axis sign at
/// exactly pi is arbitrary.
AxisAngle matrix_to_axis_angle(const Mat3& m);

/// RᵀR = I and det R = 1 within `tol`.
bool is_rotation(const Mat3& m, double tol = 1e-6);

Vec2 project(const Vec3& joint, const Camera& cam);
std::vector<Vec2> project(std::span<const Vec3> joints, const Camera& cam);

// Differentiable batched forms. Leading axes are arbitrary.

/// (..., 6) -> (..., 3, 3)
Tensor rot6d_to_matrix(const Tensor& r6);
/// (..., 3) -> (..., 3, 3)
Tensor axis_angle_to_matrix(const Tensor& v);
/// (..., 3, 3) -> (..., 3). Inputs must be rotations to within 1e-4.
Tensor matrix_to_axis_angle(const Tensor& m);
/// joints (F, J, 3), cameras (F, 3) -> (F, J, 2)
Tensor project(const Tensor& joints, const Tensor& cameras);

}  // namespace maed::geometry
