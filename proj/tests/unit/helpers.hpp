// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "maed/gradcheck.hpp"
#include "maed/ops.hpp"
#include "maed/random.hpp"
#include "maed/tensor.hpp"

namespace maed::test {

inline Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0, bool requires_grad = true) {
    std::vector<double> v(numel(shape));
    for (double& x : v) x = rng.uniform(lo, hi);
    return Tensor::from(std::move(shape), std::move(v), requires_grad);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

/// Reduces an arbitrary-shape output to a scalar with fixed random weights,
/// so every output coordinate contributes to the checked gradient.
inline Tensor weighted_sum(const Tensor& y, std::uint64_t seed = 99) {
    Rng rng(seed);
    std::vector<double> w(y.numel());
    for (double& x : w) x = rng.uniform(0.5, 1.5);
    return sum(mul(y, Tensor::from(y.shape(), std::move(w))));
}

/// Full finite-difference check of `f` over `inputs`.
inline GradCheckResult gradcheck(const std::function<Tensor()>& f, const std::vector<Tensor>& inputs,
                                 std::uint64_t seed = 99) {
    nn::ParamList named;
    for (std::size_t i = 0; i < inputs.size(); ++i) named.push_back({"input" + std::to_string(i), inputs[i]});
    return check_gradients([&] { return weighted_sum(f(), seed); }, named);
}

// Quaternion (w, x, y, z) to rotation matrix; independent of the Rodrigues code.
inline Eigen::Matrix3d quaternion_matrix(double w, double x, double y, double z) {
    Eigen::Matrix3d r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),  //
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),   //
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
}

inline Eigen::Matrix3d axis_angle_oracle(const Eigen::Vector3d& v) {
    const double theta = v.norm();
    if (theta == 0.0) return Eigen::Matrix3d::Identity();
    const Eigen::Vector3d axis = v / theta;
    const double s = std::sin(theta / 2.0);
    return quaternion_matrix(std::cos(theta / 2.0), s * axis.x(), s * axis.y(), s * axis.z());
}

inline Eigen::Matrix3d random_rotation(Rng& rng) {
    // Uniform unit quaternion via normalized Gaussian.
    double q[4];
    double n = 0.0;
    for (double& c : q) {
        c = rng.normal();
        n += c * c;
    }
    n = std::sqrt(n);
    return quaternion_matrix(q[0] / n, q[1] / n, q[2] / n, q[3] / n);
}

/// Horn's closed-form absolute orientation with scale: the rotation is the
/// dominant eigenvector of a symmetric 4×4 matrix, so no SVD is involved.
struct HornAlignment {
    double scale;
    Eigen::Matrix3d rotation;
    Eigen::Vector3d translation;
};

inline HornAlignment horn_align(const Eigen::Matrix<double, Eigen::Dynamic, 3>& p,
                                const Eigen::Matrix<double, Eigen::Dynamic, 3>& g) {
    const Eigen::RowVector3d mp = p.colwise().mean();
    const Eigen::RowVector3d mg = g.colwise().mean();
    const Eigen::Matrix<double, Eigen::Dynamic, 3> x = p.rowwise() - mp;
    const Eigen::Matrix<double, Eigen::Dynamic, 3> y = g.rowwise() - mg;
    const Eigen::Matrix3d s = x.transpose() * y;  // S_ab = Σ x_a y_b
    Eigen::Matrix4d n;
    n << s(0, 0) + s(1, 1) + s(2, 2), s(1, 2) - s(2, 1), s(2, 0) - s(0, 2), s(0, 1) - s(1, 0),  //
        s(1, 2) - s(2, 1), s(0, 0) - s(1, 1) - s(2, 2), s(0, 1) + s(1, 0), s(2, 0) + s(0, 2),    //
        s(2, 0) - s(0, 2), s(0, 1) + s(1, 0), -s(0, 0) + s(1, 1) - s(2, 2), s(1, 2) + s(2, 1),   //
        s(0, 1) - s(1, 0), s(2, 0) + s(0, 2), s(1, 2) + s(2, 1), -s(0, 0) - s(1, 1) + s(2, 2);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(n);
    const Eigen::Vector4d q = eig.eigenvectors().col(3);
    HornAlignment a;
    a.rotation = quaternion_matrix(q(0), q(1), q(2), q(3));
    a.scale = (y.array() * (x * a.rotation.transpose()).array()).sum() / x.squaredNorm();
    a.translation = mg.transpose() - a.scale * a.rotation * mp.transpose();
    return a;
}

}  // namespace maed::test
