// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>

#include <Eigen/Core>

#include "maed/tensor.hpp"

/// Joint-error metrics. Inputs are (F, J, 3) in meters; results in mm.
namespace maed::metrics {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 3>;

class DegenerateAlignment : public std::domain_error {
   public:
    using std::domain_error::domain_error;
};

struct Similarity {
    double scale = 1.0;
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

/// Least-squares similarity (s, R, t) minimizing Σ|s·R·p_i + t - g_i|².
/// Throws DegenerateAlignment when either point set is (nearly) collinear.
Similarity procrustes(const Points& pred, const Points& gt);
Points apply(const Similarity& s, const Points& p);

double mpjpe(const Tensor& pred, const Tensor& gt);
/// Mean over frames of the MPJPE after per-frame similarity alignment.
double pa_mpjpe(const Tensor& pred, const Tensor& gt);
/// Mean over joints and interior frames of the norm of the difference of
/// second temporal differences. Requires F >= 3.
double accel_error(const Tensor& pred, const Tensor& gt);

Points frame_points(const Tensor& joints, std::size_t frame);

}  // namespace maed::metrics
