// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <stdexcept>

#include "maed/tensor.hpp"

namespace maed::losses {

struct LossWeights {
    double lambda_2d = 300.0;
    double lambda_3d = 300.0;
    double lambda_pose = 60.0;
    double lambda_shape = 0.06;
    double lambda_norm = 1e-4;

    /// Throws std::invalid_argument on negative or non-finite weights.
    void validate() const;
};

/// Predicted quantities for F frames.
struct Prediction {
    Tensor joints3d;  // (F, J, 3)
    Tensor joints2d;  // (F, J, 2)
    Tensor pose_aa;   // (F, 72) axis-angle, joint-major
    Tensor beta;      // (F, 10)
};

struct Target {
    Tensor joints3d;  // (F, J, 3)
    Tensor joints2d;  // (F, J, 2)
    Tensor pose_aa;   // (F, 72)
    Tensor beta;      // (F, 10)
    /// Per-frame 1/0 flag; frames without 3D labels skip the 3D and SMPL
    /// terms. Absent means every frame is labeled.
    std::optional<Tensor> has_3d;  // (F)
};

/// Unweighted components, each averaged over the frames it applies to.
struct LossReport {
    Tensor total;  // scalar, differentiable
    double l3d = 0.0;
    double l2d = 0.0;
    double smpl_pose = 0.0;   // |θ - θgt|
    double smpl_shape = 0.0;  // |β - βgt|
    double norm = 0.0;        // |β| + |θ|

    double smpl() const { return smpl_pose + smpl_shape; }
};

/// Per frame: L_3D and L_2D sum joint Euclidean distances, L_SMPL compares
/// axis-angle pose and shape vectors, L_NORM penalizes the parameter norms.
/// total = λ_3D·L_3D + λ_2D·L_2D + λ_pose·|θ-θgt| + λ_shape·|β-βgt| + λ_norm·L_NORM.
LossReport total_loss(const Prediction& pred, const Target& gt, const LossWeights& w);

}  // namespace maed::losses
