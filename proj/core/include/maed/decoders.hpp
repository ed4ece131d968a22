// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "maed/kinematics.hpp"
#include "maed/nn.hpp"
#include "maed/random.hpp"
#include "maed/tensor.hpp"

/// Regressors from per-frame features to body-model parameters, and the
/// body-model forward pass.
namespace maed::decoders {

/// Per-frame parameters; F frames share the leading axis.
struct SmplParams {
    Tensor pose;    // (F, 24, 6) 6D rotation per joint, index 0 = global orientation
    Tensor beta;    // (F, 10)
    Tensor camera;  // (F, 3) = (s, t_x, t_y)

    std::size_t frames() const { return beta.shape()[0]; }
};

inline constexpr std::size_t kPoseWidth = kinematics::kJointCount * 6;
inline constexpr std::size_t kParamWidth = kPoseWidth + kinematics::kShapeDims + 3;  // 157

/// Initial weights of the output heads.
enum class HeadInit {
    kRestPose,  // zero weights; biases give identity rotations, zero shape, camera (0.8, 0, 0)
    kXavier,    // random weights and biases, for structural and gradient tests
};

inline constexpr double kInitialCameraScale = 0.8;

/// One affine regressor per joint, consuming the frame feature followed by
/// the 6D predictions of every ancestor, root first.
struct KtdWeights {
    kinematics::KinematicTree tree = kinematics::KinematicTree::smpl();
    std::size_t width = 0;
    std::vector<nn::Linear> joints;  // indexed by joint label
    nn::Linear shape;
    nn::Linear camera;

    static KtdWeights make(const kinematics::KinematicTree& tree, std::size_t width, Rng& rng,
                           HeadInit init = HeadInit::kRestPose);

    /// d + 6·|A(k)|
    std::size_t input_width(std::size_t k) const;
    /// 6·Σ_k(d + 6|A(k)| + 1) + 13·(d + 1)
    static std::size_t expected_parameter_count(const kinematics::KinematicTree& tree, std::size_t width);
    void collect(const std::string& prefix, nn::ParamList& out) const;
};

/// x (F, d) -> parameters. Children consume predicted (not ground-truth)
/// ancestor rotations.
SmplParams ktd_decode(const KtdWeights& w, const Tensor& x);

/// Residual refinement of a full parameter vector:
/// Θ ← Θ + F(Concat(x, Θ)), starting from a learned Θ⁽⁰⁾.
struct IterativeWeights {
    nn::Linear regressor;  // (d + 157) -> 157
    Tensor initial;        // (157)
    std::size_t iterations = 3;

    static IterativeWeights make(std::size_t width, std::size_t iterations, Rng& rng,
                                 HeadInit init = HeadInit::kRestPose);
    void collect(const std::string& prefix, nn::ParamList& out) const;
};

SmplParams iterative_decode(const IterativeWeights& w, const Tensor& x);

/// Splits (F, 157) into pose, shape and camera.
SmplParams split_params(const Tensor& theta);

struct SmplOutput {
    Tensor joints3d;   // (F, 24, 3)
    Tensor joints2d;   // (F, 24, 2)
    Tensor rotations;  // (F, 24, 3, 3) local rotations
};

/// 6D -> rotation, shape-conditioned rest joints, forward kinematics and
/// weak-perspective projection.
SmplOutput smpl_forward(const kinematics::KinematicTree& body, const SmplParams& params);

}  // namespace maed::decoders
