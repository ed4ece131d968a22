// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include "maed/attention.hpp"
#include "maed/config.hpp"
#include "maed/decoders.hpp"
#include "maed/kinematics.hpp"
#include "maed/nn.hpp"

namespace maed {

/// Tree whose ancestor sets drive the KTD regressors.
kinematics::KinematicTree decoder_tree(const RunConfig& cfg);

attention::SteConfig encoder_config(const RunConfig& cfg);

struct ModelOutput {
    decoders::SmplParams params;  // F = B·T frames
    decoders::SmplOutput body;
    Tensor pose_aa;  // (F, 72)
    std::vector<attention::BlockMaps> maps;
};

/// Patch embedding, spatial-temporal encoder and one decoder. The body model
/// is always the SMPL skeleton; only the decoder's tree varies.
struct Model {
    RunConfig config;
    kinematics::KinematicTree body = kinematics::KinematicTree::smpl();
    nn::Linear patch_embed;
    attention::SteEncoder encoder;
    std::optional<decoders::KtdWeights> ktd;
    std::optional<decoders::IterativeWeights> iterative;

    /// Deterministic in cfg.seed.
    static Model make(const RunConfig& cfg, decoders::HeadInit init = decoders::HeadInit::kRestPose);

    /// Stable names, fixed order.
    nn::ParamList parameters() const;

    decoders::SmplParams decode(const Tensor& features) const;

    /// obs (B, T, hw, d_in). When `oracle` is set, its parameters replace
    /// the decoder output (the encoder still runs).
    ModelOutput forward(const Tensor& obs, const decoders::SmplParams* oracle = nullptr) const;
};

}  // namespace maed
