// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "maed/model.hpp"

#include "maed/geometry.hpp"
#include "maed/ops.hpp"

namespace maed {

kinematics::KinematicTree decoder_tree(const RunConfig& cfg) {
    switch (cfg.tree) {
        case TreeKind::kSmpl: return kinematics::KinematicTree::smpl();
        case TreeKind::kRandom: return kinematics::random_tree(cfg.tree_seed);
        case TreeKind::kReverse: return kinematics::reverse_tree(kinematics::KinematicTree::smpl());
    }
    throw ConfigError("unknown tree kind");
}

attention::SteConfig encoder_config(const RunConfig& cfg) {
    attention::SteConfig s;
    s.topology = cfg.encoder;
    s.blocks = cfg.blocks;
    s.width = cfg.width;
    s.heads = cfg.heads;
    s.patches = cfg.patches();
    s.max_frames = cfg.clip_length;
    s.mlp_ratio = cfg.mlp_ratio;
    return s;
}

Model Model::make(const RunConfig& cfg, decoders::HeadInit init) {
    cfg.validate();
    Rng rng(cfg.seed);
    Model m;
    m.config = cfg;
    m.patch_embed = nn::Linear::xavier(cfg.d_in, cfg.width, rng);
    m.encoder = attention::SteEncoder::make(encoder_config(cfg), rng);
    if (cfg.decoder == DecoderKind::kKtd) {
        m.ktd = decoders::KtdWeights::make(decoder_tree(cfg), cfg.width, rng, init);
    } else {
        m.iterative = decoders::IterativeWeights::make(cfg.width, cfg.iterations, rng, init);
    }
    return m;
}

nn::ParamList Model::parameters() const {
    nn::ParamList out;
    patch_embed.collect("patch_embed", out);
    encoder.collect("encoder", out);
    if (ktd) ktd->collect("ktd", out);
    if (iterative) iterative->collect("iterative", out);
    return out;
}

decoders::SmplParams Model::decode(const Tensor& features) const {
    if (ktd) return decoders::ktd_decode(*ktd, features);
    return decoders::iterative_decode(*iterative, features);
}

ModelOutput Model::forward(const Tensor& obs, const decoders::SmplParams* oracle) const {
    attention::EncodeOutput enc = attention::encode(encoder, patch_embed, obs);
    const Shape& fs = enc.features.shape();
    const std::size_t frames = enc.features.numel() / fs.back();
    const Tensor features = reshape(enc.features, {frames, fs.back()});

    ModelOutput out;
    out.params = oracle ? *oracle : decode(features);
    out.body = decoders::smpl_forward(body, out.params);
    out.pose_aa = reshape(geometry::matrix_to_axis_angle(out.body.rotations), {frames, kinematics::kJointCount * 3});
    out.maps = std::move(enc.maps);
    return out;
}

}  // namespace maed
