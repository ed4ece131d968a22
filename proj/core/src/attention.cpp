// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "maed/attention.hpp"

#include <cmath>
#include <string>

#include "maed/ops.hpp"

namespace maed::attention {

namespace {

struct TopologyName {
    BlockTopology topology;
    std::string_view name;
};

constexpr TopologyName kTopologyNames[] = {
    {BlockTopology::kParallelV1, "parallel-v1"}, {BlockTopology::kParallelV2, "parallel-v2"},
    {BlockTopology::kSeries, "series"},          {BlockTopology::kCoupling, "coupling"},
    {BlockTopology::kSpatialOnly, "spatial-only"}, {BlockTopology::kTemporalOnly, "temporal-only"},
};

bool uses_spatial(BlockTopology t) {
    return t == BlockTopology::kParallelV1 || t == BlockTopology::kParallelV2 || t == BlockTopology::kSeries ||
           t == BlockTopology::kSpatialOnly;
}

bool uses_temporal(BlockTopology t) {
    return t == BlockTopology::kParallelV1 || t == BlockTopology::kParallelV2 || t == BlockTopology::kSeries ||
           t == BlockTopology::kTemporalOnly;
}

// Standard multi-head attention over (S, L, d) sequences; maps are (S, H, L, L).
MsaOutput attend(const MsaLayer& layer, const Tensor& x) {
    const std::size_t seqs = x.shape()[0];
    const std::size_t len = x.shape()[1];
    const std::size_t width = x.shape()[2];
    const std::size_t heads = layer.heads;
    const std::size_t head_width = width / heads;

    const Tensor q = transpose(reshape(layer.query(x), {seqs, len, heads, head_width}), {0, 2, 1, 3});
    const Tensor k_t = transpose(reshape(layer.key(x), {seqs, len, heads, head_width}), {0, 2, 3, 1});
    const Tensor v = transpose(reshape(layer.value(x), {seqs, len, heads, head_width}), {0, 2, 1, 3});

    const Tensor scores = scale(matmul(q, k_t), 1.0 / std::sqrt(static_cast<double>(head_width)));
    const Tensor weights = softmax(scores, -1);
    const Tensor context = reshape(transpose(matmul(weights, v), {0, 2, 1, 3}), {seqs, len, width});
    return {layer.output(context), weights};
}

Tensor lift(const Tensor& x) {
    if (x.rank() == 3) return reshape(x, {1, x.shape()[0], x.shape()[1], x.shape()[2]});
    if (x.rank() == 4) return x;
    throw ShapeError("expected (T, N, d) or (B, T, N, d) tokens, got " + maed::to_string(x.shape()));
}

Tensor drop_batch(const Tensor& t) {
    Shape s(t.shape().begin() + 1, t.shape().end());
    return reshape(t, std::move(s));
}

std::optional<Tensor> drop_batch(const std::optional<Tensor>& t) {
    if (!t) return std::nullopt;
    return drop_batch(*t);
}

MsaOutput msa4(const MsaLayer& layer, const Tensor& x, MsaMode mode) {
    const std::size_t b = x.shape()[0];
    const std::size_t t = x.shape()[1];
    const std::size_t n = x.shape()[2];
    const std::size_t d = x.shape()[3];
    const std::size_t h = layer.heads;
    switch (mode) {
        case MsaMode::kSpatial: {
            MsaOutput o = attend(layer, reshape(x, {b * t, n, d}));
            return {reshape(o.y, {b, t, n, d}), reshape(o.maps, {b, t, h, n, n})};
        }
        case MsaMode::kTemporal: {
            const Tensor by_patch = reshape(transpose(x, {0, 2, 1, 3}), {b * n, t, d});
            MsaOutput o = attend(layer, by_patch);
            const Tensor y = transpose(reshape(o.y, {b, n, t, d}), {0, 2, 1, 3});
            return {y, reshape(o.maps, {b, n, h, t, t})};
        }
        case MsaMode::kCoupled: {
            MsaOutput o = attend(layer, reshape(x, {b, t * n, d}));
            return {reshape(o.y, {b, t, n, d}), o.maps};
        }
    }
    throw std::logic_error("unknown attention mode");
}

void require_layer(const std::optional<MsaLayer>& layer, const char* what, BlockTopology topology) {
    if (!layer) {
        throw ConfigError(std::string(to_string(topology)) + " block is missing its " + what + " layer");
    }
}

}  // namespace

std::string_view to_string(BlockTopology topology) {
    for (const auto& e : kTopologyNames)
        if (e.topology == topology) return e.name;
    return "unknown";
}

BlockTopology parse_topology(std::string_view name) {
    for (const auto& e : kTopologyNames)
        if (e.name == name) return e.topology;
    throw ConfigError("unknown encoder topology '" + std::string(name) + "'");
}

const std::vector<BlockTopology>& all_topologies() {
    static const std::vector<BlockTopology> all = {
        BlockTopology::kSpatialOnly, BlockTopology::kTemporalOnly, BlockTopology::kSeries,
        BlockTopology::kParallelV1,  BlockTopology::kParallelV2,   BlockTopology::kCoupling,
    };
    return all;
}

MsaLayer MsaLayer::make(std::size_t width, std::size_t heads, Rng& rng) {
    if (heads == 0 || width % heads != 0) {
        throw ConfigError("attention width " + std::to_string(width) + " is not divisible by " +
                          std::to_string(heads) + " heads");
    }
    MsaLayer layer;
    layer.heads = heads;
    layer.query = nn::Linear::xavier(width, width, rng);
    layer.key = nn::Linear::xavier(width, width, rng);
    layer.value = nn::Linear::xavier(width, width, rng);
    layer.output = nn::Linear::xavier(width, width, rng);
    return layer;
}

void MsaLayer::collect(const std::string& prefix, nn::ParamList& out) const {
    query.collect(prefix + ".query", out);
    key.collect(prefix + ".key", out);
    value.collect(prefix + ".value", out);
    output.collect(prefix + ".output", out);
}

MsaOutput msa(const MsaLayer& layer, const Tensor& x, MsaMode mode) {
    const std::size_t width = x.shape().back();
    if (layer.heads == 0 || width % layer.heads != 0) {
        throw ConfigError("token width " + std::to_string(width) + " is not divisible by " +
                          std::to_string(layer.heads) + " heads");
    }
    if (layer.width() != width) throw ShapeError("msa: layer width does not match token width");
    if (x.rank() == 4) return msa4(layer, x, mode);
    MsaOutput o = msa4(layer, lift(x), mode);
    return {drop_batch(o.y), drop_batch(o.maps)};
}

SteBlock SteBlock::make(BlockTopology topology, std::size_t width, std::size_t heads, std::size_t mlp_hidden,
                        Rng& rng) {
    SteBlock b;
    b.topology = topology;
    b.norm_attn = nn::LayerNorm::make(width);
    if (uses_spatial(topology)) b.msa_s = MsaLayer::make(width, heads, rng);
    if (uses_temporal(topology)) b.msa_t = MsaLayer::make(width, heads, rng);
    if (topology == BlockTopology::kCoupling) b.msa_c = MsaLayer::make(width, heads, rng);
    if (topology == BlockTopology::kSeries) b.norm_temporal = nn::LayerNorm::make(width);
    if (topology == BlockTopology::kParallelV2) b.gate = nn::Linear::xavier(width, width, rng);
    b.norm_mlp = nn::LayerNorm::make(width);
    b.mlp = nn::Mlp::make(width, mlp_hidden, rng);
    return b;
}

void SteBlock::collect(const std::string& prefix, nn::ParamList& out) const {
    norm_attn.collect(prefix + ".norm_attn", out);
    if (msa_s) msa_s->collect(prefix + ".msa_s", out);
    if (norm_temporal) norm_temporal->collect(prefix + ".norm_temporal", out);
    if (msa_t) msa_t->collect(prefix + ".msa_t", out);
    if (msa_c) msa_c->collect(prefix + ".msa_c", out);
    if (gate) gate->collect(prefix + ".gate", out);
    norm_mlp.collect(prefix + ".norm_mlp", out);
    mlp.collect(prefix + ".mlp", out);
}

BlockOutput ste_block(const SteBlock& block, const Tensor& x_in) {
    const Tensor x = lift(x_in);
    const std::size_t frames = x.shape()[1];
    const std::size_t tokens = x.shape()[2];
    const bool bypass = block.temporal_bypass && frames == 1;
    const BlockTopology topo = block.topology;

    BlockOutput out;
    Tensor u;
    switch (topo) {
        case BlockTopology::kSpatialOnly: {
            require_layer(block.msa_s, "MSA-S", topo);
            MsaOutput s = msa4(*block.msa_s, block.norm_attn(x), MsaMode::kSpatial);
            out.maps.spatial = s.maps;
            u = add(x, s.y);
            break;
        }
        case BlockTopology::kTemporalOnly: {
            require_layer(block.msa_t, "MSA-T", topo);
            if (bypass) {
                u = x;
            } else {
                MsaOutput t = msa4(*block.msa_t, block.norm_attn(x), MsaMode::kTemporal);
                out.maps.temporal = t.maps;
                u = add(x, t.y);
            }
            break;
        }
        case BlockTopology::kCoupling: {
            require_layer(block.msa_c, "MSA-C", topo);
            MsaOutput c = msa4(*block.msa_c, block.norm_attn(x), MsaMode::kCoupled);
            out.maps.coupled = c.maps;
            u = add(x, c.y);
            break;
        }
        case BlockTopology::kSeries: {
            require_layer(block.msa_s, "MSA-S", topo);
            require_layer(block.msa_t, "MSA-T", topo);
            if (!block.norm_temporal) throw ConfigError("series block is missing its temporal norm");
            MsaOutput s = msa4(*block.msa_s, block.norm_attn(x), MsaMode::kSpatial);
            out.maps.spatial = s.maps;
            u = add(x, s.y);
            if (!bypass) {
                MsaOutput t = msa4(*block.msa_t, (*block.norm_temporal)(u), MsaMode::kTemporal);
                out.maps.temporal = t.maps;
                u = add(u, t.y);
            }
            break;
        }
        case BlockTopology::kParallelV1:
        case BlockTopology::kParallelV2: {
            require_layer(block.msa_s, "MSA-S", topo);
            require_layer(block.msa_t, "MSA-T", topo);
            const Tensor h = block.norm_attn(x);
            MsaOutput s = msa4(*block.msa_s, h, MsaMode::kSpatial);
            out.maps.spatial = s.maps;
            if (bypass) {
                u = add(x, s.y);
                break;
            }
            MsaOutput t = msa4(*block.msa_t, h, MsaMode::kTemporal);
            out.maps.temporal = t.maps;
            Tensor mix;
            if (topo == BlockTopology::kParallelV1) {
                mix = scale(add(s.y, t.y), 0.5);
            } else if (block.forced_temporal_weight) {
                const double wt = *block.forced_temporal_weight;
                mix = add(scale(s.y, 1.0 - wt), scale(t.y, wt));
            } else {
                if (!block.gate) throw ConfigError("parallel-v2 block is missing its gate");
                const Tensor logits = (*block.gate)(concat({slice(s.y, 2, 0, 1), slice(t.y, 2, 0, 1)}, 2));
                const Tensor alpha_s = slice(softmax(logits, 2), 2, 0, 1);
                // 1 - a (rather than the second softmax row) makes the two weights sum to exactly 1.
                const Tensor alpha_t = add_scalar(scale(alpha_s, -1.0), 1.0);
                out.alpha_spatial = alpha_s;
                out.alpha_temporal = alpha_t;
                mix = add(mul(repeat(alpha_s, 2, tokens), s.y), mul(repeat(alpha_t, 2, tokens), t.y));
            }
            u = add(x, mix);
            break;
        }
    }
    out.y = add(u, block.mlp(block.norm_mlp(u)));

    if (x_in.rank() == 3) {
        out.y = drop_batch(out.y);
        out.maps.spatial = drop_batch(out.maps.spatial);
        out.maps.temporal = drop_batch(out.maps.temporal);
        out.maps.coupled = drop_batch(out.maps.coupled);
        out.alpha_spatial = drop_batch(out.alpha_spatial);
        out.alpha_temporal = drop_batch(out.alpha_temporal);
    }
    return out;
}

void SteConfig::validate() const {
    if (blocks == 0 || width == 0 || heads == 0 || patches == 0 || max_frames == 0 || mlp_ratio == 0) {
        throw ConfigError("encoder extents must be positive");
    }
    if (width % heads != 0) {
        throw ConfigError("encoder width " + std::to_string(width) + " is not divisible by " + std::to_string(heads) +
                          " heads");
    }
}

SteEncoder SteEncoder::make(const SteConfig& config, Rng& rng) {
    config.validate();
    SteEncoder e;
    e.config = config;
    e.class_token = nn::normal_parameter({1, 1, config.width}, 0.02, rng);
    e.spatial_pos = nn::normal_parameter({1, config.tokens(), config.width}, 0.02, rng);
    e.temporal_pos = nn::normal_parameter({config.max_frames, 1, config.width}, 0.02, rng);
    for (std::size_t i = 0; i < config.blocks; ++i)
        e.blocks.push_back(
            SteBlock::make(config.topology, config.width, config.heads, config.width * config.mlp_ratio, rng));
    return e;
}

void SteEncoder::collect(const std::string& prefix, nn::ParamList& out) const {
    out.push_back({prefix + ".class_token", class_token});
    out.push_back({prefix + ".spatial_pos", spatial_pos});
    out.push_back({prefix + ".temporal_pos", temporal_pos});
    for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i].collect(prefix + ".block" + std::to_string(i), out);
}

EncodeOutput encode(const SteEncoder& encoder, const nn::Linear& patch_embed, const Tensor& obs_in) {
    Tensor obs = obs_in;
    const bool single = obs_in.rank() == 3;
    if (single) obs = reshape(obs_in, {1, obs_in.shape()[0], obs_in.shape()[1], obs_in.shape()[2]});
    if (obs.rank() != 4) throw ShapeError("encode: observations must be (T, hw, d_in) or (B, T, hw, d_in)");
    const std::size_t b = obs.shape()[0];
    const std::size_t t = obs.shape()[1];
    const std::size_t hw = obs.shape()[2];
    const std::size_t d = encoder.config.width;
    if (t > encoder.config.max_frames) {
        throw ShapeError("encode: clip of " + std::to_string(t) + " frames exceeds the maximum of " +
                         std::to_string(encoder.config.max_frames));
    }
    if (hw != encoder.config.patches) {
        throw ShapeError("encode: expected " + std::to_string(encoder.config.patches) + " patches, got " +
                         std::to_string(hw));
    }
    if (patch_embed.out_features() != d) throw ShapeError("encode: patch embedding width mismatch");
    const std::size_t n = hw + 1;

    const Tensor patches = patch_embed(obs);  // (B, T, hw, d)
    const Tensor cls = repeat(repeat(reshape(encoder.class_token, {1, 1, 1, d}), 0, b), 1, t);
    Tensor x = concat({cls, patches}, 2);
    x = add(x, reshape(encoder.spatial_pos, {n, d}));
    x = add(x, repeat(slice(encoder.temporal_pos, 0, 0, t), 1, n));

    EncodeOutput out;
    for (const auto& block : encoder.blocks) {
        BlockOutput bo = ste_block(block, x);
        x = bo.y;
        out.maps.push_back(std::move(bo.maps));
    }
    out.features = reshape(slice(x, 2, 0, 1), {b, t, d});
    if (single) {
        out.features = reshape(out.features, {t, d});
        for (auto& m : out.maps) {
            m.spatial = drop_batch(m.spatial);
            m.temporal = drop_batch(m.temporal);
            m.coupled = drop_batch(m.coupled);
        }
    }
    return out;
}

}  // namespace maed::attention
