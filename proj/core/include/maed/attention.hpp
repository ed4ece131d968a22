// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "maed/nn.hpp"
#include "maed/random.hpp"
#include "maed/tensor.hpp"

/// Spatial-temporal self-attention over a clip of patch tokens.
///
/// Token tensors are (T, N, d) for one clip or (B, T, N, d) for a batch.
/// The three attention modes differ only in how tokens are grouped before a
/// standard multi-head scaled dot-product attention:
///   spatial  - over the N patches of each frame     maps (T, H, N, N)
///   temporal - over the T frames at each patch slot maps (N, H, T, T)
///   coupled  - over all T·N tokens of the clip      maps (H, TN, TN)
/// Batched inputs prepend B to every map shape.
namespace maed::attention {

enum class MsaMode { kSpatial, kTemporal, kCoupled };

enum class BlockTopology { kParallelV1, kParallelV2, kSeries, kCoupling, kSpatialOnly, kTemporalOnly };

std::string_view to_string(BlockTopology topology);
BlockTopology parse_topology(std::string_view name);
const std::vector<BlockTopology>& all_topologies();

class ConfigError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

struct MsaLayer {
    std::size_t heads = 1;
    nn::Linear query;
    nn::Linear key;
    nn::Linear value;
    nn::Linear output;

    static MsaLayer make(std::size_t width, std::size_t heads, Rng& rng);
    std::size_t width() const { return query.in_features(); }
    void collect(const std::string& prefix, nn::ParamList& out) const;
};

struct MsaOutput {
    Tensor y;
    Tensor maps;
};

MsaOutput msa(const MsaLayer& layer, const Tensor& x, MsaMode mode);

struct BlockMaps {
    std::optional<Tensor> spatial;
    std::optional<Tensor> temporal;
    std::optional<Tensor> coupled;
};

/// Pre-norm residual block: u = x + Mix(MSA(norm(x))), y = u + MLP(norm(u)).
struct SteBlock {
    BlockTopology topology = BlockTopology::kParallelV2;
    nn::LayerNorm norm_attn;
    std::optional<nn::LayerNorm> norm_temporal;  // series only: norm before the MSA-T stage
    nn::LayerNorm norm_mlp;
    std::optional<MsaLayer> msa_s;
    std::optional<MsaLayer> msa_t;
    std::optional<MsaLayer> msa_c;
    std::optional<nn::Linear> gate;  // parallel-v2: shared map from branch class token to d logits
    nn::Mlp mlp;

    /// Single-frame inputs skip MSA-T entirely.
    bool temporal_bypass = true;
    /// Test hook for parallel-v2: fixes alpha_T (and alpha_S = 1 - alpha_T).
    std::optional<double> forced_temporal_weight;

    static SteBlock make(BlockTopology topology, std::size_t width, std::size_t heads, std::size_t mlp_hidden,
                         Rng& rng);
    void collect(const std::string& prefix, nn::ParamList& out) const;
};

struct BlockOutput {
    Tensor y;
    BlockMaps maps;
    std::optional<Tensor> alpha_spatial;  // parallel-v2: (…, T, 1, d)
    std::optional<Tensor> alpha_temporal;
};

BlockOutput ste_block(const SteBlock& block, const Tensor& x);

struct SteConfig {
    BlockTopology topology = BlockTopology::kParallelV2;
    std::size_t blocks = 2;
    std::size_t width = 64;
    std::size_t heads = 4;
    std::size_t patches = 16;  // h·w
    std::size_t max_frames = 8;
    std::size_t mlp_ratio = 4;

    std::size_t tokens() const { return patches + 1; }
    void validate() const;
};

struct SteEncoder {
    SteConfig config;
    Tensor class_token;    // (1, 1, d)
    Tensor spatial_pos;    // (1, N, d)
    Tensor temporal_pos;   // (T_max, 1, d)
    std::vector<SteBlock> blocks;

    static SteEncoder make(const SteConfig& config, Rng& rng);
    void collect(const std::string& prefix, nn::ParamList& out) const;
};

struct EncodeOutput {
    Tensor features;  // (T, d) or (B, T, d)
    std::vector<BlockMaps> maps;
};

/// Embeds patches, prepends the class token to every frame, adds both
/// positional encodings once, runs all blocks and returns each frame's
/// class-token row. `obs` is (T, hw, d_in) or (B, T, hw, d_in).
EncodeOutput encode(const SteEncoder& encoder, const nn::Linear& patch_embed, const Tensor& obs);

}  // namespace maed::attention
