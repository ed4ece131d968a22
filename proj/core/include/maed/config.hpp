// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "maed/adam.hpp"
#include "maed/attention.hpp"
#include "maed/losses.hpp"

namespace maed {

using attention::ConfigError;

enum class DecoderKind { kKtd, kIterative };
enum class TreeKind { kSmpl, kRandom, kReverse };
enum class CheckpointDtype { kF32, kF64 };

std::string_view to_string(DecoderKind kind);
std::string_view to_string(TreeKind kind);
DecoderKind parse_decoder(std::string_view name);
TreeKind parse_tree(std::string_view name);

/// Everything needed to reproduce a run. Serialized as flat `key = value`
/// lines; `#` starts a comment and unknown keys are rejected.
struct RunConfig {
    // encoder
    attention::BlockTopology encoder = attention::BlockTopology::kParallelV2;
    std::size_t blocks = 2;
    std::size_t width = 64;
    std::size_t heads = 4;
    std::size_t mlp_ratio = 4;
    // decoder
    DecoderKind decoder = DecoderKind::kKtd;
    TreeKind tree = TreeKind::kSmpl;
    std::uint64_t tree_seed = 7;
    std::size_t iterations = 3;
    // data
    std::size_t grid_h = 4;
    std::size_t grid_w = 4;
    std::size_t d_in = 24;
    std::size_t clip_length = 8;
    std::size_t stride = 4;
    std::size_t clips_per_video = 4;
    std::size_t train_clips = 64;
    std::size_t eval_clips = 16;
    double noise_std = 0.01;
    double amplitude = 0.6;
    double beta_std = 0.5;
    // optimization
    AdamConfig adam;
    std::size_t image_steps = 200;
    std::size_t video_steps = 800;
    double video_fraction = 0.5;
    std::size_t batch_clips = 4;
    std::size_t image_batch = 16;
    std::size_t log_interval = 10;
    losses::LossWeights loss;
    // misc
    std::uint64_t seed = 0;
    CheckpointDtype checkpoint_dtype = CheckpointDtype::kF64;
    std::size_t threads = 1;

    std::size_t patches() const { return grid_h * grid_w; }
    std::size_t total_steps() const { return image_steps + video_steps; }

    /// Throws ConfigError on inconsistent values.
    void validate() const;

    /// Applies one `key = value` assignment.
    void set(std::string_view key, std::string_view value);
    static RunConfig parse(std::string_view text);
    static RunConfig load(const std::filesystem::path& path);
    std::string serialize() const;
    void save(const std::filesystem::path& path) const;
};

/// Desk-scale overfit setup: 8 clips, 2 parallel-v2 blocks, d = 64, H = 4, T = 8.
RunConfig overfit_config();

}  // namespace maed
