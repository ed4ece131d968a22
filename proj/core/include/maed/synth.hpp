// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "maed/config.hpp"
#include "maed/decoders.hpp"
#include "maed/kinematics.hpp"
#include "maed/losses.hpp"
#include "maed/tensor.hpp"

/// Synthetic motion clips: smooth random joint rotations rendered as
/// per-joint Gaussian heatmaps on a coarse grid.
namespace maed::synth {

struct SynthConfig {
    std::size_t grid_h = 4;
    std::size_t grid_w = 4;
    std::size_t clip_length = 8;
    std::size_t stride = 4;
    std::size_t clips_per_video = 4;
    double noise_std = 0.01;
    double amplitude = 0.6;  // bound on each rotation component, radians
    double beta_std = 0.5;
    double camera_scale = 0.8;
    double camera_jitter = 0.02;
    double sigma_cells = 0.6;

    static SynthConfig from(const RunConfig& cfg);
};

/// One clip, all tensors without gradient history.
struct Clip {
    std::size_t id = 0;
    Tensor obs;       // (T, hw, 24)
    Tensor pose6d;    // (T, 24, 6)
    Tensor pose_aa;   // (T, 72)
    Tensor beta;      // (T, 10), constant within a video
    Tensor camera;    // (T, 3), constant within a video
    Tensor joints3d;  // (T, 24, 3)
    Tensor joints2d;  // (T, 24, 2)
    bool has_3d = true;

    std::size_t frames() const { return obs.shape()[0]; }
};

/// Draws ceil(count / clips_per_video) videos and cuts each into
/// overlapping windows of clip_length frames at the configured stride.
/// Ground-truth joints come from smpl_forward on the sampled parameters and
/// are cross-checked against the plain forward kinematics.
std::vector<Clip> synth_generate(std::uint64_t seed, std::size_t count, const SynthConfig& cfg);

/// Splits clips into single-frame (image) samples.
std::vector<Clip> frames_as_images(const std::vector<Clip>& clips);

/// Heatmaps for one frame: joints2d (24, 2) -> (h·w, 24), no noise.
/// Cell (r, c) is centred at x = -1 + (2c+1)/w, y = 1 - (2r+1)/h.
std::vector<double> rasterize(std::span<const double> joints2d, std::size_t grid_h, std::size_t grid_w,
                              double sigma_cells);

/// B clips of equal length stacked for one forward pass. Frame-level
/// targets are flattened to F = B·T rows.
struct ClipBatch {
    std::size_t batch = 0;
    std::size_t frames = 0;  // T
    Tensor obs;              // (B, T, hw, 24)
    decoders::SmplParams params;
    losses::Target target;
};

ClipBatch make_batch(const std::vector<const Clip*>& clips);

}  // namespace maed::synth
