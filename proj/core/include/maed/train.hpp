// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <stdexcept>
#include <vector>

#include "maed/adam.hpp"
#include "maed/config.hpp"
#include "maed/losses.hpp"
#include "maed/model.hpp"
#include "maed/synth.hpp"

namespace maed {

class TrainingError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct LossLogEntry {
    std::size_t step = 0;  // 1-based
    int stage = 1;         // 1 = images only, 2 = images and videos
    bool video = false;
    double lr = 0.0;
    double total = 0.0;
    double l3d = 0.0;
    double l2d = 0.0;
    double smpl = 0.0;
    double norm = 0.0;
};

struct TrainResult {
    Model model;
    std::vector<LossLogEntry> log;  // every step
};

/// lr at 1-based `step`: ×0.1 from 60% and ×0.01 from 90% of the total steps.
double scheduled_lr(const RunConfig& cfg, std::size_t step);

/// Forward pass plus loss for one batch.
losses::LossReport batch_loss(const Model& model, const synth::ClipBatch& batch);

/// Stage 1 (image_steps) draws single frames; stage 2 (video_steps)
/// alternates image and clip batches with the given video fraction.
/// Throws TrainingError naming the offending term on a non-finite loss.
TrainResult train(const RunConfig& cfg, const std::vector<synth::Clip>& clips,
                  const std::function<void(const LossLogEntry&)>& on_log = {});

/// Synthesizes cfg.train_clips clips from cfg.seed and trains on them.
TrainResult train(const RunConfig& cfg, const std::function<void(const LossLogEntry&)>& on_log = {});

std::vector<synth::Clip> training_clips(const RunConfig& cfg);
/// Held-out clips from a seed stream disjoint from the training one.
std::vector<synth::Clip> evaluation_clips(const RunConfig& cfg);

void write_loss_log(const std::filesystem::path& path, const std::vector<LossLogEntry>& log);

}  // namespace maed
