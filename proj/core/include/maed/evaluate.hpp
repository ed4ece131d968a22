// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <vector>

#include "maed/model.hpp"
#include "maed/synth.hpp"

namespace maed {

struct ClipMetrics {
    std::size_t clip_id = 0;
    double mpjpe = 0.0;
    double pa_mpjpe = 0.0;
    double accel = 0.0;  // NaN for clips shorter than 3 frames
};

struct EvalReport {
    std::vector<ClipMetrics> rows;
    ClipMetrics mean;  // clip_id unused
};

struct EvalOptions {
    /// Replace decoder output with each clip's ground-truth parameters.
    bool oracle = false;
    std::size_t threads = 1;
};

/// encode -> decode -> smpl_forward on every clip, no gradient tracking.
EvalReport evaluate(const Model& model, const std::vector<synth::Clip>& clips, const EvalOptions& options = {});

/// Header clip_id,mpjpe,pa_mpjpe,accel; one row per clip, then a "mean" row.
void write_metrics_csv(const std::filesystem::path& path, const EvalReport& report);

}  // namespace maed
