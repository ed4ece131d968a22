// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "maed/tensor.hpp"

namespace maed {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig config;
    std::uint64_t step = 0;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;
};

/// One bias-corrected Adam update on raw buffers. `step` is the 1-based
/// index of this update.
void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m, std::span<double> v,
                 std::uint64_t step, const AdamConfig& config);

/// Updates every parameter from its accumulated gradient (a parameter
/// without a gradient is treated as having a zero gradient). Moment buffers
/// are created on the first call and must keep matching parameter sizes.
void adam_step(std::span<Tensor> params, AdamState& state);

}  // namespace maed
