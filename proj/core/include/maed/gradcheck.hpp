// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "maed/config.hpp"
#include "maed/nn.hpp"
#include "maed/tensor.hpp"

namespace maed {

struct GradCheckOptions {
    double step = 1e-6;
    /// Fraction of all input coordinates to probe, chosen uniformly without
    /// replacement (at least one).
    double fraction = 1.0;
    std::uint64_t seed = 0;
};

struct GradCheckResult {
    std::size_t checked = 0;
    /// |analytic - numeric| / max(|analytic|, |numeric|) over the probed
    /// coordinates as one vector; 0 when both vanish.
    double relative_error = 0.0;
    double max_abs_error = 0.0;
    std::string worst;  // name[index] of the largest absolute mismatch
};

/// Compares reverse-mode gradients of the scalar `loss` with central
/// differences (f(x+h) - f(x-h)) / 2h on the given leaves.
GradCheckResult check_gradients(const std::function<Tensor()>& loss, const nn::ParamList& inputs,
                                const GradCheckOptions& options = {});

/// Small model (d = 16, H = 2, T = 2, 2×2 grid) with random heads; checks
/// the total training loss against a sampled fraction of all parameters.
RunConfig gradcheck_config(DecoderKind decoder = DecoderKind::kKtd);
GradCheckResult end_to_end_gradcheck(const RunConfig& cfg, const GradCheckOptions& options);

}  // namespace maed
