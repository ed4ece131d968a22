// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "maed/config.hpp"
#include "maed/evaluate.hpp"

namespace maed {

struct Variant {
    attention::BlockTopology encoder;
    DecoderKind decoder;
    TreeKind tree;

    /// e.g. "parallel-v2/ktd_random"
    std::string label() const;
    RunConfig apply(const RunConfig& base) const;
    bool operator==(const Variant&) const = default;
};

/// Every encoder with the iterative decoder, then parallel-v2 with KTD over
/// the SMPL, random and reversed trees.
std::vector<Variant> default_variants();

struct AblationRow {
    Variant variant;
    double final_loss = 0.0;
    EvalReport eval;
};

/// Trains and evaluates each distinct variant with the base seed and step
/// budget. Duplicate variants are run once.
std::vector<AblationRow> ablate(const RunConfig& base, const std::vector<Variant>& variants,
                                const std::function<void(const AblationRow&)>& on_row = {});

/// Columns: encoder,decoder,final_loss,mpjpe,pa_mpjpe,accel. The first line is a
/// comment marking the numbers as synthetic desk-scale results.
void write_ablation_csv(const std::filesystem::path& path, const std::vector<AblationRow>& rows);

}  // namespace maed
