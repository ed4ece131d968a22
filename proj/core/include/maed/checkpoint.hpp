// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "maed/config.hpp"
#include "maed/nn.hpp"

/// Binary parameter files.
///
///   "MAEDCKPT" | version u32 | count u32
///   per entry: name_len u16 | name | dtype u8 (0 f32, 1 f64) | rank u8 |
///              extents u32 × rank | values (little-endian)
namespace maed::checkpoint {

inline constexpr std::uint32_t kVersion = 1;

class CheckpointError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

void save(const std::filesystem::path& path, const nn::ParamList& params, CheckpointDtype dtype);

/// Entries in file order, as plain (non-trainable) tensors.
nn::ParamList read(const std::filesystem::path& path);

/// Copies values into `params` in place. Any missing, extra or mis-shaped
/// entry aborts with a CheckpointError listing every difference; `params`
/// is left untouched in that case.
void load_into(const std::filesystem::path& path, const nn::ParamList& params);

}  // namespace maed::checkpoint
