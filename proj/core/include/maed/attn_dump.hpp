// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "maed/model.hpp"
#include "maed/synth.hpp"

namespace maed {

/// Runs one clip through the encoder and writes, for every block and branch,
///   block<b>_<branch>.csv  one row per attention row:
///                          block,branch,group,head,query,w0,...,w(L-1)
///   block<b>_<branch>.pgm  8-bit image, groups stacked vertically and heads
///                          side by side, weights scaled linearly to 0-255
/// `group` is the frame (spatial), patch slot (temporal) or 0 (coupled).
/// Returns the written paths.
std::vector<std::filesystem::path> attn_dump(const Model& model, const synth::Clip& clip,
                                             const std::filesystem::path& out_dir);

/// Binary PGM (P5) of a row-major grayscale image.
void write_pgm(const std::filesystem::path& path, std::size_t width, std::size_t height,
               const std::vector<unsigned char>& pixels);

}  // namespace maed
