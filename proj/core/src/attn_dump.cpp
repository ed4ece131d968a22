// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "maed/attn_dump.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "maed/ops.hpp"

namespace maed {

void write_pgm(const std::filesystem::path& path, std::size_t width, std::size_t height,
               const std::vector<unsigned char>& pixels) {
    if (pixels.size() != width * height) throw std::invalid_argument("write_pgm: pixel count mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "P5\n" << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

namespace {

// maps: (..., H, L, L); everything before H is the group axis.
void dump_branch(const Tensor& maps, std::size_t block, const std::string& branch, const std::filesystem::path& dir,
                 std::vector<std::filesystem::path>& written) {
    const Shape& s = maps.shape();
    const std::size_t len = s.back();
    const std::size_t heads = s[s.size() - 3];
    const std::size_t groups = maps.numel() / (heads * len * len);
    const auto w = maps.data();
    const std::string stem = "block" + std::to_string(block) + "_" + branch;

    const auto csv_path = dir / (stem + ".csv");
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
    csv << "block,branch,group,head,query";
    for (std::size_t k = 0; k < len; ++k) csv << ",w" << k;
    csv << "\n";

    std::vector<unsigned char> pixels(groups * len * heads * len);
    const std::size_t image_w = heads * len;
    char buf[32];
    for (std::size_t g = 0; g < groups; ++g) {
        for (std::size_t h = 0; h < heads; ++h) {
            for (std::size_t q = 0; q < len; ++q) {
                const double* row = w.data() + ((g * heads + h) * len + q) * len;
                csv << block << "," << branch << "," << g << "," << h << "," << q;
                for (std::size_t k = 0; k < len; ++k) {
                    std::snprintf(buf, sizeof buf, ",%.9g", row[k]);
                    csv << buf;
                    const double v = std::clamp(row[k], 0.0, 1.0);
                    pixels[(g * len + q) * image_w + h * len + k] = static_cast<unsigned char>(std::lround(255.0 * v));
                }
                csv << "\n";
            }
        }
    }
    written.push_back(csv_path);
    const auto pgm_path = dir / (stem + ".pgm");
    write_pgm(pgm_path, image_w, groups * len, pixels);
    written.push_back(pgm_path);
}

}  // namespace

std::vector<std::filesystem::path> attn_dump(const Model& model, const synth::Clip& clip,
                                             const std::filesystem::path& out_dir) {
    NoGradGuard no_grad;
    std::filesystem::create_directories(out_dir);
    Shape s = clip.obs.shape();
    s.insert(s.begin(), 1);
    const ModelOutput out = model.forward(reshape(clip.obs, s));
    std::vector<std::filesystem::path> written;
    for (std::size_t b = 0; b < out.maps.size(); ++b) {
        const auto& m = out.maps[b];
        if (m.spatial) dump_branch(*m.spatial, b, "spatial", out_dir, written);
        if (m.temporal) dump_branch(*m.temporal, b, "temporal", out_dir, written);
        if (m.coupled) dump_branch(*m.coupled, b, "coupled", out_dir, written);
    }
    return written;
}

}  // namespace maed
