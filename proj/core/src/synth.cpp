// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "maed/synth.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "maed/geometry.hpp"
#include "maed/ops.hpp"
#include "maed/random.hpp"

namespace maed::synth {

using kinematics::kJointCount;
using kinematics::kShapeDims;

SynthConfig SynthConfig::from(const RunConfig& cfg) {
    SynthConfig s;
    s.grid_h = cfg.grid_h;
    s.grid_w = cfg.grid_w;
    s.clip_length = cfg.clip_length;
    s.stride = cfg.stride;
    s.clips_per_video = cfg.clips_per_video;
    s.noise_std = cfg.noise_std;
    s.amplitude = cfg.amplitude;
    s.beta_std = cfg.beta_std;
    return s;
}

std::vector<double> rasterize(std::span<const double> joints2d, std::size_t grid_h, std::size_t grid_w,
                              double sigma_cells) {
    const std::size_t joints = joints2d.size() / 2;
    const double cell_w = 2.0 / static_cast<double>(grid_w);
    const double cell_h = 2.0 / static_cast<double>(grid_h);
    const double sx = sigma_cells * cell_w;
    const double sy = sigma_cells * cell_h;
    std::vector<double> out(grid_h * grid_w * joints);
    for (std::size_t r = 0; r < grid_h; ++r) {
        const double yc = 1.0 - (2.0 * static_cast<double>(r) + 1.0) / static_cast<double>(grid_h);
        for (std::size_t c = 0; c < grid_w; ++c) {
            const double xc = -1.0 + (2.0 * static_cast<double>(c) + 1.0) / static_cast<double>(grid_w);
            double* cell = out.data() + (r * grid_w + c) * joints;
            for (std::size_t j = 0; j < joints; ++j) {
                const double dx = (joints2d[2 * j] - xc) / sx;
                const double dy = (joints2d[2 * j + 1] - yc) / sy;
                cell[j] = std::exp(-0.5 * (dx * dx + dy * dy));
            }
        }
    }
    return out;
}

namespace {

struct Video {
    Tensor obs, pose6d, pose_aa, beta, camera, joints3d, joints2d;
};

Video render_video(Rng& rng, std::size_t length, const SynthConfig& cfg, const kinematics::KinematicTree& body) {
    const std::size_t dofs = kJointCount * 3;
    std::vector<double> aa(length * dofs, 0.0);
    for (std::size_t d = 0; d < dofs; ++d) {
        const std::size_t waves = 1 + static_cast<std::size_t>(rng.below(3));
        const double total = cfg.amplitude * rng.uniform();
        std::vector<double> weight(waves), omega(waves), phase(waves);
        double weight_sum = 0.0;
        for (std::size_t i = 0; i < waves; ++i) {
            weight[i] = 0.1 + rng.uniform();
            weight_sum += weight[i];
            omega[i] = rng.uniform(0.05, 0.5);
            phase[i] = rng.uniform(0.0, 2.0 * std::numbers::pi);
        }
        for (std::size_t t = 0; t < length; ++t) {
            double v = 0.0;
            for (std::size_t i = 0; i < waves; ++i)
                v += total * weight[i] / weight_sum * std::sin(omega[i] * static_cast<double>(t) + phase[i]);
            aa[t * dofs + d] = v;
        }
    }
    std::vector<double> beta(kShapeDims);
    for (double& b : beta) b = rng.normal(0.0, cfg.beta_std);
    const double cam[3] = {cfg.camera_scale + rng.uniform(-cfg.camera_jitter, cfg.camera_jitter),
                           rng.uniform(-cfg.camera_jitter, cfg.camera_jitter),
                           rng.uniform(-cfg.camera_jitter, cfg.camera_jitter)};

    std::vector<double> pose6d(length * kJointCount * 6);
    std::vector<geometry::Mat3> rotations(length * kJointCount);
    for (std::size_t i = 0; i < length * kJointCount; ++i) {
        geometry::AxisAngle a;
        a.v = geometry::Vec3(aa[3 * i], aa[3 * i + 1], aa[3 * i + 2]);
        const geometry::Rot6D r6 = geometry::matrix_to_rot6d(geometry::axis_angle_to_matrix(a));
        for (std::size_t c = 0; c < 6; ++c) pose6d[6 * i + c] = r6.r[c];
        rotations[i] = geometry::rot6d_to_matrix(r6);
    }
    std::vector<double> beta_rows, cam_rows;
    for (std::size_t t = 0; t < length; ++t) {
        beta_rows.insert(beta_rows.end(), beta.begin(), beta.end());
        cam_rows.insert(cam_rows.end(), cam, cam + 3);
    }

    Video v;
    v.pose6d = Tensor::from({length, kJointCount, 6}, std::move(pose6d));
    v.beta = Tensor::from({length, kShapeDims}, std::move(beta_rows));
    v.camera = Tensor::from({length, 3}, std::move(cam_rows));
    const decoders::SmplOutput out = decoders::smpl_forward(body, {v.pose6d, v.beta, v.camera});
    v.joints3d = out.joints3d;
    v.joints2d = out.joints2d;
    v.pose_aa = reshape(geometry::matrix_to_axis_angle(out.rotations), {length, dofs});

    // Independent check against the plain forward kinematics.
    const auto j3 = v.joints3d.data();
    for (std::size_t t = 0; t < length; ++t) {
        const auto fk = kinematics::forward_kinematics(
            body, std::span<const geometry::Mat3>(rotations.data() + t * kJointCount, kJointCount), beta);
        for (std::size_t k = 0; k < kJointCount; ++k)
            for (std::size_t c = 0; c < 3; ++c)
                if (std::abs(fk.joints[k](static_cast<Eigen::Index>(c)) - j3[(t * kJointCount + k) * 3 + c]) > 1e-9)
                    throw std::logic_error("synth: ground-truth joints disagree with forward kinematics");
    }

    const std::size_t hw = cfg.grid_h * cfg.grid_w;
    std::vector<double> obs;
    obs.reserve(length * hw * kJointCount);
    const auto j2 = v.joints2d.data();
    for (std::size_t t = 0; t < length; ++t) {
        auto frame = rasterize(j2.subspan(t * kJointCount * 2, kJointCount * 2), cfg.grid_h, cfg.grid_w,
                               cfg.sigma_cells);
        for (double& x : frame) x += cfg.noise_std > 0.0 ? rng.normal(0.0, cfg.noise_std) : 0.0;
        obs.insert(obs.end(), frame.begin(), frame.end());
    }
    v.obs = Tensor::from({length, hw, kJointCount}, std::move(obs));
    return v;
}

Clip window(const Video& v, std::size_t begin, std::size_t length, std::size_t id) {
    const std::size_t end = begin + length;
    Clip c;
    c.id = id;
    c.obs = slice(v.obs, 0, begin, end);
    c.pose6d = slice(v.pose6d, 0, begin, end);
    c.pose_aa = slice(v.pose_aa, 0, begin, end);
    c.beta = slice(v.beta, 0, begin, end);
    c.camera = slice(v.camera, 0, begin, end);
    c.joints3d = slice(v.joints3d, 0, begin, end);
    c.joints2d = slice(v.joints2d, 0, begin, end);
    return c;
}

}  // namespace

std::vector<Clip> synth_generate(std::uint64_t seed, std::size_t count, const SynthConfig& cfg) {
    if (cfg.clip_length == 0 || cfg.clips_per_video == 0 || cfg.grid_h == 0 || cfg.grid_w == 0) {
        throw std::invalid_argument("synth_generate: extents must be positive");
    }
    NoGradGuard no_grad;
    const kinematics::KinematicTree body = kinematics::KinematicTree::smpl();
    const std::size_t length = cfg.clip_length + cfg.stride * (cfg.clips_per_video - 1);
    Rng rng(seed);
    std::vector<Clip> clips;
    clips.reserve(count);
    while (clips.size() < count) {
        const Video v = render_video(rng, length, cfg, body);
        for (std::size_t i = 0; i < cfg.clips_per_video && clips.size() < count; ++i)
            clips.push_back(window(v, i * cfg.stride, cfg.clip_length, clips.size()));
    }
    return clips;
}

std::vector<Clip> frames_as_images(const std::vector<Clip>& clips) {
    NoGradGuard no_grad;
    std::vector<Clip> out;
    for (const Clip& c : clips) {
        for (std::size_t t = 0; t < c.frames(); ++t) {
            Clip f;
            f.id = out.size();
            f.obs = slice(c.obs, 0, t, t + 1);
            f.pose6d = slice(c.pose6d, 0, t, t + 1);
            f.pose_aa = slice(c.pose_aa, 0, t, t + 1);
            f.beta = slice(c.beta, 0, t, t + 1);
            f.camera = slice(c.camera, 0, t, t + 1);
            f.joints3d = slice(c.joints3d, 0, t, t + 1);
            f.joints2d = slice(c.joints2d, 0, t, t + 1);
            f.has_3d = c.has_3d;
            out.push_back(std::move(f));
        }
    }
    return out;
}

ClipBatch make_batch(const std::vector<const Clip*>& clips) {
    if (clips.empty()) throw std::invalid_argument("make_batch: no clips");
    NoGradGuard no_grad;
    const std::size_t t = clips.front()->frames();
    std::vector<Tensor> obs, pose6d, pose_aa, beta, camera, j3, j2;
    std::vector<double> mask;
    for (const Clip* c : clips) {
        if (c->frames() != t) throw ShapeError("make_batch: clips differ in length");
        Shape s = c->obs.shape();
        s.insert(s.begin(), 1);
        obs.push_back(reshape(c->obs, s));
        pose6d.push_back(c->pose6d);
        pose_aa.push_back(c->pose_aa);
        beta.push_back(c->beta);
        camera.push_back(c->camera);
        j3.push_back(c->joints3d);
        j2.push_back(c->joints2d);
        mask.insert(mask.end(), t, c->has_3d ? 1.0 : 0.0);
    }
    ClipBatch b;
    b.batch = clips.size();
    b.frames = t;
    b.obs = concat(obs, 0);
    b.params = {concat(pose6d, 0), concat(beta, 0), concat(camera, 0)};
    b.target.joints3d = concat(j3, 0);
    b.target.joints2d = concat(j2, 0);
    b.target.pose_aa = concat(pose_aa, 0);
    b.target.beta = b.params.beta;
    const std::size_t rows = mask.size();
    b.target.has_3d = Tensor::from({rows}, std::move(mask));
    return b;
}

}  // namespace maed::synth
