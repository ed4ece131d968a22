// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "maed/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "maed/random.hpp"

namespace maed {

namespace {

constexpr std::uint64_t kSamplerSalt = 0x73616d706c657273ULL;
constexpr std::uint64_t kEvalSalt = 0x9e3779b97f4a7c15ULL;

// First `n` entries of a seeded Fisher-Yates shuffle of [0, size).
std::vector<std::size_t> sample_indices(Rng& rng, std::size_t size, std::size_t n) {
    std::vector<std::size_t> idx(size);
    std::iota(idx.begin(), idx.end(), 0);
    if (n >= size) return idx;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(size - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(n);
    return idx;
}

bool is_video_step(const RunConfig& cfg, std::size_t step) {
    if (step <= cfg.image_steps) return false;
    const auto k = static_cast<double>(step - cfg.image_steps);
    return std::floor(k * cfg.video_fraction) > std::floor((k - 1.0) * cfg.video_fraction);
}

void check_finite(const losses::LossReport& r, std::size_t step) {
    const std::pair<const char*, double> terms[] = {
        {"L_3D", r.l3d},          {"L_2D", r.l2d},   {"L_SMPL(pose)", r.smpl_pose},
        {"L_SMPL(shape)", r.smpl_shape}, {"L_NORM", r.norm}, {"total", r.total.item()},
    };
    for (const auto& [name, value] : terms) {
        if (!std::isfinite(value)) {
            throw TrainingError("non-finite loss term " + std::string(name) + " at step " + std::to_string(step));
        }
    }
}

}  // namespace

double scheduled_lr(const RunConfig& cfg, std::size_t step) {
    const double total = static_cast<double>(cfg.total_steps());
    const double done = static_cast<double>(step - 1);
    double lr = cfg.adam.lr;
    if (done >= 0.6 * total) lr *= 0.1;
    if (done >= 0.9 * total) lr *= 0.1;
    return lr;
}

losses::LossReport batch_loss(const Model& model, const synth::ClipBatch& batch) {
    const ModelOutput out = model.forward(batch.obs);
    const losses::Prediction pred{out.body.joints3d, out.body.joints2d, out.pose_aa, out.params.beta};
    return losses::total_loss(pred, batch.target, model.config.loss);
}

TrainResult train(const RunConfig& cfg, const std::vector<synth::Clip>& clips,
                  const std::function<void(const LossLogEntry&)>& on_log) {
    cfg.validate();
    if (clips.empty()) throw TrainingError("no training clips");
    TrainResult result{Model::make(cfg), {}};
    const nn::ParamList named = result.model.parameters();
    std::vector<Tensor> params = nn::tensors(named);
    const std::vector<synth::Clip> images = synth::frames_as_images(clips);

    AdamState state;
    state.config = cfg.adam;
    Rng sampler(cfg.seed ^ kSamplerSalt);

    const std::size_t total = cfg.total_steps();
    for (std::size_t step = 1; step <= total; ++step) {
        const bool video = is_video_step(cfg, step);
        std::vector<const synth::Clip*> chosen;
        if (video) {
            for (std::size_t i : sample_indices(sampler, clips.size(), cfg.batch_clips)) chosen.push_back(&clips[i]);
        } else {
            for (std::size_t i : sample_indices(sampler, images.size(), cfg.image_batch)) chosen.push_back(&images[i]);
        }
        const synth::ClipBatch batch = synth::make_batch(chosen);

        for (Tensor& p : params) p.zero_grad();
        const losses::LossReport report = batch_loss(result.model, batch);
        check_finite(report, step);
        report.total.backward();
        state.config.lr = scheduled_lr(cfg, step);
        adam_step(params, state);

        LossLogEntry e;
        e.step = step;
        e.stage = step <= cfg.image_steps ? 1 : 2;
        e.video = video;
        e.lr = state.config.lr;
        e.total = report.total.item();
        e.l3d = report.l3d;
        e.l2d = report.l2d;
        e.smpl = report.smpl();
        e.norm = report.norm;
        result.log.push_back(e);
        if (on_log && (step == 1 || step == total || step % cfg.log_interval == 0)) on_log(e);
    }
    for (Tensor& p : params) p.zero_grad();
    return result;
}

std::vector<synth::Clip> training_clips(const RunConfig& cfg) {
    return synth::synth_generate(cfg.seed, cfg.train_clips, synth::SynthConfig::from(cfg));
}

std::vector<synth::Clip> evaluation_clips(const RunConfig& cfg) {
    return synth::synth_generate(cfg.seed ^ kEvalSalt, cfg.eval_clips, synth::SynthConfig::from(cfg));
}

TrainResult train(const RunConfig& cfg, const std::function<void(const LossLogEntry&)>& on_log) {
    return train(cfg, training_clips(cfg), on_log);
}

void write_loss_log(const std::filesystem::path& path, const std::vector<LossLogEntry>& log) {
    std::ofstream out(path);
    if (!out) throw TrainingError("cannot write loss log " + path.string());
    out << "step,stage,video,lr,total,l3d,l2d,smpl,norm\n";
    char buf[512];
    for (const auto& e : log) {
        std::snprintf(buf, sizeof buf, "%zu,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", e.step, e.stage,
                      e.video ? 1 : 0, e.lr, e.total, e.l3d, e.l2d, e.smpl, e.norm);
        out << buf;
    }
}

}  // namespace maed
