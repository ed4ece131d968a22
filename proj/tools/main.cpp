// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

// maed: train, evaluate and inspect spatial-temporal encoder / kinematic
// decoder models on synthetic motion clips.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "maed/ablate.hpp"
#include "maed/attn_dump.hpp"
#include "maed/checkpoint.hpp"
#include "maed/config.hpp"
#include "maed/evaluate.hpp"
#include "maed/gradcheck.hpp"
#include "maed/synth.hpp"
#include "maed/train.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    std::string checkpoint;
    std::string encoder;
    std::string decoder;
    std::string tree;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "flat key = value config file");
    cmd->add_option("--seed", o.seed, "override the run seed");
    cmd->add_option("--out", o.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--checkpoint", o.checkpoint, "checkpoint path");
    cmd->add_option("--encoder", o.encoder,
                    "spatial-only|temporal-only|series|parallel-v1|parallel-v2|coupling");
    cmd->add_option("--decoder", o.decoder, "ktd|iterative");
    cmd->add_option("--tree", o.tree, "smpl|random|reverse");
    cmd->add_option("--set", o.overrides, "extra key=value overrides (repeatable)");
}

maed::RunConfig resolve_config(const CommonOptions& o, bool look_beside_checkpoint) {
    maed::RunConfig cfg;
    if (!o.config_path.empty()) {
        cfg = maed::RunConfig::load(o.config_path);
    } else if (look_beside_checkpoint && !o.checkpoint.empty()) {
        const fs::path beside = fs::path(o.checkpoint).parent_path() / "config.txt";
        if (fs::exists(beside)) cfg = maed::RunConfig::load(beside);
    }
    if (o.seed) cfg.seed = *o.seed;
    if (!o.encoder.empty()) cfg.set("encoder", o.encoder);
    if (!o.decoder.empty()) cfg.set("decoder", o.decoder);
    if (!o.tree.empty()) cfg.set("tree", o.tree);
    for (const auto& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw maed::ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

maed::Model load_model(const maed::RunConfig& cfg, const std::string& checkpoint) {
    maed::Model model = maed::Model::make(cfg);
    if (!checkpoint.empty()) maed::checkpoint::load_into(checkpoint, model.parameters());
    return model;
}

void print_entry(const maed::LossLogEntry& e) {
    std::printf("step %5zu  stage %d  %-5s  lr %.2e  loss %.6g  (3d %.4g  2d %.4g  smpl %.4g  norm %.4g)\n", e.step,
                e.stage, e.video ? "video" : "image", e.lr, e.total, e.l3d, e.l2d, e.smpl, e.norm);
    std::fflush(stdout);
}

int run_train(const CommonOptions& o) {
    const maed::RunConfig cfg = resolve_config(o, false);
    const fs::path out = o.out_dir;
    fs::create_directories(out);
    cfg.save(out / "config.txt");
    const auto start = std::chrono::steady_clock::now();
    maed::TrainResult result = maed::train(cfg, print_entry);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    maed::write_loss_log(out / "loss_log.csv", result.log);
    const fs::path ckpt = o.checkpoint.empty() ? out / "model.ckpt" : fs::path(o.checkpoint);
    maed::checkpoint::save(ckpt, result.model.parameters(), cfg.checkpoint_dtype);
    std::printf("trained %zu steps in %.1f s; checkpoint %s\n", cfg.total_steps(), secs, ckpt.c_str());
    return 0;
}

int run_eval(const CommonOptions& o, bool on_train, bool oracle) {
    if (o.checkpoint.empty() && !oracle) throw maed::ConfigError("eval requires --checkpoint");
    const maed::RunConfig cfg = resolve_config(o, true);
    const maed::Model model = load_model(cfg, o.checkpoint);
    const auto clips = on_train ? maed::training_clips(cfg) : maed::evaluation_clips(cfg);
    const maed::EvalReport report = maed::evaluate(model, clips, {oracle, cfg.threads});
    fs::create_directories(o.out_dir);
    const fs::path csv = fs::path(o.out_dir) / "metrics.csv";
    maed::write_metrics_csv(csv, report);
    std::printf("%zu clips  mpjpe %.3f mm  pa_mpjpe %.3f mm  accel %.3f mm/frame^2  -> %s\n", report.rows.size(),
                report.mean.mpjpe, report.mean.pa_mpjpe, report.mean.accel, csv.c_str());
    return 0;
}

int run_gradcheck(const CommonOptions& o, double fraction, double tolerance) {
    int status = 0;
    for (auto kind : {maed::DecoderKind::kKtd, maed::DecoderKind::kIterative}) {
        maed::RunConfig cfg = maed::gradcheck_config(kind);
        if (o.seed) cfg.seed = *o.seed;
        if (!o.encoder.empty()) cfg.set("encoder", o.encoder);
        maed::GradCheckOptions opts;
        opts.fraction = fraction;
        opts.seed = cfg.seed;
        const auto r = maed::end_to_end_gradcheck(cfg, opts);
        const bool ok = r.relative_error < tolerance;
        std::printf("%-9s %s  coords %zu  rel_err %.3e  max_abs %.3e  worst %s\n",
                    std::string(maed::to_string(kind)).c_str(), ok ? "PASS" : "FAIL", r.checked, r.relative_error,
                    r.max_abs_error, r.worst.c_str());
        if (!ok) status = 1;
    }
    return status;
}

int run_ablate(const CommonOptions& o) {
    const maed::RunConfig base = resolve_config(o, false);
    fs::create_directories(o.out_dir);
    const auto rows = maed::ablate(base, maed::default_variants(), [](const maed::AblationRow& r) {
        std::printf("%-28s loss %.5g  mpjpe %.2f  pa_mpjpe %.2f  accel %.2f\n", r.variant.label().c_str(),
                    r.final_loss, r.eval.mean.mpjpe, r.eval.mean.pa_mpjpe, r.eval.mean.accel);
        std::fflush(stdout);
    });
    const fs::path csv = fs::path(o.out_dir) / "ablation.csv";
    maed::write_ablation_csv(csv, rows);
    std::printf("wrote %s (desk-scale, not comparable to published numbers)\n", csv.c_str());
    return 0;
}

int run_attn_dump(const CommonOptions& o, std::size_t clip_index) {
    const maed::RunConfig cfg = resolve_config(o, true);
    const maed::Model model = load_model(cfg, o.checkpoint);
    const auto clips = maed::evaluation_clips(cfg);
    if (clip_index >= clips.size()) throw maed::ConfigError("clip index out of range");
    const auto files = maed::attn_dump(model, clips[clip_index], o.out_dir);
    for (const auto& f : files) std::printf("%s\n", f.c_str());
    return 0;
}

int run_synth(const CommonOptions& o, std::size_t count) {
    const maed::RunConfig cfg = resolve_config(o, false);
    const auto clips = maed::synth::synth_generate(cfg.seed, count, maed::synth::SynthConfig::from(cfg));
    fs::create_directories(o.out_dir);
    const fs::path path = fs::path(o.out_dir) / "clips.csv";
    std::ofstream out(path);
    out << "clip_id,frame,joint,x,y,z,u,v\n";
    for (const auto& c : clips) {
        const auto j3 = c.joints3d.data();
        const auto j2 = c.joints2d.data();
        for (std::size_t t = 0; t < c.frames(); ++t) {
            for (std::size_t k = 0; k < 24; ++k) {
                const std::size_t i = t * 24 + k;
                out << c.id << ',' << t << ',' << k << ',' << j3[3 * i] << ',' << j3[3 * i + 1] << ','
                    << j3[3 * i + 2] << ',' << j2[2 * i] << ',' << j2[2 * i + 1] << '\n';
            }
        }
    }
    std::printf("%zu clips of %zu frames -> %s\n", clips.size(), cfg.clip_length, path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatial-temporal encoder and kinematic topology decoder on synthetic motion"};
    app.require_subcommand(1);

    CommonOptions train_o, eval_o, grad_o, ablate_o, dump_o, synth_o;
    bool eval_on_train = false, eval_oracle = false;
    double grad_fraction = 0.01, grad_tol = 1e-4;
    std::size_t dump_clip = 0, synth_count = 8;

    auto* train = app.add_subcommand("train", "train a model and write a checkpoint and loss log");
    add_common(train, train_o);
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint and write metrics.csv");
    add_common(eval, eval_o);
    eval->add_flag("--train-set", eval_on_train, "evaluate on the training clips");
    eval->add_flag("--oracle", eval_oracle, "decode with ground-truth parameters");
    auto* grad = app.add_subcommand("gradcheck", "end-to-end finite-difference gradient check");
    add_common(grad, grad_o);
    grad->add_option("--fraction", grad_fraction, "fraction of parameters probed")->capture_default_str();
    grad->add_option("--tolerance", grad_tol, "relative error bound")->capture_default_str();
    auto* abl = app.add_subcommand("ablate", "train and evaluate encoder/decoder variants");
    add_common(abl, ablate_o);
    auto* dump = app.add_subcommand("attn-dump", "write attention maps as CSV and PGM");
    add_common(dump, dump_o);
    dump->add_option("--clip", dump_clip, "evaluation clip index")->capture_default_str();
    auto* syn = app.add_subcommand("synth", "generate synthetic clips and write their joints");
    add_common(syn, synth_o);
    syn->add_option("--count", synth_count, "number of clips")->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*train) return run_train(train_o);
        if (*eval) return run_eval(eval_o, eval_on_train, eval_oracle);
        if (*grad) return run_gradcheck(grad_o, grad_fraction, grad_tol);
        if (*abl) return run_ablate(ablate_o);
        if (*dump) return run_attn_dump(dump_o, dump_clip);
        if (*syn) return run_synth(synth_o, synth_count);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
