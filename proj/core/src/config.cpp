// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "maed/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace maed {

std::string_view to_string(DecoderKind kind) { return kind == DecoderKind::kKtd ? "ktd" : "iterative"; }

std::string_view to_string(TreeKind kind) {
    switch (kind) {
        case TreeKind::kSmpl: return "smpl";
        case TreeKind::kRandom: return "random";
        case TreeKind::kReverse: return "reverse";
    }
    return "unknown";
}

DecoderKind parse_decoder(std::string_view name) {
    if (name == "ktd") return DecoderKind::kKtd;
    if (name == "iterative") return DecoderKind::kIterative;
    throw ConfigError("unknown decoder '" + std::string(name) + "'");
}

TreeKind parse_tree(std::string_view name) {
    if (name == "smpl") return TreeKind::kSmpl;
    if (name == "random") return TreeKind::kRandom;
    if (name == "reverse") return TreeKind::kReverse;
    throw ConfigError("unknown tree '" + std::string(name) + "'");
}

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("invalid value '" + std::string(value) + "' for key '" + std::string(key) + "'");
    }
    return out;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Field {
    std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field size_field(T RunConfig::*member) {
    return {[member](RunConfig& c, std::string_view k, std::string_view v) { c.*member = parse_number<T>(k, v); },
            [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

Field double_field(std::function<double&(RunConfig&)> ref) {
    return {[ref](RunConfig& c, std::string_view k, std::string_view v) { ref(c) = parse_number<double>(k, v); },
            [ref](const RunConfig& c) { return format_double(ref(const_cast<RunConfig&>(c))); }};
}

// Insertion order is the serialization order.
const std::vector<std::pair<std::string, Field>>& fields() {
    static const std::vector<std::pair<std::string, Field>> table = {
        {"encoder",
         {[](RunConfig& c, std::string_view, std::string_view v) { c.encoder = attention::parse_topology(v); },
          [](const RunConfig& c) { return std::string(attention::to_string(c.encoder)); }}},
        {"blocks", size_field(&RunConfig::blocks)},
        {"width", size_field(&RunConfig::width)},
        {"heads", size_field(&RunConfig::heads)},
        {"mlp_ratio", size_field(&RunConfig::mlp_ratio)},
        {"decoder",
         {[](RunConfig& c, std::string_view, std::string_view v) { c.decoder = parse_decoder(v); },
          [](const RunConfig& c) { return std::string(to_string(c.decoder)); }}},
        {"tree",
         {[](RunConfig& c, std::string_view, std::string_view v) { c.tree = parse_tree(v); },
          [](const RunConfig& c) { return std::string(to_string(c.tree)); }}},
        {"tree_seed", size_field(&RunConfig::tree_seed)},
        {"iterations", size_field(&RunConfig::iterations)},
        {"grid_h", size_field(&RunConfig::grid_h)},
        {"grid_w", size_field(&RunConfig::grid_w)},
        {"d_in", size_field(&RunConfig::d_in)},
        {"clip_length", size_field(&RunConfig::clip_length)},
        {"stride", size_field(&RunConfig::stride)},
        {"clips_per_video", size_field(&RunConfig::clips_per_video)},
        {"train_clips", size_field(&RunConfig::train_clips)},
        {"eval_clips", size_field(&RunConfig::eval_clips)},
        {"noise_std", double_field([](RunConfig& c) -> double& { return c.noise_std; })},
        {"amplitude", double_field([](RunConfig& c) -> double& { return c.amplitude; })},
        {"beta_std", double_field([](RunConfig& c) -> double& { return c.beta_std; })},
        {"lr", double_field([](RunConfig& c) -> double& { return c.adam.lr; })},
        {"beta1", double_field([](RunConfig& c) -> double& { return c.adam.beta1; })},
        {"beta2", double_field([](RunConfig& c) -> double& { return c.adam.beta2; })},
        {"eps", double_field([](RunConfig& c) -> double& { return c.adam.eps; })},
        {"image_steps", size_field(&RunConfig::image_steps)},
        {"video_steps", size_field(&RunConfig::video_steps)},
        {"video_fraction", double_field([](RunConfig& c) -> double& { return c.video_fraction; })},
        {"batch_clips", size_field(&RunConfig::batch_clips)},
        {"image_batch", size_field(&RunConfig::image_batch)},
        {"log_interval", size_field(&RunConfig::log_interval)},
        {"lambda_2d", double_field([](RunConfig& c) -> double& { return c.loss.lambda_2d; })},
        {"lambda_3d", double_field([](RunConfig& c) -> double& { return c.loss.lambda_3d; })},
        {"lambda_pose", double_field([](RunConfig& c) -> double& { return c.loss.lambda_pose; })},
        {"lambda_shape", double_field([](RunConfig& c) -> double& { return c.loss.lambda_shape; })},
        {"lambda_norm", double_field([](RunConfig& c) -> double& { return c.loss.lambda_norm; })},
        {"seed", size_field(&RunConfig::seed)},
        {"checkpoint_dtype",
         {[](RunConfig& c, std::string_view, std::string_view v) {
              if (v == "f32") c.checkpoint_dtype = CheckpointDtype::kF32;
              else if (v == "f64") c.checkpoint_dtype = CheckpointDtype::kF64;
              else throw ConfigError("checkpoint_dtype must be f32 or f64");
          },
          [](const RunConfig& c) { return std::string(c.checkpoint_dtype == CheckpointDtype::kF32 ? "f32" : "f64"); }}},
        {"threads", size_field(&RunConfig::threads)},
    };
    return table;
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
    for (const auto& [name, field] : fields()) {
        if (name == key) {
            field.set(*this, key, value);
            return;
        }
    }
    throw ConfigError("unknown config key '" + std::string(key) + "'");
}

RunConfig RunConfig::parse(std::string_view text) {
    RunConfig c;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view s = line;
        if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const auto key = trim(s.substr(0, eq));
        const auto value = trim(s.substr(eq + 1));
        try {
            c.set(key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    c.validate();
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string RunConfig::serialize() const {
    std::string out;
    for (const auto& [name, field] : fields()) out += name + " = " + field.get(*this) + "\n";
    return out;
}

void RunConfig::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config file " + path.string());
    out << serialize();
}

void RunConfig::validate() const {
    auto positive = [](std::size_t v, const char* name) {
        if (v == 0) throw ConfigError(std::string(name) + " must be positive");
    };
    positive(blocks, "blocks");
    positive(width, "width");
    positive(heads, "heads");
    positive(mlp_ratio, "mlp_ratio");
    positive(grid_h, "grid_h");
    positive(grid_w, "grid_w");
    positive(clip_length, "clip_length");
    positive(stride, "stride");
    positive(clips_per_video, "clips_per_video");
    positive(train_clips, "train_clips");
    positive(batch_clips, "batch_clips");
    positive(image_batch, "image_batch");
    positive(log_interval, "log_interval");
    positive(threads, "threads");
    if (width % heads != 0) throw ConfigError("width must be divisible by heads");
    if (d_in != 24) throw ConfigError("d_in must be 24 (one heatmap channel per joint)");
    if (!(adam.lr >= 0.0) || !std::isfinite(adam.lr)) throw ConfigError("lr must be finite and >= 0");
    if (!(video_fraction >= 0.0 && video_fraction <= 1.0)) throw ConfigError("video_fraction must lie in [0, 1]");
    if (noise_std < 0.0 || amplitude < 0.0 || beta_std < 0.0) throw ConfigError("data scales must be >= 0");
    try {
        loss.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

RunConfig overfit_config() {
    RunConfig c;
    c.encoder = attention::BlockTopology::kParallelV2;
    c.blocks = 2;
    c.width = 64;
    c.heads = 4;
    c.clip_length = 8;
    c.train_clips = 8;
    c.eval_clips = 8;
    c.clips_per_video = 1;
    c.batch_clips = 8;
    c.image_steps = 0;
    c.video_steps = 500;
    c.video_fraction = 1.0;
    c.adam.lr = 1e-3;
    c.log_interval = 50;
    return c;
}

}  // namespace maed
