// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "maed/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "maed/model.hpp"
#include "maed/random.hpp"
#include "maed/synth.hpp"
#include "maed/train.hpp"

namespace maed {

GradCheckResult check_gradients(const std::function<Tensor()>& loss, const nn::ParamList& inputs,
                                const GradCheckOptions& options) {
    std::vector<std::pair<std::size_t, std::size_t>> coords;  // (input, element)
    for (std::size_t i = 0; i < inputs.size(); ++i)
        for (std::size_t e = 0; e < inputs[i].tensor.numel(); ++e) coords.emplace_back(i, e);
    if (coords.empty()) throw std::invalid_argument("check_gradients: no inputs");

    const auto wanted = static_cast<std::size_t>(std::ceil(options.fraction * static_cast<double>(coords.size())));
    const std::size_t n = std::clamp<std::size_t>(wanted, 1, coords.size());
    if (n < coords.size()) {
        Rng rng(options.seed);
        for (std::size_t i = 0; i < n; ++i)
            std::swap(coords[i], coords[i + static_cast<std::size_t>(rng.below(coords.size() - i))]);
        coords.resize(n);
        std::sort(coords.begin(), coords.end());
    }

    for (const auto& in : inputs) {
        Tensor t = in.tensor;
        t.zero_grad();
    }
    const Tensor out = loss();
    if (out.numel() != 1) throw ShapeError("check_gradients: loss must be a scalar");
    out.backward();
    std::vector<double> analytic;
    analytic.reserve(coords.size());
    for (const auto& [i, e] : coords) {
        const Tensor& t = inputs[i].tensor;
        analytic.push_back(t.has_grad() ? t.grad()[e] : 0.0);
    }

    GradCheckResult r;
    r.checked = coords.size();
    double diff_sq = 0.0, a_sq = 0.0, n_sq = 0.0;
    NoGradGuard no_grad;
    for (std::size_t c = 0; c < coords.size(); ++c) {
        const auto [i, e] = coords[c];
        Tensor t = inputs[i].tensor;
        double& x = t.mutable_data()[e];
        const double saved = x;
        x = saved + options.step;
        const double up = loss().item();
        x = saved - options.step;
        const double down = loss().item();
        x = saved;
        const double numeric = (up - down) / (2.0 * options.step);
        const double d = analytic[c] - numeric;
        diff_sq += d * d;
        a_sq += analytic[c] * analytic[c];
        n_sq += numeric * numeric;
        if (r.worst.empty() || std::abs(d) > r.max_abs_error) {
            r.max_abs_error = std::abs(d);
            r.worst = inputs[i].name + "[" + std::to_string(e) + "]";
        }
    }
    const double scale = std::sqrt(std::max(a_sq, n_sq));
    r.relative_error = scale > 0.0 ? std::sqrt(diff_sq) / scale : 0.0;
    for (const auto& in : inputs) {
        Tensor t = in.tensor;
        t.zero_grad();
    }
    return r;
}

RunConfig gradcheck_config(DecoderKind decoder) {
    RunConfig c;
    c.encoder = attention::BlockTopology::kParallelV2;
    c.decoder = decoder;
    c.blocks = 2;
    c.width = 16;
    c.heads = 2;
    c.grid_h = 2;
    c.grid_w = 2;
    c.clip_length = 2;
    c.stride = 1;
    c.clips_per_video = 2;
    c.train_clips = 2;
    c.seed = 11;
    return c;
}

GradCheckResult end_to_end_gradcheck(const RunConfig& cfg, const GradCheckOptions& options) {
    const Model model = Model::make(cfg, decoders::HeadInit::kXavier);
    const auto clips = training_clips(cfg);
    std::vector<const synth::Clip*> ptrs;
    for (const auto& c : clips) ptrs.push_back(&c);
    const synth::ClipBatch batch = synth::make_batch(ptrs);
    return check_gradients([&] { return batch_loss(model, batch).total; }, model.parameters(), options);
}

}  // namespace maed
