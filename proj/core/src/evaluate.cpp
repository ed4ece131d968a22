// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "maed/evaluate.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

#include "maed/metrics.hpp"
#include "maed/ops.hpp"

namespace maed {

namespace {

ClipMetrics evaluate_clip(const Model& model, const synth::Clip& clip, bool oracle) {
    NoGradGuard no_grad;
    Shape s = clip.obs.shape();
    s.insert(s.begin(), 1);
    const decoders::SmplParams gt{clip.pose6d, clip.beta, clip.camera};
    const ModelOutput out = model.forward(reshape(clip.obs, s), oracle ? &gt : nullptr);

    ClipMetrics m;
    m.clip_id = clip.id;
    m.mpjpe = metrics::mpjpe(out.body.joints3d, clip.joints3d);
    m.pa_mpjpe = metrics::pa_mpjpe(out.body.joints3d, clip.joints3d);
    m.accel = clip.frames() >= 3 ? metrics::accel_error(out.body.joints3d, clip.joints3d)
                                 : std::numeric_limits<double>::quiet_NaN();
    return m;
}

}  // namespace

EvalReport evaluate(const Model& model, const std::vector<synth::Clip>& clips, const EvalOptions& options) {
    EvalReport report;
    report.rows.resize(clips.size());
    const std::size_t workers = std::max<std::size_t>(1, std::min(options.threads, clips.size()));
    if (workers == 1) {
        for (std::size_t i = 0; i < clips.size(); ++i) report.rows[i] = evaluate_clip(model, clips[i], options.oracle);
    } else {
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < clips.size(); i += workers)
                        report.rows[i] = evaluate_clip(model, clips[i], options.oracle);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    // Per-clip results are reduced in clip order, independent of the thread count.
    double accel_sum = 0.0;
    std::size_t accel_count = 0;
    for (const auto& r : report.rows) {
        report.mean.mpjpe += r.mpjpe;
        report.mean.pa_mpjpe += r.pa_mpjpe;
        if (!std::isnan(r.accel)) {
            accel_sum += r.accel;
            ++accel_count;
        }
    }
    const double n = static_cast<double>(std::max<std::size_t>(1, report.rows.size()));
    report.mean.mpjpe /= n;
    report.mean.pa_mpjpe /= n;
    report.mean.accel = accel_count ? accel_sum / static_cast<double>(accel_count)
                                    : std::numeric_limits<double>::quiet_NaN();
    return report;
}

void write_metrics_csv(const std::filesystem::path& path, const EvalReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write metrics " + path.string());
    out << "clip_id,mpjpe,pa_mpjpe,accel\n";
    char buf[256];
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", r.clip_id, r.mpjpe, r.pa_mpjpe, r.accel);
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "mean,%.17g,%.17g,%.17g\n", report.mean.mpjpe, report.mean.pa_mpjpe,
                  report.mean.accel);
    out << buf;
}

}  // namespace maed
