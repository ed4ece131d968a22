// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "maed/ablate.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "maed/train.hpp"

namespace maed {

namespace {

std::string decoder_label(const Variant& v) {
    if (v.decoder == DecoderKind::kIterative) return "iterative";
    switch (v.tree) {
        case TreeKind::kSmpl: return "ktd";
        case TreeKind::kRandom: return "ktd_random";
        case TreeKind::kReverse: return "ktd_reverse";
    }
    return "ktd";
}

}  // namespace

std::string Variant::label() const { return std::string(attention::to_string(encoder)) + "/" + decoder_label(*this); }

RunConfig Variant::apply(const RunConfig& base) const {
    RunConfig c = base;
    c.encoder = encoder;
    c.decoder = decoder;
    c.tree = tree;
    return c;
}

std::vector<Variant> default_variants() {
    std::vector<Variant> out;
    for (auto topo : attention::all_topologies()) out.push_back({topo, DecoderKind::kIterative, TreeKind::kSmpl});
    for (auto tree : {TreeKind::kSmpl, TreeKind::kRandom, TreeKind::kReverse})
        out.push_back({attention::BlockTopology::kParallelV2, DecoderKind::kKtd, tree});
    return out;
}

std::vector<AblationRow> ablate(const RunConfig& base, const std::vector<Variant>& variants,
                                const std::function<void(const AblationRow&)>& on_row) {
    base.validate();
    std::vector<Variant> unique;
    for (const auto& v : variants)
        if (std::find(unique.begin(), unique.end(), v) == unique.end()) unique.push_back(v);

    const auto train_set = training_clips(base);
    const auto eval_set = evaluation_clips(base);
    std::vector<AblationRow> rows;
    for (const auto& v : unique) {
        const RunConfig cfg = v.apply(base);
        TrainResult tr = train(cfg, train_set);
        AblationRow row;
        row.variant = v;
        row.final_loss = tr.log.empty() ? 0.0 : tr.log.back().total;
        row.eval = evaluate(tr.model, eval_set, {false, cfg.threads});
        if (on_row) on_row(row);
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_ablation_csv(const std::filesystem::path& path, const std::vector<AblationRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write ablation table " + path.string());
    out << "# desk-scale synthetic-data results; not comparable to published benchmark numbers\n";
    out << "encoder,decoder,final_loss,mpjpe,pa_mpjpe,accel\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g,%.17g,%.17g\n",
                      std::string(attention::to_string(r.variant.encoder)).c_str(), decoder_label(r.variant).c_str(),
                      r.final_loss, r.eval.mean.mpjpe, r.eval.mean.pa_mpjpe, r.eval.mean.accel);
        out << buf;
    }
}

}  // namespace maed
